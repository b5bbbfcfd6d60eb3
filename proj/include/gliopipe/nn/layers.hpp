#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "gliopipe/nn/tensor.hpp"
#include "gliopipe/rng.hpp"

namespace gliopipe::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

inline void he_normal_fill(std::vector<double>& w, int fan_in, Rng& rng,
                           double scale = 1.0) {
    const double sd = scale * std::sqrt(2.0 / fan_in);
    for (double& x : w) x = rng.normal(0.0, sd);
}

// 3D convolution, stride 1, cubic kernel k with padding p (same-size output
// for k=3/p=1 and k=1/p=0). im2col + GEMM on both passes.
class Conv3d {
public:
    Conv3d() = default;
    Conv3d(std::string name, int in_channels, int out_channels, int kernel, int pad)
        : in_(in_channels), out_(out_channels), k_(kernel), pad_(pad) {
        weight.init(name + ".weight", {out_channels, in_channels, kernel, kernel, kernel});
        bias.init(name + ".bias", {out_channels});
    }

    void init_params(Rng& rng, double scale = 1.0) {
        he_normal_fill(weight.value, in_ * k_ * k_ * k_, rng, scale);
    }

    Tensor forward(const Tensor& x) {
        if (x.c != in_)
            throw ShapeError("conv expects " + std::to_string(in_) + " channels, got " +
                             std::to_string(x.c));
        in_dims_ = x.dims();
        const auto n = static_cast<Eigen::Index>(x.spatial());
        const int kk = k_ * k_ * k_;
        col_.resize(static_cast<Eigen::Index>(in_) * kk, n);
        fill_col(x);

        Tensor y(out_, x.d, x.h, x.w);
        RowMap ymap(y.v.data(), out_, n);
        ConstRowMap wmap(weight.value.data(), out_, static_cast<Eigen::Index>(in_) * kk);
        ymap.noalias() = wmap * col_;
        for (int co = 0; co < out_; ++co) ymap.row(co).array() += bias.value[co];
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const auto n = static_cast<Eigen::Index>(gy.spatial());
        const int kk = k_ * k_ * k_;
        ConstRowMap gymap(gy.v.data(), out_, n);
        RowMap gwmap(weight.grad.data(), out_, static_cast<Eigen::Index>(in_) * kk);
        gwmap.noalias() += gymap * col_.transpose();
        for (int co = 0; co < out_; ++co) bias.grad[co] += gymap.row(co).sum();

        ConstRowMap wmap(weight.value.data(), out_, static_cast<Eigen::Index>(in_) * kk);
        Eigen::MatrixXd gcol = wmap.transpose() * gymap;

        Tensor gx(in_, in_dims_.d, in_dims_.h, in_dims_.w);
        scatter_col(gcol, gx);
        return gx;
    }

    Param weight, bias;

private:
    void fill_col(const Tensor& x) {
        const int D = x.d, H = x.h, W = x.w;
        Eigen::Index jcol = 0;
        for (int od = 0; od < D; ++od)
            for (int oh = 0; oh < H; ++oh)
                for (int ow = 0; ow < W; ++ow, ++jcol) {
                    double* colp = col_.data() + jcol * col_.rows();  // col-major
                    Eigen::Index r = 0;
                    for (int ci = 0; ci < in_; ++ci)
                        for (int kd = 0; kd < k_; ++kd) {
                            const int id = od + kd - pad_;
                            for (int kh = 0; kh < k_; ++kh) {
                                const int ih = oh + kh - pad_;
                                for (int kw = 0; kw < k_; ++kw, ++r) {
                                    const int iw = ow + kw - pad_;
                                    colp[r] = (id < 0 || id >= D || ih < 0 || ih >= H ||
                                               iw < 0 || iw >= W)
                                                  ? 0.0
                                                  : x.at(ci, id, ih, iw);
                                }
                            }
                        }
                }
    }

    void scatter_col(const Eigen::MatrixXd& gcol, Tensor& gx) const {
        const int D = gx.d, H = gx.h, W = gx.w;
        Eigen::Index jcol = 0;
        for (int od = 0; od < D; ++od)
            for (int oh = 0; oh < H; ++oh)
                for (int ow = 0; ow < W; ++ow, ++jcol) {
                    const double* colp = gcol.data() + jcol * gcol.rows();
                    Eigen::Index r = 0;
                    for (int ci = 0; ci < in_; ++ci)
                        for (int kd = 0; kd < k_; ++kd) {
                            const int id = od + kd - pad_;
                            for (int kh = 0; kh < k_; ++kh) {
                                const int ih = oh + kh - pad_;
                                for (int kw = 0; kw < k_; ++kw, ++r) {
                                    const int iw = ow + kw - pad_;
                                    if (id < 0 || id >= D || ih < 0 || ih >= H || iw < 0 ||
                                        iw >= W)
                                        continue;
                                    gx.at(ci, id, ih, iw) += colp[r];
                                }
                            }
                        }
                }
    }

    int in_ = 0, out_ = 0, k_ = 3, pad_ = 1;
    Dims3 in_dims_;
    Eigen::MatrixXd col_;
};

// Transposed 3D convolution, kernel 2 stride 2 (doubles every spatial dim).
// Each output voxel receives exactly one (input voxel, offset) contribution.
class ConvTranspose3d {
public:
    ConvTranspose3d() = default;
    ConvTranspose3d(std::string name, int in_channels, int out_channels)
        : in_(in_channels), out_(out_channels) {
        weight.init(name + ".weight", {in_channels, out_channels, 2, 2, 2});
        bias.init(name + ".bias", {out_channels});
    }

    void init_params(Rng& rng, double scale = 1.0) {
        he_normal_fill(weight.value, in_, rng, scale);
    }

    Tensor forward(const Tensor& x) {
        if (x.c != in_) throw ShapeError("tconv channel mismatch");
        in_dims_ = x.dims();
        x_ = x;
        const auto n = static_cast<Eigen::Index>(x.spatial());
        ConstRowMap xmap(x.v.data(), in_, n);
        ConstRowMap wmap(weight.value.data(), in_, static_cast<Eigen::Index>(out_) * 8);
        Eigen::MatrixXd y8 = wmap.transpose() * xmap;  // (out*8) x n

        Tensor y(out_, 2 * x.d, 2 * x.h, 2 * x.w);
        for (int co = 0; co < out_; ++co)
            for (int o = 0; o < 8; ++o) {
                const int kd = o >> 2, kh = (o >> 1) & 1, kw = o & 1;
                Eigen::Index j = 0;
                for (int d = 0; d < x.d; ++d)
                    for (int h = 0; h < x.h; ++h)
                        for (int w = 0; w < x.w; ++w, ++j)
                            y.at(co, 2 * d + kd, 2 * h + kh, 2 * w + kw) =
                                y8(static_cast<Eigen::Index>(co) * 8 + o, j) +
                                bias.value[co];
            }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const auto n = static_cast<Eigen::Index>(in_dims_.voxels());
        Eigen::MatrixXd gy8(static_cast<Eigen::Index>(out_) * 8, n);
        for (int co = 0; co < out_; ++co) {
            double bsum = 0;
            for (int o = 0; o < 8; ++o) {
                const int kd = o >> 2, kh = (o >> 1) & 1, kw = o & 1;
                Eigen::Index j = 0;
                for (int d = 0; d < in_dims_.d; ++d)
                    for (int h = 0; h < in_dims_.h; ++h)
                        for (int w = 0; w < in_dims_.w; ++w, ++j) {
                            const double g = gy.at(co, 2 * d + kd, 2 * h + kh, 2 * w + kw);
                            gy8(static_cast<Eigen::Index>(co) * 8 + o, j) = g;
                            bsum += g;
                        }
            }
            bias.grad[co] += bsum;
        }
        ConstRowMap xmap(x_.v.data(), in_, n);
        RowMap gwmap(weight.grad.data(), in_, static_cast<Eigen::Index>(out_) * 8);
        gwmap.noalias() += xmap * gy8.transpose();

        ConstRowMap wmap(weight.value.data(), in_, static_cast<Eigen::Index>(out_) * 8);
        Tensor gx(in_, in_dims_.d, in_dims_.h, in_dims_.w);
        RowMap gxmap(gx.v.data(), in_, n);
        gxmap.noalias() = wmap * gy8;
        return gx;
    }

    Param weight, bias;

private:
    int in_ = 0, out_ = 0;
    Dims3 in_dims_;
    Tensor x_;
};

// Instance normalization with learnable scale/shift, statistics per channel
// over the spatial extent.
class InstanceNorm {
public:
    InstanceNorm() = default;
    InstanceNorm(std::string name, int channels) : c_(channels) {
        gamma.init(name + ".gamma", {channels});
        beta.init(name + ".beta", {channels});
        std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
    }

    Tensor forward(const Tensor& x) {
        if (x.c != c_) throw ShapeError("instance norm channel mismatch");
        const std::size_t n = x.spatial();
        xhat_ = x;
        invstd_.assign(c_, 0.0);
        Tensor y(x.c, x.d, x.h, x.w);
        for (int ci = 0; ci < c_; ++ci) {
            double* xh = xhat_.v.data() + ci * n;
            double mean = 0, mean2 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                mean += xh[i];
                mean2 += xh[i] * xh[i];
            }
            mean /= static_cast<double>(n);
            mean2 /= static_cast<double>(n);
            double var = mean2 - mean * mean;
            if (var < 0) var = 0;
            const double inv = 1.0 / std::sqrt(var + kEps);
            invstd_[ci] = inv;
            double* yp = y.v.data() + ci * n;
            for (std::size_t i = 0; i < n; ++i) {
                xh[i] = (xh[i] - mean) * inv;
                yp[i] = gamma.value[ci] * xh[i] + beta.value[ci];
            }
        }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const std::size_t n = gy.spatial();
        Tensor gx(gy.c, gy.d, gy.h, gy.w);
        for (int ci = 0; ci < c_; ++ci) {
            const double* gyp = gy.v.data() + ci * n;
            const double* xh = xhat_.v.data() + ci * n;
            double* gxp = gx.v.data() + ci * n;
            double sum_g = 0, sum_gx = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sum_g += gyp[i];
                sum_gx += gyp[i] * xh[i];
            }
            gamma.grad[ci] += sum_gx;
            beta.grad[ci] += sum_g;
            const double g = gamma.value[ci], inv = invstd_[ci];
            const double mg = sum_g / static_cast<double>(n);
            const double mgx = sum_gx / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                gxp[i] = g * inv * (gyp[i] - mg - xh[i] * mgx);
        }
        return gx;
    }

    Param gamma, beta;
    static constexpr double kEps = 1e-5;

private:
    int c_ = 0;
    Tensor xhat_;
    std::vector<double> invstd_;
};

class Relu {
public:
    Tensor forward(const Tensor& x) {
        mask_.assign(x.size(), 0);
        Tensor y = x;
        for (std::size_t i = 0; i < y.v.size(); ++i) {
            if (y.v[i] > 0) {
                mask_[i] = 1;
            } else {
                y.v[i] = 0;
            }
        }
        return y;
    }
    Tensor backward(const Tensor& gy) {
        Tensor gx = gy;
        for (std::size_t i = 0; i < gx.v.size(); ++i)
            if (!mask_[i]) gx.v[i] = 0;
        return gx;
    }

private:
    std::vector<std::uint8_t> mask_;
};

// 2x2x2 max pooling, stride 2. Requires even spatial dims.
class MaxPool3d {
public:
    Tensor forward(const Tensor& x) {
        if (x.d % 2 || x.h % 2 || x.w % 2)
            throw ShapeError("max pool needs even dims, got " + x.shape_str());
        in_dims_ = x.dims();
        Tensor y(x.c, x.d / 2, x.h / 2, x.w / 2);
        argmax_.assign(y.size(), 0);
        std::size_t oi = 0;
        for (int ci = 0; ci < x.c; ++ci)
            for (int d = 0; d < y.d; ++d)
                for (int h = 0; h < y.h; ++h)
                    for (int w = 0; w < y.w; ++w, ++oi) {
                        double best = -std::numeric_limits<double>::infinity();
                        std::size_t besti = 0;
                        for (int o = 0; o < 8; ++o) {
                            const int id = 2 * d + (o >> 2), ih = 2 * h + ((o >> 1) & 1),
                                      iw = 2 * w + (o & 1);
                            const std::size_t idx =
                                ((static_cast<std::size_t>(ci) * x.d + id) * x.h + ih) *
                                    x.w +
                                iw;
                            if (x.v[idx] > best) {
                                best = x.v[idx];
                                besti = idx;
                            }
                        }
                        y.v[oi] = best;
                        argmax_[oi] = besti;
                    }
        return y;
    }

    Tensor backward(const Tensor& gy) {
        Tensor gx(gy.c, in_dims_.d, in_dims_.h, in_dims_.w);
        for (std::size_t i = 0; i < gy.v.size(); ++i) gx.v[argmax_[i]] += gy.v[i];
        return gx;
    }

private:
    Dims3 in_dims_;
    std::vector<std::size_t> argmax_;
};

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.d != b.d || a.h != b.h || a.w != b.w)
        throw ShapeError("concat spatial mismatch: " + a.shape_str() + " vs " +
                         b.shape_str());
    Tensor y(a.c + b.c, a.d, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), y.v.begin());
    std::copy(b.v.begin(), b.v.end(), y.v.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return y;
}

inline std::pair<Tensor, Tensor> split_channels(const Tensor& g, int c_first) {
    Tensor ga(c_first, g.d, g.h, g.w);
    Tensor gb(g.c - c_first, g.d, g.h, g.w);
    std::copy(g.v.begin(), g.v.begin() + static_cast<std::ptrdiff_t>(ga.size()),
              ga.v.begin());
    std::copy(g.v.begin() + static_cast<std::ptrdiff_t>(ga.size()), g.v.end(),
              gb.v.begin());
    return {std::move(ga), std::move(gb)};
}

}  // namespace gliopipe::nn
