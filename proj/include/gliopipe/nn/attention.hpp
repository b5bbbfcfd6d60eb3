#pragma once

#include <cmath>
#include <vector>

#include "gliopipe/nn/layers.hpp"
#include "gliopipe/nn/tensor.hpp"
#include "gliopipe/rng.hpp"

namespace gliopipe::nn {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Spatial excitation: a 1x1x1 convolution squeezes the channel axis to one
// map, followed by a sigmoid. Gate shape (1, D, H, W).
class SpatialGate {
public:
    SpatialGate() = default;
    SpatialGate(std::string name, int channels) : c_(channels) {
        weight.init(name + ".weight", {channels});
        bias.init(name + ".bias", {1});
    }

    void init_params(Rng& rng) { he_normal_fill(weight.value, c_, rng); }

    Tensor forward(const Tensor& f) {
        if (f.c != c_) throw ShapeError("spatial gate channel mismatch");
        const std::size_t n = f.spatial();
        Tensor gate(1, f.d, f.h, f.w);
        for (std::size_t x = 0; x < n; ++x) {
            double pre = bias.value[0];
            for (int ci = 0; ci < c_; ++ci) pre += weight.value[ci] * f.v[ci * n + x];
            gate.v[x] = sigmoid(pre);
        }
        gate_ = gate;
        return gate;
    }

    // ggate: dL/dgate (1,D,H,W); f is the forward input. Returns dL/dF.
    Tensor backward(const Tensor& ggate, const Tensor& f) {
        const std::size_t n = f.spatial();
        Tensor gf(f.c, f.d, f.h, f.w);
        for (std::size_t x = 0; x < n; ++x) {
            const double s = gate_.v[x];
            const double gpre = ggate.v[x] * s * (1.0 - s);
            bias.grad[0] += gpre;
            for (int ci = 0; ci < c_; ++ci) {
                weight.grad[ci] += gpre * f.v[ci * n + x];
                gf.v[ci * n + x] = gpre * weight.value[ci];
            }
        }
        return gf;
    }

    const Tensor& gate() const { return gate_; }

    Param weight, bias;

private:
    int c_ = 0;
    Tensor gate_;
};

// Channel excitation: global average pooling followed by a two-layer
// bottleneck (C -> C/r -> C) with a sigmoid. Gate shape (C).
class ChannelGate {
public:
    ChannelGate() = default;
    ChannelGate(std::string name, int channels, int reduction) : c_(channels) {
        if (channels % reduction != 0)
            throw ConfigError("channel count " + std::to_string(channels) +
                              " not divisible by reduction ratio " +
                              std::to_string(reduction));
        hidden_ = channels / reduction;
        w1.init(name + ".w1", {hidden_, channels});
        b1.init(name + ".b1", {hidden_});
        w2.init(name + ".w2", {channels, hidden_});
        b2.init(name + ".b2", {channels});
    }

    void init_params(Rng& rng) {
        he_normal_fill(w1.value, c_, rng);
        he_normal_fill(w2.value, hidden_, rng);
    }

    std::vector<double> forward(const Tensor& f) {
        if (f.c != c_) throw ShapeError("channel gate channel mismatch");
        const std::size_t n = f.spatial();
        z_.assign(c_, 0.0);
        for (int ci = 0; ci < c_; ++ci) {
            double s = 0;
            for (std::size_t x = 0; x < n; ++x) s += f.v[ci * n + x];
            z_[ci] = s / static_cast<double>(n);
        }
        hpre_.assign(hidden_, 0.0);
        h_.assign(hidden_, 0.0);
        for (int j = 0; j < hidden_; ++j) {
            double s = b1.value[j];
            for (int ci = 0; ci < c_; ++ci) s += w1.value[j * c_ + ci] * z_[ci];
            hpre_[j] = s;
            h_[j] = s > 0 ? s : 0;
        }
        gate_.assign(c_, 0.0);
        for (int ci = 0; ci < c_; ++ci) {
            double s = b2.value[ci];
            for (int j = 0; j < hidden_; ++j) s += w2.value[ci * hidden_ + j] * h_[j];
            gate_[ci] = sigmoid(s);
        }
        return gate_;
    }

    // ggate: dL/dgate per channel. Returns dL/dF.
    Tensor backward(const std::vector<double>& ggate, const Tensor& f) {
        const std::size_t n = f.spatial();
        std::vector<double> gpre(c_);
        for (int ci = 0; ci < c_; ++ci)
            gpre[ci] = ggate[ci] * gate_[ci] * (1.0 - gate_[ci]);

        std::vector<double> gh(hidden_, 0.0);
        for (int ci = 0; ci < c_; ++ci) {
            b2.grad[ci] += gpre[ci];
            for (int j = 0; j < hidden_; ++j) {
                w2.grad[ci * hidden_ + j] += gpre[ci] * h_[j];
                gh[j] += gpre[ci] * w2.value[ci * hidden_ + j];
            }
        }
        std::vector<double> gz(c_, 0.0);
        for (int j = 0; j < hidden_; ++j) {
            if (hpre_[j] <= 0) continue;
            b1.grad[j] += gh[j];
            for (int ci = 0; ci < c_; ++ci) {
                w1.grad[j * c_ + ci] += gh[j] * z_[ci];
                gz[ci] += gh[j] * w1.value[j * c_ + ci];
            }
        }
        Tensor gf(f.c, f.d, f.h, f.w);
        for (int ci = 0; ci < c_; ++ci) {
            const double g = gz[ci] / static_cast<double>(n);
            for (std::size_t x = 0; x < n; ++x) gf.v[ci * n + x] = g;
        }
        return gf;
    }

    const std::vector<double>& gate() const { return gate_; }
    const std::vector<double>& pooled() const { return z_; }

    Param w1, b1, w2, b2;

private:
    int c_ = 0, hidden_ = 0;
    std::vector<double> z_, hpre_, h_, gate_;
};

// The skip attention unit: spatial and channel excitations run in parallel
// and are fused with the identity, out = F + F.s + F.e.
class SkipAttention {
public:
    SkipAttention() = default;
    SkipAttention(std::string name, int channels, int reduction)
        : spatial_(name + ".spatial", channels),
          channel_(name + ".channel", channels, reduction) {}

    void init_params(Rng& rng) {
        spatial_.init_params(rng);
        channel_.init_params(rng);
    }

    Tensor forward(const Tensor& f) {
        f_ = f;
        const Tensor s = spatial_.forward(f);
        const std::vector<double> e = channel_.forward(f);
        const std::size_t n = f.spatial();
        Tensor y(f.c, f.d, f.h, f.w);
        for (int ci = 0; ci < f.c; ++ci)
            for (std::size_t x = 0; x < n; ++x)
                y.v[ci * n + x] = f.v[ci * n + x] * (1.0 + s.v[x] + e[ci]);
        return y;
    }

    Tensor backward(const Tensor& gy) {
        const std::size_t n = f_.spatial();
        const Tensor& s = spatial_.gate();
        const std::vector<double>& e = channel_.gate();

        // direct path through the three products
        Tensor gf(f_.c, f_.d, f_.h, f_.w);
        Tensor gs(1, f_.d, f_.h, f_.w);
        std::vector<double> ge(f_.c, 0.0);
        for (int ci = 0; ci < f_.c; ++ci) {
            double gei = 0;
            for (std::size_t x = 0; x < n; ++x) {
                const double g = gy.v[ci * n + x];
                const double fv = f_.v[ci * n + x];
                gf.v[ci * n + x] = g * (1.0 + s.v[x] + e[ci]);
                gs.v[x] += g * fv;
                gei += g * fv;
            }
            ge[ci] = gei;
        }
        const Tensor gf_s = spatial_.backward(gs, f_);
        const Tensor gf_e = channel_.backward(ge, f_);
        for (std::size_t i = 0; i < gf.v.size(); ++i) gf.v[i] += gf_s.v[i] + gf_e.v[i];
        return gf;
    }

    SpatialGate& spatial() { return spatial_; }
    ChannelGate& channel() { return channel_; }

private:
    SpatialGate spatial_;
    ChannelGate channel_;
    Tensor f_;
};

}  // namespace gliopipe::nn
