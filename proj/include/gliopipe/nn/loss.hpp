#pragma once

#include <cmath>
#include <vector>

#include "gliopipe/nn/tensor.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe::nn {

// BraTS label {0,1,2,4} <-> contiguous class index {0,1,2,3}.
inline int label_to_class(std::uint8_t label) {
    switch (label) {
        case 0: return 0;
        case 1: return 1;
        case 2: return 2;
        case 4: return 3;
    }
    throw LabelError("label value " + std::to_string(label) + " outside {0,1,2,4}");
}

inline std::uint8_t class_to_label(int cls) {
    static constexpr std::uint8_t map[4] = {0, 1, 2, 4};
    if (cls < 0 || cls > 3) throw LabelError("class index out of range");
    return map[cls];
}

struct LossResult {
    double total = 0.0;
    double cross_entropy = 0.0;
    double dice_loss = 0.0;  // 1 - mean soft Dice over foreground classes
    Tensor grad;             // dL/dlogits
};

// Cross-entropy plus soft Dice over the foreground classes. Targets arrive as
// BraTS labels and are remapped internally.
inline LossResult seg_loss(const Tensor& logits, const ByteGrid& target) {
    if (!(logits.dims() == target.dims()))
        throw ShapeError("logits spatial dims " + logits.dims().str() +
                         " do not match target " + target.dims().str());
    const int k = logits.c;
    const std::size_t n = logits.spatial();
    static constexpr double kSmooth = 1e-5;

    std::vector<int> cls(n);
    for (std::size_t x = 0; x < n; ++x) {
        const int c = label_to_class(target.data()[x]);
        if (c >= k)
            throw ShapeError("target class " + std::to_string(c) + " >= num_classes " +
                             std::to_string(k));
        cls[x] = c;
    }

    // softmax probabilities, stored densely (k x n)
    std::vector<double> prob(static_cast<std::size_t>(k) * n);
    double ce = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        double mx = logits.v[x];
        for (int c = 1; c < k; ++c) mx = std::max(mx, logits.v[c * n + x]);
        double z = 0;
        for (int c = 0; c < k; ++c) {
            const double e = std::exp(logits.v[c * n + x] - mx);
            prob[c * n + x] = e;
            z += e;
        }
        for (int c = 0; c < k; ++c) prob[c * n + x] /= z;
        ce -= std::log(std::max(prob[cls[x] * n + x], 1e-300));
    }
    ce /= static_cast<double>(n);

    // soft Dice per foreground class
    const int fg = k - 1;
    std::vector<double> inter(k, 0.0), psum(k, 0.0), tsum(k, 0.0);
    for (std::size_t x = 0; x < n; ++x)
        for (int c = 1; c < k; ++c) {
            const double p = prob[c * n + x];
            psum[c] += p;
            if (cls[x] == c) {
                inter[c] += p;
                tsum[c] += 1.0;
            }
        }
    double mean_dice = 0.0;
    std::vector<double> num(k), den(k);
    for (int c = 1; c < k; ++c) {
        num[c] = 2.0 * inter[c] + kSmooth;
        den[c] = psum[c] + tsum[c] + kSmooth;
        mean_dice += num[c] / den[c];
    }
    mean_dice /= fg;

    LossResult out;
    out.cross_entropy = ce;
    out.dice_loss = 1.0 - mean_dice;
    out.total = out.cross_entropy + out.dice_loss;

    // dL/dprob for the dice term: d(-D_c/fg)/dp_c(x) = -(2*t - num/den)/ (den*fg)
    // then both terms chained through softmax.
    out.grad = Tensor(k, logits.d, logits.h, logits.w);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> dprob(k);
    for (std::size_t x = 0; x < n; ++x) {
        for (int c = 0; c < k; ++c) {
            double gp = 0.0;
            if (c >= 1) {
                const double t = (cls[x] == c) ? 1.0 : 0.0;
                gp = -(2.0 * t * den[c] - num[c]) / (den[c] * den[c] * fg);
            }
            // cross-entropy via dL/dprob = -1[t]/p would be unstable; fold it
            // into the softmax jacobian directly below.
            dprob[c] = gp;
        }
        double dot = 0.0;
        for (int c = 0; c < k; ++c) dot += dprob[c] * prob[c * n + x];
        for (int c = 0; c < k; ++c) {
            const double p = prob[c * n + x];
            double g = p * (dprob[c] - dot);                       // dice term
            g += (p - (cls[x] == c ? 1.0 : 0.0)) * inv_n;          // cross-entropy term
            out.grad.v[c * n + x] = g;
        }
    }
    return out;
}

}  // namespace gliopipe::nn
