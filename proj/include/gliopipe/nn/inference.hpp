#pragma once

#include <algorithm>
#include <vector>

#include "gliopipe/nn/loss.hpp"
#include "gliopipe/nn/trainer.hpp"
#include "gliopipe/nn/unet.hpp"
#include "gliopipe/preprocess.hpp"

namespace gliopipe::nn {

namespace detail {

// Window start positions covering [0, dim) with stride = window/2 and the
// final window clamped to the end.
inline std::vector<int> window_starts(int dim, int window) {
    std::vector<int> starts;
    const int stride = std::max(1, window / 2);
    for (int s = 0; s + window < dim; s += stride) starts.push_back(s);
    starts.push_back(dim - window);
    return starts;
}

}  // namespace detail

// Argmax segmentation over the full volume. Volumes larger than the window
// are tiled with half-stride overlapping windows and logit averaging.
inline LabelVolume predict(UNet3d& model, const MultiModalVolume& volume,
                           Dims3 window = {0, 0, 0}, bool normalize = true) {
    const Dims3 dims = volume.dims();
    const int factor = model.config().downsample_factor();
    auto fit_axis = [&](int want, int have) {
        int v = want > 0 ? std::min(want, have) : have;
        v -= v % factor;
        return v;
    };
    window = {fit_axis(window.d, dims.d), fit_axis(window.h, dims.h),
              fit_axis(window.w, dims.w)};
    if (window.d < factor || window.h < factor || window.w < factor)
        throw ShapeError("volume " + dims.str() + " is below the minimum footprint " +
                         std::to_string(factor) + " per axis");

    const MultiModalVolume prepared = normalize ? mean_normalize(volume) : volume;
    const int k = model.config().num_classes;
    const std::size_t n = static_cast<std::size_t>(dims.voxels());
    std::vector<double> logit_sum(static_cast<std::size_t>(k) * n, 0.0);
    std::vector<float> hits(n, 0.0f);

    for (int sd : detail::window_starts(dims.d, window.d))
        for (int sh : detail::window_starts(dims.h, window.h))
            for (int sw : detail::window_starts(dims.w, window.w)) {
                MultiModalVolume piece;
                piece.case_id = volume.case_id;
                piece.spacing = volume.spacing;
                for (int c = 0; c < kNumModalities; ++c)
                    piece.channels[c] =
                        crop_grid(prepared.channels[c], window, {sd, sh, sw});
                const Tensor logits = model.forward(volume_to_tensor(piece));
                const std::size_t wn = logits.spatial();
                for (int d = 0; d < window.d; ++d)
                    for (int h = 0; h < window.h; ++h)
                        for (int w = 0; w < window.w; ++w) {
                            const std::size_t src =
                                (static_cast<std::size_t>(d) * window.h + h) * window.w + w;
                            const std::size_t dst =
                                (static_cast<std::size_t>(sd + d) * dims.h + (sh + h)) *
                                    dims.w +
                                (sw + w);
                            for (int c = 0; c < k; ++c)
                                logit_sum[c * n + dst] += logits.v[c * wn + src];
                            hits[dst] += 1.0f;
                        }
            }

    LabelVolume out;
    out.case_id = volume.case_id;
    out.labels = ByteGrid(dims);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_v = logit_sum[i] / hits[i];
        for (int c = 1; c < k; ++c) {
            const double v = logit_sum[c * n + i] / hits[i];
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        out.labels.data()[i] = class_to_label(best);
    }
    return out;
}

}  // namespace gliopipe::nn
