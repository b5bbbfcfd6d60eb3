#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "gliopipe/rng.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe {

struct CropOffset {
    int d = 0, h = 0, w = 0;
};

inline CropOffset draw_crop_offset(const Dims3& volume, const Dims3& crop,
                                   std::uint64_t seed) {
    auto check_axis = [&](int have, int want, const char* axis) {
        if (want > have)
            throw CropError(std::string("crop exceeds volume along axis ") + axis +
                            ": " + std::to_string(want) + " > " + std::to_string(have));
        if (want <= 0) throw CropError("crop dims must be positive");
    };
    check_axis(volume.d, crop.d, "D");
    check_axis(volume.h, crop.h, "H");
    check_axis(volume.w, crop.w, "W");
    Rng rng(derive_seed(seed, 0xC409));
    CropOffset off;
    off.d = static_cast<int>(rng.uniform_index(volume.d - crop.d + 1));
    off.h = static_cast<int>(rng.uniform_index(volume.h - crop.h + 1));
    off.w = static_cast<int>(rng.uniform_index(volume.w - crop.w + 1));
    return off;
}

template <typename T>
Grid3<T> crop_grid(const Grid3<T>& src, const Dims3& crop, const CropOffset& off) {
    Grid3<T> out(crop);
    for (int d = 0; d < crop.d; ++d)
        for (int h = 0; h < crop.h; ++h)
            for (int w = 0; w < crop.w; ++w)
                out.at(d, h, w) = src.at(off.d + d, off.h + h, off.w + w);
    return out;
}

// Joint image/label crop with an offset drawn uniformly over valid positions.
inline std::pair<MultiModalVolume, LabelVolume> random_crop(
    const MultiModalVolume& volume, const LabelVolume& label, const Dims3& crop,
    std::uint64_t seed) {
    if (!(volume.dims() == label.dims()))
        throw CropError("image and label shapes disagree: " + volume.dims().str() +
                        " vs " + label.dims().str());
    const CropOffset off = draw_crop_offset(volume.dims(), crop, seed);
    MultiModalVolume out_vol;
    out_vol.case_id = volume.case_id;
    out_vol.spacing = volume.spacing;
    for (int c = 0; c < kNumModalities; ++c)
        out_vol.channels[c] = crop_grid(volume.channels[c], crop, off);
    LabelVolume out_lab;
    out_lab.case_id = label.case_id;
    out_lab.labels = crop_grid(label.labels, crop, off);
    return {std::move(out_vol), std::move(out_lab)};
}

// Per modality, standardize over the nonzero (brain) voxels; exact zeros are
// skull-stripped background and stay zero. A zero-variance modality is only
// mean-shifted.
inline MultiModalVolume mean_normalize(const MultiModalVolume& volume) {
    MultiModalVolume out = volume;
    for (int c = 0; c < kNumModalities; ++c) {
        auto& data = out.channels[c].data();
        double sum = 0.0, sum2 = 0.0;
        std::int64_t n = 0;
        for (float v : data) {
            if (v == 0.0f) continue;
            sum += v;
            sum2 += static_cast<double>(v) * v;
            ++n;
        }
        if (n == 0) continue;
        const double mean = sum / n;
        double var = sum2 / n - mean * mean;
        if (var < 0) var = 0;
        double sd = std::sqrt(var);
        if (sd == 0.0) sd = 1.0;
        for (float& v : data) {
            if (v == 0.0f) continue;
            v = static_cast<float>((v - mean) / sd);
        }
    }
    return out;
}

}  // namespace gliopipe
