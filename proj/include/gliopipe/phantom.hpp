#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "gliopipe/rng.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe {

// Synthetic test case: three nested ellipsoids sharing a center.
// Outermost shell is edema (2), then enhancing tumor (4), necrotic core (1).
struct PhantomSpec {
    std::string case_id = "phantom";
    std::uint64_t seed = 0;
    Dims3 dims{32, 32, 32};
    std::array<double, 3> center{16, 16, 16};        // voxel coordinates
    std::array<double, 3> ncr_semi{2, 2, 2};         // innermost
    std::array<double, 3> tc_semi{4, 4, 4};          // ET outer boundary
    std::array<double, 3> wt_semi{7, 7, 7};          // ED outer boundary
    double noise_sigma = 0.0;
    Spacing spacing{1.0, 1.0, 1.0};

    void validate() const {
        if (dims.d < 8 || dims.h < 8 || dims.w < 8)
            throw SpecError("phantom dims must be >= 8 per axis, got " + dims.str());
        for (int i = 0; i < 3; ++i) {
            if (ncr_semi[i] <= 0 || tc_semi[i] <= 0 || wt_semi[i] <= 0)
                throw SpecError("phantom semi-axes must be positive");
            if (!(ncr_semi[i] < tc_semi[i] && tc_semi[i] < wt_semi[i]))
                throw SpecError("phantom ellipsoids must nest: ncr < tc < wt on every axis");
        }
        if (noise_sigma < 0) throw SpecError("noise_sigma must be >= 0");
        if (!spacing.valid()) throw SpecError("spacing must be positive");
    }
};

namespace detail {

inline bool inside_ellipsoid(int d, int h, int w, const std::array<double, 3>& c,
                             const std::array<double, 3>& semi) {
    const double x = (d - c[0]) / semi[0];
    const double y = (h - c[1]) / semi[1];
    const double z = (w - c[2]) / semi[2];
    return x * x + y * y + z * z <= 1.0;
}

// Base intensity per (modality, tissue label). Background stays exactly 0 to
// mimic a skull-stripped scan; values are chosen so every modality separates
// the three tissues and T1Gd highlights enhancement.
inline double tissue_base(Modality m, std::uint8_t label) {
    static constexpr double table[4][5] = {
        // index by label value directly (positions 0,1,2,_,4)
        /* t1    */ {0.0, 0.30, 0.55, 0.0, 0.75},
        /* t1gd  */ {0.0, 0.20, 0.50, 0.0, 0.95},
        /* t2    */ {0.0, 0.85, 0.65, 0.0, 0.40},
        /* flair */ {0.0, 0.55, 0.90, 0.0, 0.45},
    };
    return table[static_cast<int>(m)][label];
}

}  // namespace detail

// Deterministic given the spec; labels by voxel-center membership test.
inline std::pair<MultiModalVolume, LabelVolume> generate_phantom(const PhantomSpec& spec) {
    spec.validate();

    LabelVolume label;
    label.case_id = spec.case_id;
    label.labels = ByteGrid(spec.dims);
    for (int d = 0; d < spec.dims.d; ++d)
        for (int h = 0; h < spec.dims.h; ++h)
            for (int w = 0; w < spec.dims.w; ++w) {
                std::uint8_t v = 0;
                if (detail::inside_ellipsoid(d, h, w, spec.center, spec.ncr_semi))
                    v = 1;
                else if (detail::inside_ellipsoid(d, h, w, spec.center, spec.tc_semi))
                    v = 4;
                else if (detail::inside_ellipsoid(d, h, w, spec.center, spec.wt_semi))
                    v = 2;
                label.labels.at(d, h, w) = v;
            }

    MultiModalVolume volume;
    volume.case_id = spec.case_id;
    volume.spacing = spec.spacing;
    Rng rng(derive_seed(spec.seed, 0xF0A11));
    for (int c = 0; c < kNumModalities; ++c) {
        FloatGrid grid(spec.dims);
        const auto m = static_cast<Modality>(c);
        for (int d = 0; d < spec.dims.d; ++d)
            for (int h = 0; h < spec.dims.h; ++h)
                for (int w = 0; w < spec.dims.w; ++w) {
                    const std::uint8_t lv = label.labels.at(d, h, w);
                    if (lv == 0) continue;  // background stays exact zero
                    double v = detail::tissue_base(m, lv);
                    if (spec.noise_sigma > 0) v += rng.normal(0.0, spec.noise_sigma);
                    grid.at(d, h, w) = static_cast<float>(v);
                }
        volume.channels[c] = std::move(grid);
    }
    return {std::move(volume), std::move(label)};
}

}  // namespace gliopipe
