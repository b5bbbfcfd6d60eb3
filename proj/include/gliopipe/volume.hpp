#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gliopipe/errors.hpp"

namespace gliopipe {

struct Dims3 {
    int d = 0, h = 0, w = 0;

    bool operator==(const Dims3&) const = default;
    std::int64_t voxels() const {
        return static_cast<std::int64_t>(d) * h * w;
    }
    std::string str() const {
        return std::to_string(d) + "x" + std::to_string(h) + "x" + std::to_string(w);
    }
};

struct Spacing {
    double d = 1.0, h = 1.0, w = 1.0;  // mm per voxel along each axis

    bool valid() const { return d > 0.0 && h > 0.0 && w > 0.0; }
    double voxel_volume() const { return d * h * w; }
    double diagonal(const Dims3& dims) const {
        const double x = dims.d * d, y = dims.h * h, z = dims.w * w;
        return std::sqrt(x * x + y * y + z * z);
    }
};

// Dense 3D grid, C-order with the last axis fastest: index (d,h,w).
template <typename T>
class Grid3 {
public:
    Grid3() = default;
    Grid3(Dims3 dims, T fill = T{})
        : dims_(dims), data_(static_cast<std::size_t>(dims.voxels()), fill) {}

    const Dims3& dims() const { return dims_; }
    std::int64_t voxels() const { return dims_.voxels(); }

    T& at(int d, int h, int w) { return data_[idx(d, h, w)]; }
    const T& at(int d, int h, int w) const { return data_[idx(d, h, w)]; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    std::size_t idx(int d, int h, int w) const {
        return (static_cast<std::size_t>(d) * dims_.h + h) * dims_.w + w;
    }

private:
    Dims3 dims_;
    std::vector<T> data_;
};

using FloatGrid = Grid3<float>;
using ByteGrid = Grid3<std::uint8_t>;
using MaskGrid = Grid3<std::uint8_t>;  // 0/1 membership

enum class Modality { T1 = 0, T1Gd = 1, T2 = 2, Flair = 3 };

inline constexpr int kNumModalities = 4;
inline constexpr std::array<const char*, 4> kModalityNames = {"t1", "t1gd", "t2", "flair"};

inline Modality modality_from_name(const std::string& name) {
    for (int i = 0; i < kNumModalities; ++i)
        if (name == kModalityNames[i]) return static_cast<Modality>(i);
    throw ConfigError("unknown modality '" + name + "'");
}

// BraTS label alphabet: 0 background, 1 NCR/NET, 2 ED, 4 ET.
inline constexpr std::array<std::uint8_t, 4> kLabelAlphabet = {0, 1, 2, 4};

inline bool valid_label(std::uint8_t v) {
    return v == 0 || v == 1 || v == 2 || v == 4;
}

// 4-modality intensity volume (fixed order T1, T1Gd, T2, FLAIR).
struct MultiModalVolume {
    std::array<FloatGrid, 4> channels;
    Spacing spacing;
    std::string case_id;

    const Dims3& dims() const { return channels[0].dims(); }
    FloatGrid& channel(Modality m) { return channels[static_cast<int>(m)]; }
    const FloatGrid& channel(Modality m) const { return channels[static_cast<int>(m)]; }

    void validate() const {
        for (int c = 1; c < kNumModalities; ++c)
            if (!(channels[c].dims() == channels[0].dims()))
                throw IngestError("modality grids disagree on shape for case " + case_id);
        if (!spacing.valid())
            throw IngestError("non-positive voxel spacing for case " + case_id);
        for (const auto& g : channels)
            for (float v : g.data())
                if (!std::isfinite(v))
                    throw IngestError("non-finite intensity in case " + case_id);
    }
};

struct LabelVolume {
    ByteGrid labels;
    std::string case_id;

    const Dims3& dims() const { return labels.dims(); }

    void validate() const {
        for (std::uint8_t v : labels.data())
            if (!valid_label(v))
                throw LabelError("label value " + std::to_string(v) +
                                 " outside {0,1,2,4} in case " + case_id);
    }
};

// Evaluation regions. NCR/ED/ET are the raw annotation labels; TC and WT are
// the BraTS composite regions.
enum class RegionId { NCR, ED, ET, TC, WT };

inline constexpr std::array<RegionId, 5> kAllRegions = {
    RegionId::NCR, RegionId::ED, RegionId::ET, RegionId::TC, RegionId::WT};

inline const char* region_name(RegionId r) {
    switch (r) {
        case RegionId::NCR: return "ncr";
        case RegionId::ED: return "ed";
        case RegionId::ET: return "et";
        case RegionId::TC: return "tc";
        case RegionId::WT: return "wt";
    }
    return "?";
}

inline bool region_contains_label(RegionId r, std::uint8_t label) {
    switch (r) {
        case RegionId::NCR: return label == 1;
        case RegionId::ED: return label == 2;
        case RegionId::ET: return label == 4;
        case RegionId::TC: return label == 1 || label == 4;
        case RegionId::WT: return label == 1 || label == 2 || label == 4;
    }
    return false;
}

inline MaskGrid region_mask(const LabelVolume& volume, RegionId region) {
    MaskGrid mask(volume.dims());
    const auto& src = volume.labels.data();
    auto& dst = mask.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = region_contains_label(region, src[i]) ? 1 : 0;
    return mask;
}

inline std::int64_t mask_count(const MaskGrid& mask) {
    std::int64_t n = 0;
    for (auto v : mask.data()) n += (v != 0);
    return n;
}

}  // namespace gliopipe
