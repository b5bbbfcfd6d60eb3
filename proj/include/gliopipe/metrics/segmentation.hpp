#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "gliopipe/volume.hpp"

namespace gliopipe::metrics {

// Rules for masks without any voxels. The BraTS portal's exact conventions are
// unpublished, so these are explicit and adjustable.
struct EmptyMaskPolicy {
    double dice_both_empty = 1.0;
    double dice_one_empty = 0.0;
    double hd_both_empty = 0.0;
    // one mask empty: finite penalty, the volume diagonal in mm
    double sensitivity_empty_gt = 1.0;   // nothing to find
    double specificity_empty_bg = 1.0;   // nothing to reject
};

inline void require_same_shape(const MaskGrid& a, const MaskGrid& b) {
    if (!(a.dims() == b.dims()))
        throw ShapeError("mask shapes disagree: " + a.dims().str() + " vs " + b.dims().str());
}

inline double dice(const MaskGrid& pred, const MaskGrid& gt,
                   const EmptyMaskPolicy& policy = {}) {
    require_same_shape(pred, gt);
    std::int64_t inter = 0, np = 0, ng = 0;
    const auto& p = pred.data();
    const auto& g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool bp = p[i] != 0, bg = g[i] != 0;
        inter += (bp && bg);
        np += bp;
        ng += bg;
    }
    if (np + ng == 0) return policy.dice_both_empty;
    if (np == 0 || ng == 0) return policy.dice_one_empty;
    return 2.0 * inter / static_cast<double>(np + ng);
}

inline double sensitivity(const MaskGrid& pred, const MaskGrid& gt,
                          const EmptyMaskPolicy& policy = {}) {
    require_same_shape(pred, gt);
    std::int64_t tp = 0, fn = 0;
    const auto& p = pred.data();
    const auto& g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i] == 0) continue;
        (p[i] != 0 ? tp : fn)++;
    }
    if (tp + fn == 0) return policy.sensitivity_empty_gt;
    return tp / static_cast<double>(tp + fn);
}

inline double specificity(const MaskGrid& pred, const MaskGrid& gt,
                          const EmptyMaskPolicy& policy = {}) {
    require_same_shape(pred, gt);
    std::int64_t tn = 0, fp = 0;
    const auto& p = pred.data();
    const auto& g = gt.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (g[i] != 0) continue;
        (p[i] == 0 ? tn : fp)++;
    }
    if (tn + fp == 0) return policy.specificity_empty_bg;
    return tn / static_cast<double>(tn + fp);
}

namespace detail {

// Boundary voxels by 6-connectivity: a mask voxel with any face neighbor
// outside the mask (grid borders count as outside).
inline MaskGrid boundary_6(const MaskGrid& mask) {
    const Dims3 dims = mask.dims();
    MaskGrid out(dims);
    for (int d = 0; d < dims.d; ++d)
        for (int h = 0; h < dims.h; ++h)
            for (int w = 0; w < dims.w; ++w) {
                if (!mask.at(d, h, w)) continue;
                const bool interior =
                    d > 0 && d + 1 < dims.d && h > 0 && h + 1 < dims.h && w > 0 &&
                    w + 1 < dims.w && mask.at(d - 1, h, w) && mask.at(d + 1, h, w) &&
                    mask.at(d, h - 1, w) && mask.at(d, h + 1, w) &&
                    mask.at(d, h, w - 1) && mask.at(d, h, w + 1);
                out.at(d, h, w) = interior ? 0 : 1;
            }
    return out;
}

// Felzenszwalb-Huttenlocher 1D squared distance transform over a sampled
// line with grid step `s` (mm). f holds squared distances on input; entries
// of +inf mark positions with no site. Lines without any finite entry pass
// through unchanged.
inline void dt1d(std::vector<double>& f, double s) {
    const int n = static_cast<int>(f.size());
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    const double s2 = s * s;

    int first = 0;
    while (first < n && f[first] == kInf) ++first;
    if (first == n) return;

    std::vector<int> v(n);
    std::vector<double> z(n + 1), d(n);
    int k = 0;
    v[0] = first;
    z[0] = -kInf;
    z[1] = kInf;
    auto intersect = [&](int q, int p) {
        return ((f[q] - f[p]) / s2 + static_cast<double>(q) * q -
                static_cast<double>(p) * p) /
               (2.0 * (q - p));
    };
    for (int q = first + 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double sep = intersect(q, v[k]);
        while (k > 0 && sep <= z[k]) {
            --k;
            sep = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = sep;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = (q - v[k]) * s;
        d[q] = dq * dq + f[v[k]];
    }
    f = std::move(d);
}

// Exact Euclidean squared-distance field (mm^2) to the set of on-voxels.
inline std::vector<double> squared_distance_field(const MaskGrid& sites,
                                                  const Spacing& spacing) {
    const Dims3 dims = sites.dims();
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> field(static_cast<std::size_t>(dims.voxels()), kInf);
    for (std::size_t i = 0; i < field.size(); ++i)
        if (sites.data()[i]) field[i] = 0.0;

    std::vector<double> line;
    // along w
    line.resize(dims.w);
    for (int d = 0; d < dims.d; ++d)
        for (int h = 0; h < dims.h; ++h) {
            const std::size_t base = (static_cast<std::size_t>(d) * dims.h + h) * dims.w;
            for (int w = 0; w < dims.w; ++w) line[w] = field[base + w];
            dt1d(line, spacing.w);
            for (int w = 0; w < dims.w; ++w) field[base + w] = line[w];
        }
    // along h
    line.resize(dims.h);
    for (int d = 0; d < dims.d; ++d)
        for (int w = 0; w < dims.w; ++w) {
            for (int h = 0; h < dims.h; ++h)
                line[h] = field[(static_cast<std::size_t>(d) * dims.h + h) * dims.w + w];
            dt1d(line, spacing.h);
            for (int h = 0; h < dims.h; ++h)
                field[(static_cast<std::size_t>(d) * dims.h + h) * dims.w + w] = line[h];
        }
    // along d
    line.resize(dims.d);
    for (int h = 0; h < dims.h; ++h)
        for (int w = 0; w < dims.w; ++w) {
            for (int d = 0; d < dims.d; ++d)
                line[d] = field[(static_cast<std::size_t>(d) * dims.h + h) * dims.w + w];
            dt1d(line, spacing.d);
            for (int d = 0; d < dims.d; ++d)
                field[(static_cast<std::size_t>(d) * dims.h + h) * dims.w + w] = line[d];
        }
    return field;
}

}  // namespace detail

// Linear interpolation between order statistics, q in [0,100].
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw DataError("percentile of empty set");
    std::sort(values.begin(), values.end());
    const double pos = (values.size() - 1) * q / 100.0;
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

// Pooled symmetric surface-distance set between the 6-connectivity boundaries
// of two masks, in mm.
inline std::vector<double> surface_distances(const MaskGrid& pred, const MaskGrid& gt,
                                             const Spacing& spacing) {
    const MaskGrid bp = detail::boundary_6(pred);
    const MaskGrid bg = detail::boundary_6(gt);
    const std::vector<double> to_gt = detail::squared_distance_field(bg, spacing);
    const std::vector<double> to_pred = detail::squared_distance_field(bp, spacing);
    std::vector<double> pooled;
    for (std::size_t i = 0; i < bp.data().size(); ++i)
        if (bp.data()[i]) pooled.push_back(std::sqrt(to_gt[i]));
    for (std::size_t i = 0; i < bg.data().size(); ++i)
        if (bg.data()[i]) pooled.push_back(std::sqrt(to_pred[i]));
    return pooled;
}

enum class HausdorffKind { HD95, Max };

inline double hausdorff(const MaskGrid& pred, const MaskGrid& gt, const Spacing& spacing,
                        HausdorffKind kind = HausdorffKind::HD95,
                        const EmptyMaskPolicy& policy = {}) {
    require_same_shape(pred, gt);
    const std::int64_t np = mask_count(pred), ng = mask_count(gt);
    if (np == 0 && ng == 0) return policy.hd_both_empty;
    if (np == 0 || ng == 0) return spacing.diagonal(pred.dims());
    std::vector<double> pooled = surface_distances(pred, gt, spacing);
    if (kind == HausdorffKind::Max) return *std::max_element(pooled.begin(), pooled.end());
    return percentile(std::move(pooled), 95.0);
}

inline double hausdorff95(const MaskGrid& pred, const MaskGrid& gt, const Spacing& spacing,
                          const EmptyMaskPolicy& policy = {}) {
    return hausdorff(pred, gt, spacing, HausdorffKind::HD95, policy);
}

// Evaluation region order used everywhere in reports.
inline constexpr std::array<RegionId, 3> kEvalRegions = {RegionId::ET, RegionId::WT,
                                                         RegionId::TC};

struct RegionMetrics {
    double dice = 0.0;
    double hd95 = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

struct SegCaseMetrics {
    std::string case_id;
    std::array<RegionMetrics, 3> per_region;  // ET, WT, TC

    const RegionMetrics& region(RegionId r) const {
        for (std::size_t i = 0; i < kEvalRegions.size(); ++i)
            if (kEvalRegions[i] == r) return per_region[i];
        throw ConfigError("not an evaluation region");
    }
};

inline SegCaseMetrics evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                                    const Spacing& spacing,
                                    HausdorffKind kind = HausdorffKind::HD95,
                                    const EmptyMaskPolicy& policy = {}) {
    if (!(pred.dims() == gt.dims()))
        throw ShapeError("prediction shape " + pred.dims().str() +
                         " does not match ground truth " + gt.dims().str());
    SegCaseMetrics out;
    out.case_id = gt.case_id;
    for (std::size_t i = 0; i < kEvalRegions.size(); ++i) {
        const MaskGrid mp = region_mask(pred, kEvalRegions[i]);
        const MaskGrid mg = region_mask(gt, kEvalRegions[i]);
        out.per_region[i].dice = dice(mp, mg, policy);
        out.per_region[i].hd95 = hausdorff(mp, mg, spacing, kind, policy);
        out.per_region[i].sensitivity = sensitivity(mp, mg, policy);
        out.per_region[i].specificity = specificity(mp, mg, policy);
    }
    return out;
}

}  // namespace gliopipe::metrics
