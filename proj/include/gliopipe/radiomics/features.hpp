#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/radiomics/histogram.hpp"
#include "gliopipe/radiomics/shape.hpp"
#include "gliopipe/survival/record.hpp"
#include "gliopipe/text.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe::radiomics {

struct FeatureOptions {
    Modality histogram_modality = Modality::T1Gd;
    bool include_axis_directions = false;  // 9 extra values per region
    bool include_resection = false;        // adds the resection_gtr indicator
};

// Ordered name -> value map with a schema fixed by FeatureOptions; identical
// across cases so tables stay rectangular.
struct FeatureVector {
    std::string case_id;
    std::vector<std::string> names;
    std::vector<double> values;

    double value(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return values[i];
        throw DataError("no feature named '" + name + "'");
    }
};

// Regions the survival features are computed over: necrosis, tumor core,
// whole tumor.
inline constexpr std::array<RegionId, 3> kFeatureRegions = {RegionId::NCR, RegionId::TC,
                                                            RegionId::WT};

inline std::vector<std::string> feature_schema(const FeatureOptions& opt) {
    std::vector<std::string> names;
    for (RegionId region : kFeatureRegions) {
        const std::string p = region_name(region);
        names.push_back(p + "_present");
        names.push_back(p + "_centroid_d");
        names.push_back(p + "_centroid_h");
        names.push_back(p + "_centroid_w");
        names.push_back(p + "_axis1_length");
        names.push_back(p + "_axis2_length");
        names.push_back(p + "_axis3_length");
        names.push_back(p + "_eigenvalue1");
        names.push_back(p + "_eigenvalue2");
        names.push_back(p + "_eigenvalue3");
        names.push_back(p + "_ecc_meridional");
        names.push_back(p + "_ecc_equatorial");
        names.push_back(p + "_fractal_dim");
        names.push_back(p + "_hist_entropy");
        names.push_back(p + "_hist_skewness");
        names.push_back(p + "_hist_kurtosis");
        names.push_back(p + "_volume_mm3");
        if (opt.include_axis_directions)
            for (int axis = 1; axis <= 3; ++axis)
                for (const char* comp : {"d", "h", "w"})
                    names.push_back(p + "_axis" + std::to_string(axis) + "_dir_" + comp);
    }
    names.push_back("age");
    if (opt.include_resection) names.push_back("resection_gtr");
    return names;
}

inline FeatureVector extract_case_features(const MultiModalVolume& volume,
                                           const LabelVolume& label,
                                           const survival::SurvivalRecord& clinical,
                                           const FeatureOptions& opt = {}) {
    if (!(volume.dims() == label.dims()))
        throw ShapeError("image and label shapes disagree for case " + volume.case_id);
    label.validate();

    FeatureVector out;
    out.case_id = volume.case_id;
    out.names = feature_schema(opt);
    out.values.reserve(out.names.size());

    const FloatGrid& intensity = volume.channel(opt.histogram_modality);
    bool any_region = false;
    for (RegionId region : kFeatureRegions) {
        const MaskGrid mask = region_mask(label, region);
        const std::int64_t count = mask_count(mask);
        const std::size_t per_region = 17 + (opt.include_axis_directions ? 9 : 0);
        if (count == 0) {
            for (std::size_t i = 0; i < per_region; ++i) out.values.push_back(0.0);
            continue;
        }
        any_region = true;

        const PrincipalAxes axes = principal_axes(mask, volume.spacing);
        // a == 0 (single voxel or collinear degenerate) has no defined shape;
        // report zero eccentricity.
        const Eccentricities ecc =
            axes.axis_lengths[0] > 0
                ? eccentricities(axes.axis_lengths[0], axes.axis_lengths[1],
                                 axes.axis_lengths[2])
                : Eccentricities{};
        const double fd = fractal_dimension(mask);

        std::vector<double> samples;
        samples.reserve(static_cast<std::size_t>(count));
        for (std::size_t i = 0; i < mask.data().size(); ++i)
            if (mask.data()[i]) samples.push_back(intensity.data()[i]);
        const HistogramStats hist = histogram_stats(samples);

        out.values.push_back(1.0);
        for (double c : axes.centroid) out.values.push_back(c);
        for (double l : axes.axis_lengths) out.values.push_back(l);
        for (double e : axes.eigenvalues) out.values.push_back(e);
        out.values.push_back(ecc.meridional);
        out.values.push_back(ecc.equatorial);
        out.values.push_back(fd);
        out.values.push_back(hist.entropy);
        out.values.push_back(hist.skewness);
        out.values.push_back(hist.kurtosis);
        out.values.push_back(static_cast<double>(count) * volume.spacing.voxel_volume());
        if (opt.include_axis_directions)
            for (const auto& dir : axes.directions)
                for (double comp : dir) out.values.push_back(comp);
    }
    if (!any_region)
        throw EmptyRegionError("case " + volume.case_id + " has no NCR/TC/WT voxels");

    out.values.push_back(clinical.age);
    if (opt.include_resection)
        out.values.push_back(clinical.resection_status &&
                                     *clinical.resection_status == survival::Resection::GTR
                                 ? 1.0
                                 : 0.0);
    return out;
}

// Min-max scaler fitted on a training cohort; application clamps to [0,1].
// A degenerate feature (max == min) maps to 0.5.
struct FeatureScaler {
    std::vector<std::string> names;
    std::vector<double> min, max;

    static FeatureScaler fit(const std::vector<FeatureVector>& table) {
        if (table.empty()) throw DataError("cannot fit a scaler on an empty table");
        FeatureScaler s;
        s.names = table[0].names;
        s.min = table[0].values;
        s.max = table[0].values;
        for (const auto& row : table) {
            if (row.names != s.names)
                throw DataError("feature schema mismatch across cases");
            for (std::size_t i = 0; i < row.values.size(); ++i) {
                s.min[i] = std::min(s.min[i], row.values[i]);
                s.max[i] = std::max(s.max[i], row.values[i]);
            }
        }
        return s;
    }

    FeatureVector apply(const FeatureVector& row) const {
        if (row.names != names) throw DataError("feature schema mismatch in apply_scaler");
        FeatureVector out = row;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            if (max[i] == min[i]) {
                out.values[i] = 0.5;
            } else {
                const double v = (row.values[i] - min[i]) / (max[i] - min[i]);
                out.values[i] = std::clamp(v, 0.0, 1.0);
            }
        }
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        for (std::size_t i = 0; i < names.size(); ++i)
            j[names[i]] = {{"min", min[i]}, {"max", max[i]}};
        return j;
    }

    static FeatureScaler from_json(const nlohmann::json& j,
                                   const std::vector<std::string>& schema) {
        FeatureScaler s;
        s.names = schema;
        for (const auto& name : schema) {
            if (!j.contains(name)) throw DataError("scaler JSON missing feature " + name);
            s.min.push_back(j.at(name).at("min").get<double>());
            s.max.push_back(j.at(name).at("max").get<double>());
        }
        return s;
    }
};

inline FeatureScaler fit_scaler(const std::vector<FeatureVector>& table) {
    return FeatureScaler::fit(table);
}

inline FeatureVector apply_scaler(const FeatureVector& row, const FeatureScaler& scaler) {
    return scaler.apply(row);
}

}  // namespace gliopipe::radiomics
