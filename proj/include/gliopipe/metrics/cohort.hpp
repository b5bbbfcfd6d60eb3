#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gliopipe/metrics/segmentation.hpp"
#include "gliopipe/text.hpp"

namespace gliopipe::metrics {

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population standard deviation (fixed-cohort report).
inline double pop_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline constexpr std::array<const char*, 4> kMetricNames = {"dice", "hausdorff",
                                                            "sensitivity", "specificity"};

// Rows Mean / StdDev / Median over the cohort; columns metric-major with
// region order ET, WT, TC inside each metric.
struct CohortSummary {
    // stat x metric x region: [mean|std|median][4][3]
    double values[3][4][3] = {};

    static constexpr std::array<const char*, 3> kStatNames = {"Mean", "StdDev", "Median"};
};

inline double metric_value(const RegionMetrics& m, int metric) {
    switch (metric) {
        case 0: return m.dice;
        case 1: return m.hd95;
        case 2: return m.sensitivity;
        case 3: return m.specificity;
    }
    return 0;
}

inline CohortSummary summarize_cohort(const std::vector<SegCaseMetrics>& cases) {
    if (cases.empty()) throw DataError("cannot summarize an empty cohort");
    CohortSummary out;
    for (int metric = 0; metric < 4; ++metric)
        for (int region = 0; region < 3; ++region) {
            std::vector<double> column;
            column.reserve(cases.size());
            for (const auto& c : cases)
                column.push_back(metric_value(c.per_region[region], metric));
            out.values[0][metric][region] = mean_of(column);
            out.values[1][metric][region] = pop_std(column);
            out.values[2][metric][region] = median_of(column);
        }
    return out;
}

inline std::vector<std::string> metric_column_headers() {
    std::vector<std::string> cols;
    for (const char* metric : kMetricNames)
        for (RegionId region : kEvalRegions)
            cols.push_back(std::string(metric) + "_" + region_name(region));
    return cols;
}

inline std::string render_case_csv(const std::vector<SegCaseMetrics>& cases) {
    std::string out = "case_id," + join_csv(metric_column_headers()) + "\n";
    for (const auto& c : cases) {
        std::vector<std::string> cells{c.case_id};
        for (int metric = 0; metric < 4; ++metric)
            for (int region = 0; region < 3; ++region)
                cells.push_back(fmt_double(metric_value(c.per_region[region], metric)));
        out += join_csv(cells) + "\n";
    }
    return out;
}

inline std::string render_summary_csv(const CohortSummary& summary) {
    std::string out = "stat," + join_csv(metric_column_headers()) + "\n";
    for (int stat = 0; stat < 3; ++stat) {
        std::vector<std::string> cells{CohortSummary::kStatNames[stat]};
        for (int metric = 0; metric < 4; ++metric)
            for (int region = 0; region < 3; ++region)
                cells.push_back(fmt_double(summary.values[stat][metric][region]));
        out += join_csv(cells) + "\n";
    }
    return out;
}

}  // namespace gliopipe::metrics
