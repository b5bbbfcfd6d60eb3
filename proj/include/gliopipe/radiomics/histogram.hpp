#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gliopipe/errors.hpp"

namespace gliopipe::radiomics {

struct HistogramStats {
    double entropy = 0.0;   // bits, over a 32-bin histogram
    double skewness = 0.0;  // m3 / m2^1.5
    double kurtosis = 0.0;  // m4 / m2^2, non-excess (Gaussian -> 3)
};

inline constexpr int kHistogramBins = 32;

inline HistogramStats histogram_stats(const std::vector<double>& values) {
    if (values.empty()) throw EmptyRegionError("histogram_stats of an empty sample");

    double lo = values[0], hi = values[0];
    double mean = 0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v;
    }
    mean /= static_cast<double>(values.size());

    HistogramStats out;
    if (hi == lo) return out;  // constant sample: all stats 0 by convention

    std::array<std::int64_t, kHistogramBins> counts{};
    const double scale = kHistogramBins / (hi - lo);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : values) {
        int bin = static_cast<int>((v - lo) * scale);
        if (bin >= kHistogramBins) bin = kHistogramBins - 1;  // v == hi
        ++counts[bin];
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const auto n = static_cast<double>(values.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;

    for (std::int64_t c : counts) {
        if (c == 0) continue;
        const double p = c / n;
        out.entropy -= p * std::log2(p);
    }
    if (m2 > 0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.kurtosis = m4 / (m2 * m2);
    }
    return out;
}

}  // namespace gliopipe::radiomics
