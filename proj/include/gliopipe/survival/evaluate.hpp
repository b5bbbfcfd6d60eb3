#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gliopipe/rng.hpp"
#include "gliopipe/survival/regressor.hpp"

namespace gliopipe::survival {

// BraTS overall-survival classes; thresholds in days.
struct BucketThresholds {
    double short_below = 300.0;  // short: days < 300
    double long_above = 450.0;   // long: days > 450; mid otherwise
};

enum class OsBucket { Short, Mid, Long };

inline OsBucket bucketize(double days, const BucketThresholds& thresholds = {}) {
    if (days < 0 || !std::isfinite(days))
        throw DataError("survival days must be finite and >= 0");
    if (days < thresholds.short_below) return OsBucket::Short;
    if (days > thresholds.long_above) return OsBucket::Long;
    return OsBucket::Mid;
}

inline const char* bucket_name(OsBucket b) {
    switch (b) {
        case OsBucket::Short: return "short";
        case OsBucket::Mid: return "mid";
        case OsBucket::Long: return "long";
    }
    return "?";
}

// Ranks with ties averaged (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

inline double spearman_r(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw DataError("spearman_r needs two equal-length samples of size >= 2");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    bool identical = true;
    for (std::size_t i = 0; i < ra.size(); ++i)
        if (ra[i] != rb[i]) {
            identical = false;
            break;
        }
    if (identical) return 1.0;  // exact for any monotone transform

    const auto n = static_cast<double>(ra.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sxy += (ra[i] - ma) * (rb[i] - mb);
        sxx += (ra[i] - ma) * (ra[i] - ma);
        syy += (rb[i] - mb) * (rb[i] - mb);
    }
    if (sxx == 0 || syy == 0) return 0.0;  // a constant ranking carries no order
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct OsEvaluation {
    double accuracy = 0.0;   // 3-class bucket agreement
    double mse = 0.0;        // days^2
    double median_se = 0.0;
    double std_se = 0.0;     // population std of squared errors
    double spearman = 0.0;
};

inline OsEvaluation evaluate_os(const std::vector<double>& pred_days,
                                const std::vector<double>& true_days,
                                const BucketThresholds& thresholds = {}) {
    if (pred_days.size() != true_days.size())
        throw DataError("prediction/truth length mismatch");
    if (pred_days.size() < 2) throw DataError("evaluate_os needs at least 2 cases");

    const std::size_t n = pred_days.size();
    std::vector<double> se(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred_days[i] - true_days[i];
        se[i] = d * d;
        if (bucketize(pred_days[i], thresholds) == bucketize(true_days[i], thresholds))
            ++hits;
    }
    OsEvaluation out;
    out.accuracy = static_cast<double>(hits) / static_cast<double>(n);
    double mean = 0;
    for (double v : se) mean += v;
    mean /= static_cast<double>(n);
    out.mse = mean;
    std::vector<double> sorted = se;
    std::sort(sorted.begin(), sorted.end());
    out.median_se = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double var = 0;
    for (double v : se) var += (v - mean) * (v - mean);
    out.std_se = std::sqrt(var / static_cast<double>(n));
    out.spearman = spearman_r(pred_days, true_days);
    return out;
}

// Seeded shuffled fold assignment; contiguous chunks of the permuted index
// set, sizes differing by at most one. Exact partition.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t rows, int folds,
                                                        std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation needs >= 2 folds");
    if (rows < static_cast<std::size_t>(folds))
        throw DataError("fewer rows than folds");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0xF01D));
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
    const std::size_t base = rows / static_cast<std::size_t>(folds);
    const std::size_t extra = rows % static_cast<std::size_t>(folds);
    std::size_t at = 0;
    for (std::size_t f = 0; f < out.size(); ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                      order.begin() + static_cast<std::ptrdiff_t>(at + size));
        at += size;
    }
    return out;
}

// Column-wise min-max scaling with the same conventions as the radiomics
// feature scaler: degenerate columns map to 0.5, application clamps to [0,1].
struct ColumnScaler {
    std::vector<double> min, max;

    static ColumnScaler fit(const Matrix& x, const std::vector<std::size_t>& rows) {
        if (rows.empty()) throw DataError("cannot fit a scaler on zero rows");
        ColumnScaler s;
        s.min = x[rows[0]];
        s.max = x[rows[0]];
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < x[r].size(); ++j) {
                s.min[j] = std::min(s.min[j], x[r][j]);
                s.max[j] = std::max(s.max[j], x[r][j]);
            }
        return s;
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            out[j] = max[j] == min[j]
                         ? 0.5
                         : std::clamp((row[j] - min[j]) / (max[j] - min[j]), 0.0, 1.0);
        return out;
    }
};

}  // namespace gliopipe::survival
