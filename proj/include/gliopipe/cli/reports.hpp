#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gliopipe/errors.hpp"
#include "gliopipe/text.hpp"

namespace gliopipe::cli {

struct AgreementPair {
    std::string case_id;
    double predicted = 0.0;
    double truth = 0.0;
};

struct BlandAltmanSummary {
    double mean_diff = 0.0;
    double sd_diff = 0.0;  // population
    double lower_limit = 0.0;
    double upper_limit = 0.0;
};

inline BlandAltmanSummary bland_altman_summary(const std::vector<AgreementPair>& pairs) {
    if (pairs.empty()) throw DataError("Bland-Altman needs at least one pair");
    BlandAltmanSummary s;
    for (const auto& p : pairs) s.mean_diff += p.predicted - p.truth;
    s.mean_diff /= static_cast<double>(pairs.size());
    for (const auto& p : pairs) {
        const double d = p.predicted - p.truth - s.mean_diff;
        s.sd_diff += d * d;
    }
    s.sd_diff = std::sqrt(s.sd_diff / static_cast<double>(pairs.size()));
    s.lower_limit = s.mean_diff - 1.96 * s.sd_diff;
    s.upper_limit = s.mean_diff + 1.96 * s.sd_diff;
    return s;
}

// Per-case rows (mean of the pair, difference) followed by the bias and the
// 1.96-sd limits of agreement.
inline std::string render_bland_altman_csv(const std::vector<AgreementPair>& pairs) {
    const BlandAltmanSummary s = bland_altman_summary(pairs);
    std::string out = "row,case_id,mean,diff\n";
    for (const auto& p : pairs)
        out += join_csv({"case", p.case_id, fmt_double(0.5 * (p.predicted + p.truth)),
                         fmt_double(p.predicted - p.truth)}) +
               "\n";
    out += join_csv({"mean_diff", "", "", fmt_double(s.mean_diff)}) + "\n";
    out += join_csv({"sd_diff", "", "", fmt_double(s.sd_diff)}) + "\n";
    out += join_csv({"lower_limit", "", "", fmt_double(s.lower_limit)}) + "\n";
    out += join_csv({"upper_limit", "", "", fmt_double(s.upper_limit)}) + "\n";
    return out;
}

inline std::string render_scatter_csv(const std::vector<AgreementPair>& pairs) {
    if (pairs.empty()) throw DataError("scatter report needs at least one pair");
    std::string out = "case_id,true_days,predicted_days\n";
    for (const auto& p : pairs)
        out += join_csv({p.case_id, fmt_double(p.truth), fmt_double(p.predicted)}) + "\n";
    return out;
}

}  // namespace gliopipe::cli
