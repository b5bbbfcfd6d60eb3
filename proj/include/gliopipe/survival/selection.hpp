#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "gliopipe/survival/evaluate.hpp"
#include "gliopipe/survival/models.hpp"

namespace gliopipe::survival {

inline Matrix take_columns(const Matrix& x, const std::vector<std::size_t>& cols) {
    Matrix out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i].reserve(cols.size());
        for (std::size_t j : cols) out[i].push_back(x[i][j]);
    }
    return out;
}

inline Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(x[r]);
    return out;
}

inline std::vector<double> take_rows(const std::vector<double>& y,
                                     const std::vector<std::size_t>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(y[r]);
    return out;
}

// Recursive feature elimination. Fits the estimator, drops the feature with
// the smallest importance (ties drop the later column), repeats down to one
// survivor. Ranking runs most to least important.
template <typename Factory>  // (round seed) -> std::unique_ptr<Regressor>
std::vector<std::string> rfe_rank_with(const std::vector<std::string>& names,
                                       const Matrix& x, const std::vector<double>& y,
                                       Factory&& make, std::uint64_t seed) {
    if (names.size() < 2) throw DataError("rfe_rank needs at least 2 features");
    if (x.empty() || x[0].size() != names.size())
        throw DataError("feature matrix does not match the name list");

    std::vector<std::size_t> active(names.size());
    std::iota(active.begin(), active.end(), 0);
    std::vector<std::string> eliminated;

    std::uint64_t round = 0;
    while (active.size() > 1) {
        auto model = make(derive_seed(seed, 0xAFE0, round));
        model->fit(take_columns(x, active), y);
        const auto scores = model->importances();
        if (!scores)
            throw CapabilityError("estimator exposes no importance scores for RFE");
        std::size_t drop = 0;
        for (std::size_t j = 1; j < scores->size(); ++j)
            if ((*scores)[j] <= (*scores)[drop]) drop = j;
        eliminated.push_back(names[active[drop]]);
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        ++round;
    }

    std::vector<std::string> ranking{names[active[0]]};
    for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it)
        ranking.push_back(*it);
    return ranking;
}

inline std::vector<std::string> rfe_rank(const std::vector<std::string>& names,
                                         const Matrix& x, const std::vector<double>& y,
                                         RegressorKind kind, const ModelZooParams& params,
                                         std::uint64_t seed) {
    return rfe_rank_with(
        names, x, y,
        [&](std::uint64_t round_seed) { return make_regressor(kind, params, round_seed); },
        seed);
}

struct SelectKResult {
    int best_k = 0;
    std::vector<std::string> selected;
    std::vector<double> accuracy_by_k;  // index k-1
};

// Sweep k = 1..k_max over the ranking, scoring each k by cross-validated
// bucket accuracy; ties resolve toward the smaller k.
inline SelectKResult select_k(const std::vector<std::string>& names, const Matrix& x,
                              const std::vector<double>& y,
                              const std::vector<std::string>& ranking, int k_max,
                              RegressorKind kind, const ModelZooParams& params,
                              std::uint64_t seed, int cv_folds = 4,
                              const BucketThresholds& thresholds = {}) {
    if (k_max < 1 || static_cast<std::size_t>(k_max) > names.size())
        throw ConfigError("k_max must be in [1, feature count]");
    const auto folds = make_folds(x.size(), cv_folds, derive_seed(seed, 0x5E1E));
    for (const auto& fold : folds)
        if (fold.size() < 2)
            throw DataError("cross-validation fold with < 2 samples");

    std::vector<std::size_t> ranked_cols;
    for (const auto& name : ranking) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DataError("ranking names unknown feature " + name);
        ranked_cols.push_back(static_cast<std::size_t>(it - names.begin()));
    }

    SelectKResult out;
    double best_acc = -1.0;
    for (int k = 1; k <= k_max; ++k) {
        const std::vector<std::size_t> cols(ranked_cols.begin(), ranked_cols.begin() + k);
        const Matrix xk = take_columns(x, cols);
        double acc_sum = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<std::size_t> train_rows;
            for (std::size_t g = 0; g < folds.size(); ++g)
                if (g != f)
                    train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
            auto model = fit(kind, params, derive_seed(seed, 0x5EED, f), take_rows(xk, train_rows),
                             take_rows(y, train_rows));
            const auto preds = predict_days(*model, take_rows(xk, folds[f]));
            const auto truth = take_rows(y, folds[f]);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < preds.size(); ++i)
                if (bucketize(preds[i], thresholds) == bucketize(truth[i], thresholds))
                    ++hits;
            acc_sum += static_cast<double>(hits) / static_cast<double>(preds.size());
        }
        const double acc = acc_sum / static_cast<double>(folds.size());
        out.accuracy_by_k.push_back(acc);
        if (acc > best_acc) {
            best_acc = acc;
            out.best_k = k;
        }
    }
    out.selected.assign(ranking.begin(), ranking.begin() + out.best_k);
    return out;
}

// Mean MSE increase over seeded column shuffles.
inline std::vector<double> permutation_importance(const Regressor& model, const Matrix& x,
                                                  const std::vector<double>& y, int repeats,
                                                  std::uint64_t seed) {
    if (repeats < 1) throw ConfigError("permutation_importance needs repeats >= 1");
    check_matrix(x, y);
    const auto base_pred = predict_days(model, x);
    auto mse = [&](const std::vector<double>& pred) {
        double s = 0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            s += (pred[i] - y[i]) * (pred[i] - y[i]);
        return s / static_cast<double>(pred.size());
    };
    const double base = mse(base_pred);

    const std::size_t p = x[0].size();
    std::vector<double> out(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double total = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            std::vector<std::size_t> perm(x.size());
            std::iota(perm.begin(), perm.end(), 0);
            Rng rng(derive_seed(seed, 0x9E41 + j, static_cast<std::uint64_t>(rep)));
            rng.shuffle(perm);
            Matrix shuffled = x;
            for (std::size_t i = 0; i < x.size(); ++i) shuffled[i][j] = x[perm[i]][j];
            total += mse(predict_days(model, shuffled));
        }
        out[j] = total / repeats - base;
    }
    return out;
}

}  // namespace gliopipe::survival
