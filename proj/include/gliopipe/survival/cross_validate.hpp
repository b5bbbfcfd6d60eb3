#pragma once

#include <string>
#include <vector>

#include "gliopipe/survival/selection.hpp"

namespace gliopipe::survival {

struct CrossValOptions {
    int folds = 4;
    std::uint64_t seed = 0;
    bool use_rfe = true;
    int k_max = 0;  // 0: all features
    BucketThresholds thresholds;
};

struct FoldOutcome {
    OsEvaluation evaluation;
    std::vector<std::size_t> validation_rows;
    ColumnScaler scaler;                  // fitted on this fold's training rows
    std::vector<std::string> selected;    // features the fold's model used
    std::vector<double> predictions;      // aligned with validation_rows
};

struct CrossValResult {
    std::vector<FoldOutcome> per_fold;
    OsEvaluation aggregate;  // mean of each metric over folds
};

// Leakage-free k-fold evaluation: scaler, RFE ranking, and k selection are
// all fitted inside each training fold, never on the held-out rows.
inline CrossValResult cross_validate(RegressorKind kind, const ModelZooParams& params,
                                     const std::vector<std::string>& names,
                                     const Matrix& x_raw, const std::vector<double>& y,
                                     const CrossValOptions& options = {}) {
    check_matrix(x_raw, y);
    const auto folds = make_folds(x_raw.size(), options.folds, options.seed);

    CrossValResult out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < folds.size(); ++g)
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());

        FoldOutcome fold;
        fold.validation_rows = folds[f];
        fold.scaler = ColumnScaler::fit(x_raw, train_rows);

        Matrix x_train;
        x_train.reserve(train_rows.size());
        for (std::size_t r : train_rows) x_train.push_back(fold.scaler.apply(x_raw[r]));
        const std::vector<double> y_train = take_rows(y, train_rows);

        std::vector<std::string> selected = names;
        if (options.use_rfe && names.size() >= 2 && train_rows.size() >= 4) {
            const auto ranking = rfe_rank(names, x_train, y_train, kind, params,
                                          derive_seed(options.seed, 0xCF01, f));
            const int k_max =
                options.k_max > 0
                    ? std::min<int>(options.k_max, static_cast<int>(names.size()))
                    : static_cast<int>(names.size());
            // inner folds shrink with the training split so every fold keeps
            // at least 2 samples
            const int inner_folds = std::max(
                2, std::min<int>(options.folds, static_cast<int>(train_rows.size() / 2)));
            const auto pick =
                select_k(names, x_train, y_train, ranking, k_max, kind, params,
                         derive_seed(options.seed, 0xCF02, f), inner_folds,
                         options.thresholds);
            selected = pick.selected;
        }
        fold.selected = selected;

        std::vector<std::size_t> cols;
        for (const auto& name : selected)
            for (std::size_t j = 0; j < names.size(); ++j)
                if (names[j] == name) cols.push_back(j);

        auto model = fit(kind, params, derive_seed(options.seed, 0xCF03, f),
                         take_columns(x_train, cols), y_train);

        Matrix x_val;
        x_val.reserve(folds[f].size());
        for (std::size_t r : folds[f]) x_val.push_back(fold.scaler.apply(x_raw[r]));
        fold.predictions = predict_days(*model, take_columns(x_val, cols));
        fold.evaluation =
            evaluate_os(fold.predictions, take_rows(y, folds[f]), options.thresholds);
        out.per_fold.push_back(std::move(fold));
    }

    for (const auto& fold : out.per_fold) {
        out.aggregate.accuracy += fold.evaluation.accuracy;
        out.aggregate.mse += fold.evaluation.mse;
        out.aggregate.median_se += fold.evaluation.median_se;
        out.aggregate.std_se += fold.evaluation.std_se;
        out.aggregate.spearman += fold.evaluation.spearman;
    }
    const auto nf = static_cast<double>(out.per_fold.size());
    out.aggregate.accuracy /= nf;
    out.aggregate.mse /= nf;
    out.aggregate.median_se /= nf;
    out.aggregate.std_se /= nf;
    out.aggregate.spearman /= nf;
    return out;
}

}  // namespace gliopipe::survival
