#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/errors.hpp"

namespace gliopipe::survival {

using Matrix = std::vector<std::vector<double>>;  // rows x features

inline void check_matrix(const Matrix& x, const std::vector<double>& y) {
    if (x.empty() || x.size() != y.size())
        throw DataError("feature rows (" + std::to_string(x.size()) +
                        ") and targets (" + std::to_string(y.size()) + ") disagree");
    const std::size_t p = x[0].size();
    for (const auto& row : x) {
        if (row.size() != p) throw DataError("ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("non-finite target value");
}

enum class RegressorKind { GBT, MLP, RF, SVR };

inline RegressorKind kind_from_string(const std::string& s) {
    if (s == "gbt") return RegressorKind::GBT;
    if (s == "mlp") return RegressorKind::MLP;
    if (s == "rf") return RegressorKind::RF;
    if (s == "svr") return RegressorKind::SVR;
    throw ConfigError("unknown regressor kind '" + s + "' (expected gbt|mlp|rf|svr)");
}

inline const char* kind_to_string(RegressorKind k) {
    switch (k) {
        case RegressorKind::GBT: return "gbt";
        case RegressorKind::MLP: return "mlp";
        case RegressorKind::RF: return "rf";
        case RegressorKind::SVR: return "svr";
    }
    return "?";
}

class Regressor {
public:
    virtual ~Regressor() = default;
    virtual void fit(const Matrix& x, const std::vector<double>& y) = 0;
    virtual double predict_one(const std::vector<double>& row) const = 0;
    // Per-feature importance scores, if the model kind defines them.
    virtual std::optional<std::vector<double>> importances() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

inline std::vector<double> predict_raw(const Regressor& model, const Matrix& x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(model.predict_one(row));
    return out;
}

// Survival-days prediction: finite and clamped at zero.
inline std::vector<double> predict_days(const Regressor& model, const Matrix& x) {
    std::vector<double> out = predict_raw(model, x);
    for (double& v : out) {
        if (!std::isfinite(v)) throw DataError("model produced a non-finite prediction");
        v = std::max(v, 0.0);
    }
    return out;
}

}  // namespace gliopipe::survival
