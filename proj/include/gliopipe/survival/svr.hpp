#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gliopipe/survival/regressor.hpp"

namespace gliopipe::survival {

struct SvrParams {
    double kernel_width = 0.5;  // RBF sigma over [0,1]-scaled features
    double c = 10.0;            // box constraint
    double epsilon = 0.1;       // insensitive tube, in standardized target units
    int max_sweeps = 2000;
    double tol = 1e-8;

    void validate() const {
        if (kernel_width <= 0 || c <= 0 || epsilon < 0)
            throw ConfigError("svr: kernel_width/c must be positive and epsilon >= 0");
        if (max_sweeps < 1) throw ConfigError("svr: max_sweeps must be positive");
    }
    nlohmann::json to_json() const {
        return {{"kernel_width", kernel_width}, {"c", c}, {"epsilon", epsilon},
                {"max_sweeps", max_sweeps}, {"tol", tol}};
    }
    static SvrParams from_json(const nlohmann::json& j) {
        SvrParams p;
        if (j.contains("kernel_width")) p.kernel_width = j.at("kernel_width").get<double>();
        if (j.contains("c")) p.c = j.at("c").get<double>();
        if (j.contains("epsilon")) p.epsilon = j.at("epsilon").get<double>();
        if (j.contains("max_sweeps")) p.max_sweeps = j.at("max_sweeps").get<int>();
        if (j.contains("tol")) p.tol = j.at("tol").get<double>();
        p.validate();
        return p;
    }
};

// Epsilon-SVR with an RBF kernel. The bias is folded into the kernel
// (K + 1), which turns the dual into a box-constrained problem solved by
// cyclic coordinate descent with a soft-threshold closed form per coordinate.
class SvrRegressor : public Regressor {
public:
    explicit SvrRegressor(SvrParams params = {}) : params_(params) { params_.validate(); }

    void fit(const Matrix& x, const std::vector<double>& y) override {
        check_matrix(x, y);
        const std::size_t n = x.size();
        train_ = x;

        y_mean_ = 0;
        for (double v : y) y_mean_ += v;
        y_mean_ /= static_cast<double>(n);
        double var = 0;
        for (double v : y) var += (v - y_mean_) * (v - y_mean_);
        y_sd_ = std::sqrt(var / static_cast<double>(n));
        if (y_sd_ == 0) y_sd_ = 1.0;
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = (y[i] - y_mean_) / y_sd_;

        std::vector<double> kmat(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double k = kernel(x[i], x[j]) + 1.0;
                kmat[i * n + j] = k;
                kmat[j * n + i] = k;
            }

        beta_.assign(n, 0.0);
        std::vector<double> residual = t;  // t_i - sum_j K_ij beta_j
        for (int sweep = 0; sweep < params_.max_sweeps; ++sweep) {
            double max_delta = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double kii = kmat[i * n + i];
                const double g = residual[i] + kii * beta_[i];
                double b = 0.0;
                if (g > params_.epsilon) {
                    b = (g - params_.epsilon) / kii;
                } else if (g < -params_.epsilon) {
                    b = (g + params_.epsilon) / kii;
                }
                b = std::clamp(b, -params_.c, params_.c);
                const double delta = b - beta_[i];
                if (delta != 0.0) {
                    beta_[i] = b;
                    for (std::size_t j = 0; j < n; ++j) residual[j] -= kmat[j * n + i] * delta;
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
            if (max_delta < params_.tol) break;
        }
    }

    double predict_one(const std::vector<double>& row) const override {
        double f = 0.0;
        for (std::size_t i = 0; i < train_.size(); ++i)
            if (beta_[i] != 0.0) f += beta_[i] * (kernel(train_[i], row) + 1.0);
        return f * y_sd_ + y_mean_;
    }

    // Pseudo linear weights |sum_i beta_i x_ij| for feature ranking.
    std::optional<std::vector<double>> importances() const override {
        if (train_.empty()) return std::nullopt;
        std::vector<double> out(train_[0].size(), 0.0);
        for (std::size_t i = 0; i < train_.size(); ++i)
            for (std::size_t j = 0; j < out.size(); ++j)
                out[j] += beta_[i] * train_[i][j];
        for (double& v : out) v = std::abs(v);
        return out;
    }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["kind"] = "svr";
        j["params"] = params_.to_json();
        j["y_mean"] = y_mean_;
        j["y_sd"] = y_sd_;
        j["beta"] = beta_;
        j["train"] = train_;
        return j;
    }

    static SvrRegressor from_json(const nlohmann::json& j) {
        SvrRegressor m(SvrParams::from_json(j.at("params")));
        m.y_mean_ = j.at("y_mean").get<double>();
        m.y_sd_ = j.at("y_sd").get<double>();
        m.beta_ = j.at("beta").get<std::vector<double>>();
        m.train_ = j.at("train").get<Matrix>();
        return m;
    }

private:
    double kernel(const std::vector<double>& a, const std::vector<double>& b) const {
        double d2 = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = a[j] - b[j];
            d2 += d * d;
        }
        return std::exp(-d2 / (2.0 * params_.kernel_width * params_.kernel_width));
    }

    SvrParams params_;
    Matrix train_;
    std::vector<double> beta_;
    double y_mean_ = 0.0, y_sd_ = 1.0;
};

}  // namespace gliopipe::survival
