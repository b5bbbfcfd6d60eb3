#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "gliopipe/rng.hpp"
#include "gliopipe/survival/regressor.hpp"

namespace gliopipe::survival {

struct MlpParams {
    std::vector<int> hidden = {32};
    double learning_rate = 0.01;
    int epochs = 500;
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden.empty()) throw ConfigError("mlp: need at least one hidden layer");
        for (int h : hidden)
            if (h < 1) throw ConfigError("mlp: hidden sizes must be positive");
        if (learning_rate <= 0 || epochs < 1)
            throw ConfigError("mlp: learning_rate/epochs must be positive");
    }
    nlohmann::json to_json() const {
        return {{"hidden", hidden}, {"learning_rate", learning_rate},
                {"epochs", epochs}, {"seed", seed}};
    }
    static MlpParams from_json(const nlohmann::json& j) {
        MlpParams p;
        if (j.contains("hidden")) p.hidden = j.at("hidden").get<std::vector<int>>();
        if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("epochs")) p.epochs = j.at("epochs").get<int>();
        if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
        p.validate();
        return p;
    }
};

// Fully-connected relu network trained full-batch with Adam on standardized
// targets; squared-error objective.
class MlpRegressor : public Regressor {
public:
    explicit MlpRegressor(MlpParams params = {}) : params_(params) { params_.validate(); }

    void fit(const Matrix& x, const std::vector<double>& y) override {
        check_matrix(x, y);
        const auto n = static_cast<Eigen::Index>(x.size());
        const auto p = static_cast<Eigen::Index>(x[0].size());

        Eigen::MatrixXd X(n, p);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < p; ++j) X(i, j) = x[i][j];

        y_mean_ = 0;
        for (double v : y) y_mean_ += v;
        y_mean_ /= static_cast<double>(y.size());
        double var = 0;
        for (double v : y) var += (v - y_mean_) * (v - y_mean_);
        y_sd_ = std::sqrt(var / static_cast<double>(y.size()));
        if (y_sd_ == 0) y_sd_ = 1.0;
        Eigen::VectorXd t(n);
        for (Eigen::Index i = 0; i < n; ++i) t(i) = (y[i] - y_mean_) / y_sd_;

        // layer sizes: p -> hidden... -> 1
        std::vector<int> sizes{static_cast<int>(p)};
        for (int h : params_.hidden) sizes.push_back(h);
        sizes.push_back(1);
        const std::size_t layers = sizes.size() - 1;
        weights_.assign(layers, {});
        biases_.assign(layers, {});
        Rng rng(derive_seed(params_.seed, 0x311A));
        for (std::size_t l = 0; l < layers; ++l) {
            weights_[l].setZero(sizes[l + 1], sizes[l]);
            const double sd = std::sqrt(2.0 / sizes[l]);
            for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
                for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
                    weights_[l](r, c) = rng.normal(0.0, sd);
            biases_[l].setZero(sizes[l + 1]);
        }

        // Adam state
        std::vector<Eigen::MatrixXd> mw(layers), vw(layers);
        std::vector<Eigen::VectorXd> mb(layers), vb(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            mw[l].setZero(weights_[l].rows(), weights_[l].cols());
            vw[l] = mw[l];
            mb[l].setZero(biases_[l].size());
            vb[l] = mb[l];
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;

        std::vector<Eigen::MatrixXd> act(layers + 1), pre(layers);
        for (int epoch = 1; epoch <= params_.epochs; ++epoch) {
            // forward: activations are samples x units
            act[0] = X;
            for (std::size_t l = 0; l < layers; ++l) {
                pre[l] = (act[l] * weights_[l].transpose()).rowwise() +
                         biases_[l].transpose();
                act[l + 1] = (l + 1 < layers) ? pre[l].cwiseMax(0.0) : pre[l];
            }
            Eigen::MatrixXd delta = (act[layers].col(0) - t) * (2.0 / static_cast<double>(n));
            for (std::size_t l = layers; l-- > 0;) {
                const Eigen::MatrixXd gw = delta.transpose() * act[l];
                const Eigen::VectorXd gb = delta.colwise().sum().transpose();
                if (l > 0) {
                    delta = (delta * weights_[l])
                                .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
                }
                const double bc1 = 1.0 - std::pow(b1, epoch);
                const double bc2 = 1.0 - std::pow(b2, epoch);
                mw[l] = b1 * mw[l] + (1 - b1) * gw;
                vw[l] = b2 * vw[l] + (1 - b2) * gw.cwiseProduct(gw);
                mb[l] = b1 * mb[l] + (1 - b1) * gb;
                vb[l] = b2 * vb[l] + (1 - b2) * gb.cwiseProduct(gb);
                weights_[l].array() -= params_.learning_rate * (mw[l].array() / bc1) /
                                       ((vw[l].array() / bc2).sqrt() + eps);
                biases_[l].array() -= params_.learning_rate * (mb[l].array() / bc1) /
                                      ((vb[l].array() / bc2).sqrt() + eps);
            }
        }
    }

    double predict_one(const std::vector<double>& row) const override {
        Eigen::VectorXd a(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) a(static_cast<Eigen::Index>(j)) = row[j];
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            a = weights_[l] * a + biases_[l];
            if (l + 1 < weights_.size()) a = a.cwiseMax(0.0);
        }
        return a(0) * y_sd_ + y_mean_;
    }

    // L2 norm of the first-layer weight column per input feature.
    std::optional<std::vector<double>> importances() const override {
        if (weights_.empty()) return std::nullopt;
        std::vector<double> out(static_cast<std::size_t>(weights_[0].cols()));
        for (Eigen::Index j = 0; j < weights_[0].cols(); ++j)
            out[static_cast<std::size_t>(j)] = weights_[0].col(j).norm();
        return out;
    }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["kind"] = "mlp";
        j["params"] = params_.to_json();
        j["y_mean"] = y_mean_;
        j["y_sd"] = y_sd_;
        nlohmann::json ws = nlohmann::json::array(), bs = nlohmann::json::array();
        for (const auto& w : weights_) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                std::vector<double> row(static_cast<std::size_t>(w.cols()));
                for (Eigen::Index c = 0; c < w.cols(); ++c)
                    row[static_cast<std::size_t>(c)] = w(r, c);
                rows.push_back(row);
            }
            ws.push_back(rows);
        }
        for (const auto& b : biases_)
            bs.push_back(std::vector<double>(b.data(), b.data() + b.size()));
        j["weights"] = ws;
        j["biases"] = bs;
        return j;
    }

    static MlpRegressor from_json(const nlohmann::json& j) {
        MlpRegressor m(MlpParams::from_json(j.at("params")));
        m.y_mean_ = j.at("y_mean").get<double>();
        m.y_sd_ = j.at("y_sd").get<double>();
        for (const auto& wj : j.at("weights")) {
            const auto rows = wj.get<std::vector<std::vector<double>>>();
            Eigen::MatrixXd w(rows.size(), rows[0].size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < rows[r].size(); ++c)
                    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            m.weights_.push_back(std::move(w));
        }
        for (const auto& bj : j.at("biases")) {
            const auto vals = bj.get<std::vector<double>>();
            Eigen::VectorXd b(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i)
                b(static_cast<Eigen::Index>(i)) = vals[i];
            m.biases_.push_back(std::move(b));
        }
        return m;
    }

private:
    MlpParams params_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    double y_mean_ = 0.0, y_sd_ = 1.0;
};

}  // namespace gliopipe::survival
