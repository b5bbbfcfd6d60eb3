#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gliopipe/survival/regressor.hpp"

namespace gliopipe::survival {

struct GbtParams {
    int max_depth = 3;
    double learning_rate = 0.1;
    int n_rounds = 200;
    double l1_alpha = 0.0;   // L1 on leaf weights
    double l2_lambda = 1.0;  // L2 on leaf weights

    void validate() const {
        if (max_depth < 1 || n_rounds < 1 || learning_rate <= 0)
            throw ConfigError("gbt: max_depth/n_rounds/learning_rate must be positive");
        if (l1_alpha < 0 || l2_lambda < 0)
            throw ConfigError("gbt: regularization weights must be >= 0");
    }
    nlohmann::json to_json() const {
        return {{"max_depth", max_depth}, {"learning_rate", learning_rate},
                {"n_rounds", n_rounds},   {"l1_alpha", l1_alpha},
                {"l2_lambda", l2_lambda}};
    }
    static GbtParams from_json(const nlohmann::json& j) {
        GbtParams p;
        if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
        if (j.contains("learning_rate")) p.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("n_rounds")) p.n_rounds = j.at("n_rounds").get<int>();
        if (j.contains("l1_alpha")) p.l1_alpha = j.at("l1_alpha").get<double>();
        if (j.contains("l2_lambda")) p.l2_lambda = j.at("l2_lambda").get<double>();
        p.validate();
        return p;
    }
};

// Gradient-boosted regression trees with squared-error loss and XGBoost-style
// regularized leaf weights (hessian is 1 per sample, so H equals the sample
// count). Exact greedy splits; fully deterministic.
class GbtRegressor : public Regressor {
public:
    explicit GbtRegressor(GbtParams params = {}) : params_(params) { params_.validate(); }

    void fit(const Matrix& x, const std::vector<double>& y) override {
        check_matrix(x, y);
        const std::size_t n = x.size();
        n_features_ = x[0].size();
        importance_.assign(n_features_, 0.0);
        trees_.clear();

        base_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        std::vector<double> pred(n, base_);
        std::vector<double> grad(n);
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);

        for (int round = 0; round < params_.n_rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];
            trees_.emplace_back();
            build_node(trees_.back(), x, grad, all, 0);
            if (trees_.back().size() == 1 && round > 0) {
                // stump collapsed to a single leaf: no structure left to learn
                const double w = trees_.back()[0].value;
                if (w == 0.0) {
                    trees_.pop_back();
                    break;
                }
            }
            for (std::size_t i = 0; i < n; ++i)
                pred[i] += params_.learning_rate * eval_tree(trees_.back(), x[i]);
        }
    }

    double predict_one(const std::vector<double>& row) const override {
        double v = base_;
        for (const auto& tree : trees_) v += params_.learning_rate * eval_tree(tree, row);
        return v;
    }

    // Total split gain per feature.
    std::optional<std::vector<double>> importances() const override { return importance_; }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["kind"] = "gbt";
        j["params"] = params_.to_json();
        j["base"] = base_;
        j["n_features"] = n_features_;
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& tree : trees_) {
            nlohmann::json nodes = nlohmann::json::array();
            for (const auto& node : tree)
                nodes.push_back({{"feature", node.feature}, {"threshold", node.threshold},
                                 {"left", node.left},       {"right", node.right},
                                 {"value", node.value}});
            trees.push_back(nodes);
        }
        j["trees"] = trees;
        return j;
    }

    static GbtRegressor from_json(const nlohmann::json& j) {
        GbtRegressor m(GbtParams::from_json(j.at("params")));
        m.base_ = j.at("base").get<double>();
        m.n_features_ = j.at("n_features").get<std::size_t>();
        for (const auto& tj : j.at("trees")) {
            Tree tree;
            for (const auto& nj : tj)
                tree.push_back({nj.at("feature").get<int>(), nj.at("threshold").get<double>(),
                                nj.at("left").get<int>(), nj.at("right").get<int>(),
                                nj.at("value").get<double>()});
            m.trees_.push_back(std::move(tree));
        }
        m.importance_.assign(m.n_features_, 0.0);
        return m;
    }

private:
    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;  // leaf weight
    };
    using Tree = std::vector<Node>;

    double leaf_weight(double g_sum, double h_sum) const {
        const double a = params_.l1_alpha;
        double g = 0.0;
        if (g_sum > a) {
            g = g_sum - a;
        } else if (g_sum < -a) {
            g = g_sum + a;
        }
        return -g / (h_sum + params_.l2_lambda);
    }

    double score(double g_sum, double h_sum) const {
        const double a = params_.l1_alpha;
        double g = 0.0;
        if (g_sum > a) {
            g = g_sum - a;
        } else if (g_sum < -a) {
            g = g_sum + a;
        }
        return g * g / (h_sum + params_.l2_lambda);
    }

    int build_node(Tree& tree, const Matrix& x, const std::vector<double>& grad,
                   const std::vector<int>& rows, int depth) {
        const int id = static_cast<int>(tree.size());
        tree.emplace_back();

        double g_total = 0.0;
        for (int r : rows) g_total += grad[r];
        const double h_total = static_cast<double>(rows.size());

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<int> order;
        if (depth < params_.max_depth && rows.size() >= 2) {
            const double parent = score(g_total, h_total);
            for (std::size_t j = 0; j < n_features_; ++j) {
                order = rows;
                std::stable_sort(order.begin(), order.end(),
                                 [&](int a, int b) { return x[a][j] < x[b][j]; });
                double g_left = 0.0;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    g_left += grad[order[i]];
                    const double lo = x[order[i]][j], hi = x[order[i + 1]][j];
                    if (lo == hi) continue;
                    const double h_left = static_cast<double>(i + 1);
                    const double gain = 0.5 * (score(g_left, h_left) +
                                               score(g_total - g_left, h_total - h_left) -
                                               parent);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(j);
                        best_threshold = lo + 0.5 * (hi - lo);
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree[id].value = leaf_weight(g_total, h_total);
            return id;
        }

        importance_[static_cast<std::size_t>(best_feature)] += best_gain;
        std::vector<int> left, right;
        for (int r : rows)
            (x[r][static_cast<std::size_t>(best_feature)] < best_threshold ? left : right)
                .push_back(r);
        tree[id].feature = best_feature;
        tree[id].threshold = best_threshold;
        const int l = build_node(tree, x, grad, left, depth + 1);
        const int r = build_node(tree, x, grad, right, depth + 1);
        tree[id].left = l;
        tree[id].right = r;
        return id;
    }

    static double eval_tree(const Tree& tree, const std::vector<double>& row) {
        int id = 0;
        while (tree[id].feature >= 0)
            id = row[static_cast<std::size_t>(tree[id].feature)] < tree[id].threshold
                     ? tree[id].left
                     : tree[id].right;
        return tree[id].value;
    }

    GbtParams params_;
    double base_ = 0.0;
    std::size_t n_features_ = 0;
    std::vector<Tree> trees_;
    std::vector<double> importance_;
};

}  // namespace gliopipe::survival
