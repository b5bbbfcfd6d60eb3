#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gliopipe/rng.hpp"
#include "gliopipe/survival/regressor.hpp"

namespace gliopipe::survival {

struct RfParams {
    int n_trees = 100;
    int max_depth = 8;
    int min_leaf = 1;
    int max_features = 0;  // 0: ceil(p / 3)
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1 || max_depth < 1 || min_leaf < 1)
            throw ConfigError("rf: n_trees/max_depth/min_leaf must be positive");
        if (max_features < 0) throw ConfigError("rf: max_features must be >= 0");
    }
    nlohmann::json to_json() const {
        return {{"n_trees", n_trees}, {"max_depth", max_depth}, {"min_leaf", min_leaf},
                {"max_features", max_features}, {"seed", seed}};
    }
    static RfParams from_json(const nlohmann::json& j) {
        RfParams p;
        if (j.contains("n_trees")) p.n_trees = j.at("n_trees").get<int>();
        if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
        if (j.contains("min_leaf")) p.min_leaf = j.at("min_leaf").get<int>();
        if (j.contains("max_features")) p.max_features = j.at("max_features").get<int>();
        if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
        p.validate();
        return p;
    }
};

// Bagged CART regression forest, variance-reduction splits, random feature
// subset per node. Importance is the total weighted impurity decrease.
class RfRegressor : public Regressor {
public:
    explicit RfRegressor(RfParams params = {}) : params_(params) { params_.validate(); }

    void fit(const Matrix& x, const std::vector<double>& y) override {
        check_matrix(x, y);
        const std::size_t n = x.size();
        n_features_ = x[0].size();
        importance_.assign(n_features_, 0.0);
        trees_.clear();
        const int mtry = params_.max_features > 0
                             ? std::min<int>(params_.max_features,
                                             static_cast<int>(n_features_))
                             : (static_cast<int>(n_features_) + 2) / 3;

        for (int t = 0; t < params_.n_trees; ++t) {
            Rng rng(derive_seed(params_.seed, 0xF03E57, static_cast<std::uint64_t>(t)));
            std::vector<int> rows(n);
            for (std::size_t i = 0; i < n; ++i)
                rows[i] = static_cast<int>(rng.uniform_index(n));  // bootstrap
            std::sort(rows.begin(), rows.end());
            trees_.emplace_back();
            build_node(trees_.back(), x, y, rows, 0, mtry, rng);
        }
    }

    double predict_one(const std::vector<double>& row) const override {
        double sum = 0.0;
        for (const auto& tree : trees_) sum += eval_tree(tree, row);
        return sum / static_cast<double>(trees_.size());
    }

    std::optional<std::vector<double>> importances() const override { return importance_; }

    nlohmann::json to_json() const override {
        nlohmann::json j;
        j["kind"] = "rf";
        j["params"] = params_.to_json();
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

    static RfRegressor from_json(const nlohmann::json& j) {
        RfRegressor m(RfParams::from_json(j.at("params")));
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
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    int build_node(Tree& tree, const Matrix& x, const std::vector<double>& y,
                   const std::vector<int>& rows, int depth, int mtry, Rng& rng) {
        const int id = static_cast<int>(tree.size());
        tree.emplace_back();

        double sum = 0.0, sum2 = 0.0;
        for (int r : rows) {
            sum += y[static_cast<std::size_t>(r)];
            sum2 += y[static_cast<std::size_t>(r)] * y[static_cast<std::size_t>(r)];
        }
        const auto n = static_cast<double>(rows.size());
        const double sse_parent = sum2 - sum * sum / n;

        int best_feature = -1;
        double best_threshold = 0.0, best_reduction = 1e-12;
        if (depth < params_.max_depth &&
            rows.size() >= static_cast<std::size_t>(2 * params_.min_leaf)) {
            std::vector<int> feats(n_features_);
            std::iota(feats.begin(), feats.end(), 0);
            rng.shuffle(feats);
            feats.resize(static_cast<std::size_t>(mtry));
            std::sort(feats.begin(), feats.end());

            std::vector<int> order;
            for (int j : feats) {
                order = rows;
                std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                    return x[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] <
                           x[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
                });
                double ls = 0.0, ls2 = 0.0;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    const double yv = y[static_cast<std::size_t>(order[i])];
                    ls += yv;
                    ls2 += yv * yv;
                    const double lo = x[static_cast<std::size_t>(order[i])][static_cast<std::size_t>(j)];
                    const double hi = x[static_cast<std::size_t>(order[i + 1])][static_cast<std::size_t>(j)];
                    if (lo == hi) continue;
                    const auto nl = static_cast<double>(i + 1);
                    const double nr = n - nl;
                    if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
                    const double sse_l = ls2 - ls * ls / nl;
                    const double rs = sum - ls, rs2 = sum2 - ls2;
                    const double sse_r = rs2 - rs * rs / nr;
                    const double reduction = sse_parent - sse_l - sse_r;
                    if (reduction > best_reduction) {
                        best_reduction = reduction;
                        best_feature = j;
                        best_threshold = lo + 0.5 * (hi - lo);
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree[id].value = sum / n;
            return id;
        }
        importance_[static_cast<std::size_t>(best_feature)] += best_reduction;
        std::vector<int> left, right;
        for (int r : rows)
            (x[static_cast<std::size_t>(r)][static_cast<std::size_t>(best_feature)] <
                     best_threshold
                 ? left
                 : right)
                .push_back(r);
        tree[id].feature = best_feature;
        tree[id].threshold = best_threshold;
        const int l = build_node(tree, x, y, left, depth + 1, mtry, rng);
        const int r = build_node(tree, x, y, right, depth + 1, mtry, rng);
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

    RfParams params_;
    std::size_t n_features_ = 0;
    std::vector<Tree> trees_;
    std::vector<double> importance_;
};

}  // namespace gliopipe::survival
