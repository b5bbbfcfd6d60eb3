#pragma once

#include <cmath>
#include <vector>

#include "gliopipe/nn/tensor.hpp"

namespace gliopipe::nn {

// Adam with L2 weight decay added to the gradient before the moment updates.
class Adam {
public:
    Adam(double learning_rate, double weight_decay, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8)
        : lr_(learning_rate), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}

    void step(std::vector<Param*>& params) {
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                m_[i].assign(params[i]->size(), 0.0);
                v_[i].assign(params[i]->size(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(b1_, t_);
        const double bc2 = 1.0 - std::pow(b2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param& p = *params[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double g = p.grad[j] + wd_ * p.value[j];
                m_[i][j] = b1_ * m_[i][j] + (1.0 - b1_) * g;
                v_[i][j] = b2_ * v_[i][j] + (1.0 - b2_) * g * g;
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                p.value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    int step_count() const { return t_; }

private:
    double lr_, wd_, b1_, b2_, eps_;
    int t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace gliopipe::nn
