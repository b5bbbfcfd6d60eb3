#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gliopipe/errors.hpp"
#include "gliopipe/volume.hpp"

namespace gliopipe::nn {

// Dense feature map, shape (C, D, H, W), C-order with w fastest.
struct Tensor {
    int c = 0, d = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int d_, int h_, int w_)
        : c(c_), d(d_), h(h_), w(w_),
          v(static_cast<std::size_t>(c_) * d_ * h_ * w_, 0.0) {}

    std::size_t spatial() const { return static_cast<std::size_t>(d) * h * w; }
    std::size_t size() const { return v.size(); }
    Dims3 dims() const { return {d, h, w}; }

    double& at(int ci, int di, int hi, int wi) {
        return v[((static_cast<std::size_t>(ci) * d + di) * h + hi) * w + wi];
    }
    double at(int ci, int di, int hi, int wi) const {
        return v[((static_cast<std::size_t>(ci) * d + di) * h + hi) * w + wi];
    }

    bool same_shape(const Tensor& o) const {
        return c == o.c && d == o.d && h == o.h && w == o.w;
    }
    std::string shape_str() const {
        return std::to_string(c) + "x" + std::to_string(d) + "x" + std::to_string(h) +
               "x" + std::to_string(w);
    }
};

// Named parameter tensor with its gradient accumulator.
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;

    void init(std::string n, std::vector<int> s) {
        name = std::move(n);
        shape = std::move(s);
        std::size_t count = 1;
        for (int dim : shape) count *= static_cast<std::size_t>(dim);
        value.assign(count, 0.0);
        grad.assign(count, 0.0);
    }
    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

}  // namespace gliopipe::nn
