#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/nn/loss.hpp"
#include "gliopipe/nn/optimizer.hpp"
#include "gliopipe/nn/unet.hpp"
#include "gliopipe/preprocess.hpp"
#include "gliopipe/rng.hpp"

namespace gliopipe::nn {

struct TrainConfig {
    double learning_rate = 0.00015;
    double weight_decay = 0.005;
    int max_steps = 100;
    int batch_size = 1;
    Dims3 crop{16, 16, 16};
    std::uint64_t seed = 0;

    void validate() const {
        if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
        if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
        if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (crop.d < 1 || crop.h < 1 || crop.w < 1)
            throw ConfigError("crop dims must be positive");
    }

    nlohmann::json to_json() const {
        return {{"learning_rate", learning_rate}, {"weight_decay", weight_decay},
                {"max_steps", max_steps},         {"batch_size", batch_size},
                {"crop", {crop.d, crop.h, crop.w}}, {"seed", seed}};
    }
    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        c.learning_rate = j.at("learning_rate").get<double>();
        c.weight_decay = j.at("weight_decay").get<double>();
        c.max_steps = j.at("max_steps").get<int>();
        c.batch_size = j.at("batch_size").get<int>();
        const auto cr = j.at("crop").get<std::vector<int>>();
        c.crop = {cr.at(0), cr.at(1), cr.at(2)};
        c.seed = j.at("seed").get<std::uint64_t>();
        c.validate();
        return c;
    }
};

struct TrainCase {
    MultiModalVolume volume;
    LabelVolume label;
};

inline Tensor volume_to_tensor(const MultiModalVolume& volume) {
    const Dims3 dims = volume.dims();
    Tensor t(kNumModalities, dims.d, dims.h, dims.w);
    const std::size_t n = t.spatial();
    for (int c = 0; c < kNumModalities; ++c) {
        const auto& src = volume.channels[c].data();
        for (std::size_t i = 0; i < n; ++i) t.v[c * n + i] = src[i];
    }
    return t;
}

// SGD loop over seeded random crops of mean-normalized volumes. Gradients are
// averaged over the batch; everything derives from tc.seed, so a re-run is
// bit-identical.
inline std::vector<double> train(UNet3d& model, const std::vector<TrainCase>& dataset,
                                 const TrainConfig& tc) {
    tc.validate();
    if (dataset.empty()) throw DataError("training dataset is empty");
    for (const auto& c : dataset) {
        if (!(c.volume.dims() == c.label.dims()))
            throw DataError("image/label shape mismatch for case " + c.volume.case_id);
        c.label.validate();
    }

    // normalization happens once per volume, crops inherit it
    std::vector<TrainCase> prepared;
    prepared.reserve(dataset.size());
    for (const auto& c : dataset) prepared.push_back({mean_normalize(c.volume), c.label});

    Adam opt(tc.learning_rate, tc.weight_decay);
    auto params = model.params();
    Rng pick(derive_seed(tc.seed, 0x9Acc));
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(tc.max_steps));

    for (int step = 0; step < tc.max_steps; ++step) {
        model.zero_grad();
        double batch_loss = 0.0;
        for (int slot = 0; slot < tc.batch_size; ++slot) {
            const std::size_t idx = pick.uniform_index(prepared.size());
            const auto [vol, lab] = random_crop(prepared[idx].volume, prepared[idx].label,
                                                tc.crop, derive_seed(tc.seed, step, slot));
            const Tensor input = volume_to_tensor(vol);
            const Tensor logits = model.forward(input);
            LossResult loss = seg_loss(logits, lab.labels);
            batch_loss += loss.total;
            model.backward(loss.grad);
        }
        batch_loss /= tc.batch_size;
        if (!std::isfinite(batch_loss))
            throw DivergenceError("non-finite loss at step " + std::to_string(step));
        if (tc.batch_size > 1) {
            const double inv = 1.0 / tc.batch_size;
            for (Param* p : params)
                for (double& g : p->grad) g *= inv;
        }
        opt.step(params);
        history.push_back(batch_loss);
    }
    return history;
}

}  // namespace gliopipe::nn
