#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/nn/attention.hpp"
#include "gliopipe/nn/layers.hpp"

namespace gliopipe::nn {

struct NetworkConfig {
    int in_channels = 4;
    int num_classes = 4;  // background, NCR/NET, ED, ET
    int base_filters = 16;
    int depth = 4;  // encoder levels
    int reduction_ratio = 2;
    bool attention = true;
    std::string fusion = "parallel_add";

    void validate() const {
        if (depth < 2) throw ConfigError("depth must be >= 2");
        if (base_filters < 1) throw ConfigError("base_filters must be positive");
        if (in_channels < 1 || num_classes < 2)
            throw ConfigError("need >= 1 input channel and >= 2 classes");
        if (reduction_ratio < 1) throw ConfigError("reduction_ratio must be positive");
        if (fusion != "parallel_add")
            throw ConfigError("unsupported attention fusion '" + fusion + "'");
        if (attention)
            for (int level = 0; level < depth - 1; ++level)
                if ((base_filters << level) % reduction_ratio != 0)
                    throw ConfigError("decoder channels at level " + std::to_string(level) +
                                      " not divisible by reduction ratio");
    }

    // Spatial dims must be divisible by this for the pooling ladder.
    int downsample_factor() const { return 1 << (depth - 1); }

    nlohmann::json to_json() const {
        return {{"in_channels", in_channels},   {"num_classes", num_classes},
                {"base_filters", base_filters}, {"depth", depth},
                {"reduction_ratio", reduction_ratio}, {"attention", attention},
                {"fusion", fusion}};
    }
    static NetworkConfig from_json(const nlohmann::json& j) {
        NetworkConfig c;
        c.in_channels = j.at("in_channels").get<int>();
        c.num_classes = j.at("num_classes").get<int>();
        c.base_filters = j.at("base_filters").get<int>();
        c.depth = j.at("depth").get<int>();
        c.reduction_ratio = j.at("reduction_ratio").get<int>();
        c.attention = j.at("attention").get<bool>();
        c.fusion = j.at("fusion").get<std::string>();
        c.validate();
        return c;
    }
    bool operator==(const NetworkConfig&) const = default;
};

// Two (conv3 + instance norm + relu) stages.
class ConvBlock {
public:
    ConvBlock() = default;
    ConvBlock(const std::string& name, int in_channels, int out_channels)
        : conv1(name + ".conv1", in_channels, out_channels, 3, 1),
          norm1(name + ".norm1", out_channels),
          conv2(name + ".conv2", out_channels, out_channels, 3, 1),
          norm2(name + ".norm2", out_channels) {}

    void init_params(Rng& rng, double scale = 1.0) {
        conv1.init_params(rng, scale);
        conv2.init_params(rng, scale);
    }

    Tensor forward(const Tensor& x) {
        return relu2.forward(norm2.forward(conv2.forward(
            relu1.forward(norm1.forward(conv1.forward(x))))));
    }
    Tensor backward(const Tensor& gy) {
        return conv1.backward(norm1.backward(relu1.backward(
            conv2.backward(norm2.backward(relu2.backward(gy))))));
    }

    void collect(std::vector<Param*>& out) {
        out.push_back(&conv1.weight);
        out.push_back(&conv1.bias);
        out.push_back(&norm1.gamma);
        out.push_back(&norm1.beta);
        out.push_back(&conv2.weight);
        out.push_back(&conv2.bias);
        out.push_back(&norm2.gamma);
        out.push_back(&norm2.beta);
    }

    Conv3d conv1, conv2;
    InstanceNorm norm1, norm2;
    Relu relu1, relu2;
};

// 3D UNet with optional skip-attention units on every decoder block output.
class UNet3d {
public:
    static constexpr double kTrunkInitScale = 0.2;

    explicit UNet3d(NetworkConfig config, std::uint64_t seed = 0) : config_(config) {
        config_.validate();
        const int depth = config_.depth;
        encoders_.reserve(depth);
        int ch_in = config_.in_channels;
        for (int level = 0; level < depth; ++level) {
            const int ch_out = config_.base_filters << level;
            encoders_.emplace_back("enc" + std::to_string(level), ch_in, ch_out);
            ch_in = ch_out;
        }
        pools_.resize(depth - 1);
        for (int level = depth - 2; level >= 0; --level) {
            const int ch = config_.base_filters << level;
            ups_.emplace_back("up" + std::to_string(level), ch * 2, ch);
            decoders_.emplace_back("dec" + std::to_string(level), ch * 2, ch);
            if (config_.attention)
                attentions_.emplace_back("dec" + std::to_string(level) + ".att", ch,
                                         config_.reduction_ratio);
        }
        final_ = Conv3d("final", config_.base_filters, config_.num_classes, 1, 0);

        // Deterministic init; attention weights come from a separate derived
        // stream so both arms share identical common parameters under one seed.
        // Trunk convolutions use a small-scale He init: instance norm restores
        // the activation scale, while the reduced weight norm lets a fixed
        // optimizer step reorient the filters in far fewer updates.
        Rng rng(derive_seed(seed, 0x0151));
        for (auto& e : encoders_) e.init_params(rng, kTrunkInitScale);
        for (auto& u : ups_) u.init_params(rng, kTrunkInitScale);
        for (auto& d : decoders_) d.init_params(rng, kTrunkInitScale);
        // final layer stays zero so initial logits are uniform
        Rng att_rng(derive_seed(seed, 0x0A77));
        for (auto& a : attentions_) a.init_params(att_rng);
    }

    const NetworkConfig& config() const { return config_; }

    Tensor forward(const Tensor& x) {
        if (x.c != config_.in_channels)
            throw ShapeError("expected " + std::to_string(config_.in_channels) +
                             " input channels, got " + std::to_string(x.c));
        const int f = config_.downsample_factor();
        if (x.d % f || x.h % f || x.w % f)
            throw ShapeError("input dims " + x.dims().str() +
                             " must be divisible by " + std::to_string(f));

        skips_.clear();
        Tensor cur = x;
        for (int level = 0; level < config_.depth; ++level) {
            cur = encoders_[level].forward(cur);
            if (level + 1 < config_.depth) {
                skips_.push_back(cur);
                cur = pools_[level].forward(cur);
            }
        }
        for (std::size_t i = 0; i < ups_.size(); ++i) {
            const Tensor& skip = skips_[skips_.size() - 1 - i];
            Tensor up = ups_[i].forward(cur);
            cur = decoders_[i].forward(concat_channels(skip, up));
            if (config_.attention) cur = attentions_[i].forward(cur);
        }
        return final_.forward(cur);
    }

    void backward(const Tensor& glogits) {
        Tensor g = final_.backward(glogits);
        std::vector<Tensor> gskips(skips_.size());
        for (std::size_t i = ups_.size(); i-- > 0;) {
            if (config_.attention) g = attentions_[i].backward(g);
            g = decoders_[i].backward(g);
            auto [gskip, gup] = split_channels(g, skips_[skips_.size() - 1 - i].c);
            gskips[skips_.size() - 1 - i] = std::move(gskip);
            g = ups_[i].backward(gup);
        }
        for (int level = config_.depth; level-- > 0;) {
            if (level < config_.depth - 1) {
                g = pools_[level].backward(g);
                for (std::size_t i = 0; i < g.v.size(); ++i)
                    g.v[i] += gskips[level].v[i];
            }
            g = encoders_[level].backward(g);
        }
    }

    std::vector<Param*> params() {
        std::vector<Param*> out;
        for (auto& e : encoders_) e.collect(out);
        for (auto& u : ups_) {
            out.push_back(&u.weight);
            out.push_back(&u.bias);
        }
        for (auto& d : decoders_) d.collect(out);
        for (auto& a : attentions_) {
            out.push_back(&a.spatial().weight);
            out.push_back(&a.spatial().bias);
            out.push_back(&a.channel().w1);
            out.push_back(&a.channel().b1);
            out.push_back(&a.channel().w2);
            out.push_back(&a.channel().b2);
        }
        out.push_back(&final_.weight);
        out.push_back(&final_.bias);
        return out;
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (const Param* p : params()) n += p->size();
        return n;
    }

    void zero_grad() {
        for (Param* p : params()) p->zero_grad();
    }

    std::vector<SkipAttention>& attentions() { return attentions_; }

private:
    NetworkConfig config_;
    std::vector<ConvBlock> encoders_;
    std::vector<MaxPool3d> pools_;
    std::vector<ConvTranspose3d> ups_;
    std::vector<ConvBlock> decoders_;
    std::vector<SkipAttention> attentions_;
    Conv3d final_;
    std::vector<Tensor> skips_;
};

inline UNet3d build_model(const NetworkConfig& config, std::uint64_t seed = 0) {
    return UNet3d(config, seed);
}

}  // namespace gliopipe::nn
