#pragma once

#include <memory>

#include "gliopipe/survival/forest.hpp"
#include "gliopipe/survival/gbt.hpp"
#include "gliopipe/survival/mlp.hpp"
#include "gliopipe/survival/svr.hpp"

namespace gliopipe::survival {

// Hyperparameters for the whole model zoo; each kind reads its own block.
struct ModelZooParams {
    GbtParams gbt;
    MlpParams mlp;
    RfParams rf;
    SvrParams svr;

    nlohmann::json to_json() const {
        return {{"gbt", gbt.to_json()}, {"mlp", mlp.to_json()},
                {"rf", rf.to_json()},   {"svr", svr.to_json()}};
    }
    static ModelZooParams from_json(const nlohmann::json& j) {
        ModelZooParams p;
        if (j.contains("gbt")) p.gbt = GbtParams::from_json(j.at("gbt"));
        if (j.contains("mlp")) p.mlp = MlpParams::from_json(j.at("mlp"));
        if (j.contains("rf")) p.rf = RfParams::from_json(j.at("rf"));
        if (j.contains("svr")) p.svr = SvrParams::from_json(j.at("svr"));
        return p;
    }
};

inline std::unique_ptr<Regressor> make_regressor(RegressorKind kind,
                                                 const ModelZooParams& params,
                                                 std::uint64_t seed) {
    switch (kind) {
        case RegressorKind::GBT:
            return std::make_unique<GbtRegressor>(params.gbt);
        case RegressorKind::MLP: {
            MlpParams p = params.mlp;
            p.seed = derive_seed(seed, 0x31F0);
            return std::make_unique<MlpRegressor>(p);
        }
        case RegressorKind::RF: {
            RfParams p = params.rf;
            p.seed = derive_seed(seed, 0x4F0E);
            return std::make_unique<RfRegressor>(p);
        }
        case RegressorKind::SVR:
            return std::make_unique<SvrRegressor>(params.svr);
    }
    throw ConfigError("unknown regressor kind");
}

inline std::unique_ptr<Regressor> fit(RegressorKind kind, const ModelZooParams& params,
                                      std::uint64_t seed, const Matrix& x,
                                      const std::vector<double>& y) {
    auto model = make_regressor(kind, params, seed);
    model->fit(x, y);
    return model;
}

inline std::unique_ptr<Regressor> regressor_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gbt") return std::make_unique<GbtRegressor>(GbtRegressor::from_json(j));
    if (kind == "mlp") return std::make_unique<MlpRegressor>(MlpRegressor::from_json(j));
    if (kind == "rf") return std::make_unique<RfRegressor>(RfRegressor::from_json(j));
    if (kind == "svr") return std::make_unique<SvrRegressor>(SvrRegressor::from_json(j));
    throw ConfigError("unknown serialized regressor kind '" + kind + "'");
}

}  // namespace gliopipe::survival
