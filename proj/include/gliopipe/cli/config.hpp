#pragma once

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gliopipe/errors.hpp"
#include "gliopipe/text.hpp"

extern "C" char** environ;

namespace gliopipe::cli {

using nlohmann::json;

// Allowed keys per config section; anything else is rejected so typos fail
// loudly instead of silently falling back to defaults.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"", {"seed", "out_dir", "deterministic", "synth", "network", "train", "infer",
              "eval_seg", "features", "survival", "report"}},
        {"synth", {"count", "dims", "noise_sigma", "spacing", "format", "cases"}},
        {"synth.cases", {"case_id", "seed", "dims", "center", "ncr_semi", "tc_semi",
                         "wt_semi", "noise_sigma", "spacing"}},
        {"network", {"in_channels", "num_classes", "base_filters", "depth",
                     "reduction_ratio", "attention", "fusion"}},
        {"train", {"dataset_dir", "checkpoint", "history_csv", "learning_rate",
                   "weight_decay", "max_steps", "batch_size", "crop"}},
        {"infer", {"dataset_dir", "checkpoint", "pred_dir", "window", "normalize",
                   "format"}},
        {"eval_seg", {"pred_dir", "gt_dir", "case_csv", "summary_csv", "hausdorff",
                      "arms", "comparison_csv"}},
        {"eval_seg.arms", {"name", "pred_dir"}},
        {"features", {"dataset_dir", "labels", "pred_dir", "survival_csv", "features_csv",
                      "scaler_json", "warnings_file", "modality",
                      "include_axis_directions", "include_resection"}},
        {"survival", {"features_csv", "kinds", "folds", "k_max", "use_rfe", "models_dir",
                      "results_csv", "folds_csv", "predictions_dir", "buckets",
                      "importance_repeats", "gbt", "mlp", "rf", "svr"}},
        {"survival.buckets", {"short_below", "long_above"}},
        {"survival.gbt", {"max_depth", "learning_rate", "n_rounds", "l1_alpha", "l2_lambda"}},
        {"survival.mlp", {"hidden", "learning_rate", "epochs", "seed"}},
        {"survival.rf", {"n_trees", "max_depth", "min_leaf", "max_features", "seed"}},
        {"survival.svr", {"kernel_width", "c", "epsilon", "max_sweeps", "tol"}},
        {"report", {"predictions_csv", "survival_csv", "bland_altman_csv", "scatter_csv"}},
    };
    return schema;
}

namespace detail {

inline void check_keys(const json& node, const std::string& path) {
    const auto& schema = config_schema();
    const auto it = schema.find(path);
    if (it == schema.end() || !node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
        if (!it->second.contains(key))
            throw ConfigError("unknown config key '" +
                              (path.empty() ? key : path + "." + key) + "'");
        const std::string child = path.empty() ? key : path + "." + key;
        if (value.is_object()) {
            check_keys(value, child);
        } else if (value.is_array() && schema.contains(child)) {
            for (const auto& element : value) check_keys(element, child);
        }
    }
}

inline std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

inline constexpr const char* kEnvPrefix = "GLIOPIPE_";

// GLIOPIPE_SEED=7 sets /seed; GLIOPIPE_TRAIN__MAX_STEPS=10 sets
// /train/max_steps. Values parse as JSON when possible, else as strings.
inline void apply_env_overrides(json& config) {
    for (char** env = environ; *env; ++env) {
        const std::string entry(*env);
        if (entry.rfind(kEnvPrefix, 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const std::string raw_key = entry.substr(std::strlen(kEnvPrefix), eq - std::strlen(kEnvPrefix));
        const std::string raw_value = entry.substr(eq + 1);

        std::string pointer;
        std::string segment;
        for (std::size_t i = 0; i <= raw_key.size(); ++i) {
            if (i + 1 < raw_key.size() && raw_key[i] == '_' && raw_key[i + 1] == '_') {
                pointer += "/" + detail::to_lower(segment);
                segment.clear();
                ++i;
            } else if (i < raw_key.size()) {
                segment += raw_key[i];
            }
        }
        if (!segment.empty()) pointer += "/" + detail::to_lower(segment);

        json value;
        try {
            value = json::parse(raw_value);
        } catch (const json::exception&) {
            value = raw_value;
        }
        config[json::json_pointer(pointer)] = value;
    }
}

struct RunConfig {
    json raw;  // validated user config after overrides
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "run";
    bool deterministic = true;

    bool has_section(const std::string& name) const { return raw.contains(name); }

    json section(const std::string& name) const {
        return raw.contains(name) ? raw.at(name) : json::object();
    }

    // Output paths default under out_dir; explicit paths are used as given.
    std::filesystem::path out_path(const json& section, const std::string& key,
                                   const std::string& fallback) const {
        if (section.contains(key))
            return std::filesystem::path(section.at(key).get<std::string>());
        return out_dir / fallback;
    }

    static RunConfig load(const std::string& config_path, bool with_env = true) {
        json j = json::object();
        if (!config_path.empty()) {
            try {
                j = json::parse(read_text_file(config_path));
            } catch (const json::exception& e) {
                throw ConfigError("cannot parse config " + config_path + ": " + e.what());
            }
        }
        return from_json(std::move(j), with_env);
    }

    static RunConfig from_json(json j, bool with_env = true) {
        if (with_env) apply_env_overrides(j);
        detail::check_keys(j, "");
        RunConfig cfg;
        cfg.raw = std::move(j);
        if (cfg.raw.contains("seed")) cfg.seed = cfg.raw.at("seed").get<std::uint64_t>();
        if (cfg.raw.contains("out_dir"))
            cfg.out_dir = cfg.raw.at("out_dir").get<std::string>();
        if (cfg.raw.contains("deterministic"))
            cfg.deterministic = cfg.raw.at("deterministic").get<bool>();
        return cfg;
    }

    // Every run leaves a resolved snapshot next to its outputs.
    void write_snapshot(const std::string& command) const {
        std::filesystem::create_directories(out_dir);
        json snap = raw;
        snap["seed"] = seed;
        snap["out_dir"] = out_dir.string();
        snap["deterministic"] = deterministic;
        write_text_file((out_dir / (command + "_config.json")).string(),
                        snap.dump(2) + "\n");
    }
};

}  // namespace gliopipe::cli
