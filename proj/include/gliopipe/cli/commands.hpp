#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "gliopipe/cli/config.hpp"
#include "gliopipe/cli/reports.hpp"
#include "gliopipe/metrics/cohort.hpp"
#include "gliopipe/nifti.hpp"
#include "gliopipe/nn/checkpoint.hpp"
#include "gliopipe/nn/inference.hpp"
#include "gliopipe/nn/trainer.hpp"
#include "gliopipe/phantom.hpp"
#include "gliopipe/radiomics/features.hpp"
#include "gliopipe/raw_io.hpp"
#include "gliopipe/survival/cross_validate.hpp"
#include "gliopipe/survival/record.hpp"

namespace gliopipe::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- helpers

inline Dims3 dims_from_json(const json& j) {
    const auto v = j.get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("dims need exactly 3 entries");
    return {v[0], v[1], v[2]};
}

inline std::array<double, 3> triple_from_json(const json& j) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("expected 3 numeric entries");
    return {v[0], v[1], v[2]};
}

inline PhantomSpec phantom_from_json(const json& j, std::uint64_t fallback_seed) {
    PhantomSpec spec;
    spec.seed = fallback_seed;
    if (j.contains("case_id")) spec.case_id = j.at("case_id").get<std::string>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("dims")) spec.dims = dims_from_json(j.at("dims"));
    if (j.contains("center")) spec.center = triple_from_json(j.at("center"));
    if (j.contains("ncr_semi")) spec.ncr_semi = triple_from_json(j.at("ncr_semi"));
    if (j.contains("tc_semi")) spec.tc_semi = triple_from_json(j.at("tc_semi"));
    if (j.contains("wt_semi")) spec.wt_semi = triple_from_json(j.at("wt_semi"));
    if (j.contains("noise_sigma")) spec.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("spacing")) {
        const auto s = triple_from_json(j.at("spacing"));
        spec.spacing = {s[0], s[1], s[2]};
    }
    return spec;
}

inline nn::NetworkConfig network_from_config(const RunConfig& cfg) {
    nn::NetworkConfig net;
    const json s = cfg.section("network");
    if (s.contains("in_channels")) net.in_channels = s.at("in_channels").get<int>();
    if (s.contains("num_classes")) net.num_classes = s.at("num_classes").get<int>();
    if (s.contains("base_filters")) net.base_filters = s.at("base_filters").get<int>();
    if (s.contains("depth")) net.depth = s.at("depth").get<int>();
    if (s.contains("reduction_ratio"))
        net.reduction_ratio = s.at("reduction_ratio").get<int>();
    if (s.contains("attention")) net.attention = s.at("attention").get<bool>();
    if (s.contains("fusion")) net.fusion = s.at("fusion").get<std::string>();
    net.validate();
    return net;
}

// Case directory: internal raw format when meta.json exists, otherwise the
// NIfTI layout t1/t1gd/t2/flair[.nii|.nii.gz] with optional seg.
inline std::pair<MultiModalVolume, std::optional<LabelVolume>> load_any_case(
    const fs::path& dir, const std::string& case_id) {
    if (fs::exists(dir / "meta.json")) return load_case_raw(dir);
    auto nii_path = [&](const std::string& stem) -> std::string {
        for (const char* ext : {".nii.gz", ".nii"}) {
            const fs::path p = dir / (stem + ext);
            if (fs::exists(p)) return p.string();
        }
        throw IoError("no " + stem + ".nii[.gz] in " + dir.string());
    };
    std::array<std::string, 4> images;
    for (int c = 0; c < kNumModalities; ++c) images[c] = nii_path(kModalityNames[c]);
    std::optional<std::string> label;
    for (const char* ext : {".nii.gz", ".nii"}) {
        const fs::path p = dir / (std::string("seg") + ext);
        if (fs::exists(p)) {
            label = p.string();
            break;
        }
    }
    return load_case(images, label, case_id);
}

struct LoadedCase {
    std::string id;
    MultiModalVolume volume;
    std::optional<LabelVolume> label;
};

inline std::vector<LoadedCase> load_dataset(const fs::path& dataset_dir) {
    DatasetIndex index = load_dataset_index(dataset_dir);
    std::sort(index.cases.begin(), index.cases.end());
    std::vector<LoadedCase> out;
    for (const auto& [id, dir] : index.cases) {
        auto [volume, label] = load_any_case(dir, id);
        out.push_back({id, std::move(volume), std::move(label)});
    }
    return out;
}

inline LabelVolume load_prediction(const fs::path& pred_dir, const std::string& case_id) {
    const fs::path dir = pred_dir / case_id;
    if (fs::exists(dir / "meta.json")) return load_pred_labels_raw(dir);
    for (const char* ext : {".nii.gz", ".nii"}) {
        const fs::path p = dir / (std::string("seg") + ext);
        if (fs::exists(p)) {
            nifti::RawVolume raw = nifti::read_file(p.string());
            LabelVolume label;
            label.case_id = case_id;
            label.labels = nifti::to_label_grid(raw, p.string());
            return label;
        }
    }
    throw IoError("no prediction found for case " + case_id + " under " +
                  pred_dir.string());
}

// ---------------------------------------------------------------- synth

inline std::vector<PhantomSpec> synth_specs(const RunConfig& cfg) {
    const json s = cfg.section("synth");
    std::vector<PhantomSpec> specs;
    if (s.contains("cases")) {
        std::uint64_t i = 0;
        for (const auto& c : s.at("cases"))
            specs.push_back(phantom_from_json(c, derive_seed(cfg.seed, 0x5CA5E, i++)));
        return specs;
    }
    const int count = s.contains("count") ? s.at("count").get<int>() : 4;
    if (count < 0) throw ConfigError("synth.count must be >= 0");
    const Dims3 dims = s.contains("dims") ? dims_from_json(s.at("dims")) : Dims3{24, 24, 24};
    const double noise = s.contains("noise_sigma") ? s.at("noise_sigma").get<double>() : 0.05;
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(cfg.seed, 0x5CA5E, static_cast<std::uint64_t>(i)));
        PhantomSpec spec;
        char name[32];
        std::snprintf(name, sizeof(name), "case_%03d", i);
        spec.case_id = name;
        spec.seed = derive_seed(cfg.seed, 0x5EED5, static_cast<std::uint64_t>(i));
        spec.dims = dims;
        spec.noise_sigma = noise;
        if (s.contains("spacing")) {
            const auto sp = triple_from_json(s.at("spacing"));
            spec.spacing = {sp[0], sp[1], sp[2]};
        }
        const double axes[3] = {static_cast<double>(dims.d), static_cast<double>(dims.h),
                                static_cast<double>(dims.w)};
        for (int a = 0; a < 3; ++a) {
            spec.center[a] = axes[a] * (0.5 + rng.uniform(-0.05, 0.05));
            spec.wt_semi[a] = axes[a] * rng.uniform(0.20, 0.34);
            spec.tc_semi[a] = spec.wt_semi[a] * rng.uniform(0.50, 0.68);
            spec.ncr_semi[a] = spec.tc_semi[a] * rng.uniform(0.45, 0.70);
        }
        specs.push_back(spec);
    }
    return specs;
}

inline void cmd_synth(const RunConfig& cfg) {
    const json s = cfg.section("synth");
    const std::string format = s.contains("format") ? s.at("format").get<std::string>() : "raw";
    if (format != "raw" && format != "nifti")
        throw ConfigError("synth.format must be raw or nifti");

    const std::vector<PhantomSpec> specs = synth_specs(cfg);
    const fs::path root = cfg.out_dir / "cases";
    std::vector<std::pair<std::string, std::string>> manifest;
    for (const auto& spec : specs) {
        auto [volume, label] = generate_phantom(spec);
        const fs::path dir = root / spec.case_id;
        if (format == "raw") {
            save_case_raw(dir, volume, &label);
        } else {
            fs::create_directories(dir);
            for (int c = 0; c < kNumModalities; ++c)
                nifti::write_image((dir / (std::string(kModalityNames[c]) + ".nii.gz")).string(),
                                   volume.channels[c], volume.spacing);
            nifti::write_labels((dir / "seg.nii.gz").string(), label.labels, volume.spacing);
        }
        manifest.emplace_back(spec.case_id, spec.case_id);
    }
    std::sort(manifest.begin(), manifest.end());
    save_dataset_index(root, manifest);
    cfg.write_snapshot("synth");
}

// ---------------------------------------------------------------- train-seg

inline nn::TrainConfig train_config_from(const RunConfig& cfg) {
    nn::TrainConfig tc;
    const json t = cfg.section("train");
    if (t.contains("learning_rate")) tc.learning_rate = t.at("learning_rate").get<double>();
    if (t.contains("weight_decay")) tc.weight_decay = t.at("weight_decay").get<double>();
    if (t.contains("max_steps")) tc.max_steps = t.at("max_steps").get<int>();
    if (t.contains("batch_size")) tc.batch_size = t.at("batch_size").get<int>();
    if (t.contains("crop")) tc.crop = dims_from_json(t.at("crop"));
    tc.seed = derive_seed(cfg.seed, 0x7421);
    tc.validate();
    return tc;
}

inline void cmd_train_seg(const RunConfig& cfg,
                          std::optional<bool> attention_override = std::nullopt) {
    const json t = cfg.section("train");
    if (!t.contains("dataset_dir"))
        throw ConfigError("train.dataset_dir is required");

    nn::NetworkConfig net = network_from_config(cfg);
    if (attention_override) net.attention = *attention_override;

    std::vector<nn::TrainCase> dataset;
    for (auto& c : load_dataset(t.at("dataset_dir").get<std::string>())) {
        if (!c.label)
            throw DataError("case " + c.id + " has no labels; cannot train");
        dataset.push_back({std::move(c.volume), std::move(*c.label)});
    }

    const nn::TrainConfig tc = train_config_from(cfg);
    nn::UNet3d model(net, derive_seed(cfg.seed, 0x1217));
    const std::vector<double> history = nn::train(model, dataset, tc);

    fs::create_directories(cfg.out_dir);
    const fs::path ckpt = cfg.out_path(t, "checkpoint", "model.ckpt");
    nn::Checkpoint::save(ckpt.string(), model, tc.max_steps, history, tc.crop);

    std::string csv = "step,loss\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        csv += std::to_string(i) + "," + fmt_double(history[i]) + "\n";
    write_text_file(cfg.out_path(t, "history_csv", "loss_history.csv").string(), csv);
    cfg.write_snapshot("train_seg");
}

// ---------------------------------------------------------------- infer-seg

inline void cmd_infer_seg(const RunConfig& cfg) {
    const json s = cfg.section("infer");
    if (!s.contains("dataset_dir")) throw ConfigError("infer.dataset_dir is required");
    const fs::path ckpt_path = cfg.out_path(s, "checkpoint", "model.ckpt");
    if (!fs::exists(ckpt_path))
        throw IoError("checkpoint not found: " + ckpt_path.string());

    auto [model, meta] = nn::Checkpoint::load(ckpt_path.string());
    if (cfg.has_section("network") && !(network_from_config(cfg) == meta.config))
        throw ConfigError("config network section does not match the checkpoint");

    Dims3 window = meta.crop_dims;
    if (s.contains("window")) window = dims_from_json(s.at("window"));
    const bool normalize = s.contains("normalize") ? s.at("normalize").get<bool>() : true;
    const std::string format = s.contains("format") ? s.at("format").get<std::string>() : "raw";

    const fs::path pred_dir = cfg.out_path(s, "pred_dir", "pred");
    for (auto& c : load_dataset(s.at("dataset_dir").get<std::string>())) {
        const LabelVolume pred = nn::predict(model, c.volume, window, normalize);
        if (format == "nifti") {
            fs::create_directories(pred_dir / c.id);
            nifti::write_labels(((pred_dir / c.id) / "seg.nii.gz").string(), pred.labels,
                                c.volume.spacing);
        } else {
            save_pred_labels_raw(pred_dir / c.id, pred, c.volume.spacing);
        }
    }
    cfg.write_snapshot("infer_seg");
}

// ---------------------------------------------------------------- eval-seg

inline std::vector<metrics::SegCaseMetrics> evaluate_pred_dir(
    const fs::path& pred_dir, const std::vector<LoadedCase>& gt_cases,
    metrics::HausdorffKind kind) {
    std::vector<metrics::SegCaseMetrics> rows;
    for (const auto& c : gt_cases) {
        if (!c.label) throw DataError("case " + c.id + " has no ground-truth labels");
        const LabelVolume pred = load_prediction(pred_dir, c.id);
        rows.push_back(metrics::evaluate_case(pred, *c.label, c.volume.spacing, kind));
    }
    return rows;
}

inline void cmd_eval_seg(const RunConfig& cfg) {
    const json s = cfg.section("eval_seg");
    if (!s.contains("gt_dir")) throw ConfigError("eval_seg.gt_dir is required");
    const auto kind_str =
        s.contains("hausdorff") ? s.at("hausdorff").get<std::string>() : "hd95";
    if (kind_str != "hd95" && kind_str != "max")
        throw ConfigError("eval_seg.hausdorff must be hd95 or max");
    const metrics::HausdorffKind kind =
        kind_str == "max" ? metrics::HausdorffKind::Max : metrics::HausdorffKind::HD95;

    const std::vector<LoadedCase> gt = load_dataset(s.at("gt_dir").get<std::string>());
    fs::create_directories(cfg.out_dir);

    if (s.contains("pred_dir")) {
        const auto rows =
            evaluate_pred_dir(s.at("pred_dir").get<std::string>(), gt, kind);
        write_text_file(cfg.out_path(s, "case_csv", "seg_cases.csv").string(),
                        metrics::render_case_csv(rows));
        write_text_file(cfg.out_path(s, "summary_csv", "seg_summary.csv").string(),
                        metrics::render_summary_csv(metrics::summarize_cohort(rows)));
    }

    if (s.contains("arms")) {
        std::string csv = "arm,dice_et,dice_wt,dice_tc\n";
        for (const auto& arm : s.at("arms")) {
            const auto rows = evaluate_pred_dir(
                arm.at("pred_dir").get<std::string>(), gt, kind);
            const auto summary = metrics::summarize_cohort(rows);
            csv += join_csv({arm.at("name").get<std::string>(),
                             fmt_double(summary.values[0][0][0]),
                             fmt_double(summary.values[0][0][1]),
                             fmt_double(summary.values[0][0][2])}) +
                   "\n";
        }
        write_text_file(cfg.out_path(s, "comparison_csv", "seg_comparison.csv").string(),
                        csv);
    }
    if (!s.contains("pred_dir") && !s.contains("arms"))
        throw ConfigError("eval_seg needs pred_dir or arms");
    cfg.write_snapshot("eval_seg");
}

// --------------------------------------------------------- extract-features

inline void write_features_csv(const fs::path& path,
                               const std::vector<radiomics::FeatureVector>& rows,
                               const std::vector<std::optional<double>>& days) {
    if (rows.empty()) throw DataError("no cases survived feature extraction");
    std::string csv = "case_id," + join_csv(rows[0].names) + ",survival_days\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> cells{rows[i].case_id};
        for (double v : rows[i].values) cells.push_back(fmt_double(v));
        cells.push_back(days[i] ? fmt_double(*days[i]) : "");
        csv += join_csv(cells) + "\n";
    }
    write_text_file(path.string(), csv);
}

struct FeatureTable {
    std::vector<std::string> names;
    std::vector<std::string> case_ids;
    survival::Matrix rows;
    std::vector<std::optional<double>> days;
};

inline FeatureTable read_features_csv(const fs::path& path) {
    const auto lines = read_lines(path.string());
    if (lines.size() < 2) throw DataError("feature table is empty: " + path.string());
    auto header = split_csv_line(lines[0]);
    if (header.size() < 3 || header.front() != "case_id" || header.back() != "survival_days")
        throw DataError("bad feature table header in " + path.string());
    FeatureTable t;
    t.names.assign(header.begin() + 1, header.end() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() != header.size())
            throw DataError("ragged feature table row " + std::to_string(i + 1));
        t.case_ids.push_back(cells.front());
        std::vector<double> row;
        for (std::size_t j = 1; j + 1 < cells.size(); ++j)
            row.push_back(parse_double(cells[j], "feature " + t.names[j - 1]));
        t.rows.push_back(std::move(row));
        t.days.push_back(cells.back().empty()
                             ? std::optional<double>{}
                             : std::optional<double>{parse_double(cells.back(),
                                                                  "survival_days")});
    }
    return t;
}

inline void cmd_extract_features(const RunConfig& cfg) {
    const json s = cfg.section("features");
    if (!s.contains("dataset_dir")) throw ConfigError("features.dataset_dir is required");
    if (!s.contains("survival_csv")) throw ConfigError("features.survival_csv is required");

    const survival::SurvivalTable table =
        survival::read_survival_csv(s.at("survival_csv").get<std::string>());

    radiomics::FeatureOptions opt;
    if (s.contains("modality"))
        opt.histogram_modality = modality_from_name(s.at("modality").get<std::string>());
    if (s.contains("include_axis_directions"))
        opt.include_axis_directions = s.at("include_axis_directions").get<bool>();
    opt.include_resection = s.contains("include_resection")
                                ? s.at("include_resection").get<bool>()
                                : table.has_resection;

    const std::string labels_from =
        s.contains("labels") ? s.at("labels").get<std::string>() : "gt";
    if (labels_from != "gt" && labels_from != "pred")
        throw ConfigError("features.labels must be gt or pred");

    std::vector<radiomics::FeatureVector> rows;
    std::vector<std::optional<double>> days;
    std::vector<std::string> warnings;
    for (auto& c : load_dataset(s.at("dataset_dir").get<std::string>())) {
        const survival::SurvivalRecord* rec = table.find(c.id);
        if (!rec) {
            warnings.push_back("case " + c.id + ": no survival record, excluded");
            continue;
        }
        LabelVolume label;
        if (labels_from == "pred") {
            if (!s.contains("pred_dir"))
                throw ConfigError("features.pred_dir is required when labels=pred");
            label = load_prediction(s.at("pred_dir").get<std::string>(), c.id);
        } else {
            if (!c.label) {
                warnings.push_back("case " + c.id + ": no ground-truth labels, excluded");
                continue;
            }
            label = std::move(*c.label);
        }
        try {
            rows.push_back(radiomics::extract_case_features(c.volume, label, *rec, opt));
            days.push_back(rec->survival_days);
        } catch (const EmptyRegionError& e) {
            warnings.push_back("case " + c.id + ": " + e.what() + ", excluded");
        }
    }

    fs::create_directories(cfg.out_dir);
    std::string warn_text;
    for (const auto& w : warnings) warn_text += w + "\n";
    write_text_file(cfg.out_path(s, "warnings_file", "extract_warnings.txt").string(),
                    warn_text);

    write_features_csv(cfg.out_path(s, "features_csv", "features.csv"), rows, days);

    // scaler fitted on the training rows (those with known survival)
    std::vector<radiomics::FeatureVector> train_rows;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (days[i]) train_rows.push_back(rows[i]);
    const auto scaler =
        radiomics::fit_scaler(train_rows.empty() ? rows : train_rows);
    write_text_file(cfg.out_path(s, "scaler_json", "scaler.json").string(),
                    scaler.to_json().dump(2) + "\n");
    cfg.write_snapshot("extract_features");
}

// ------------------------------------------------------------- train/eval os

inline survival::ModelZooParams zoo_params_from(const json& s) {
    json collected = json::object();
    for (const char* kind : {"gbt", "mlp", "rf", "svr"})
        if (s.contains(kind)) collected[kind] = s.at(kind);
    return survival::ModelZooParams::from_json(collected);
}

inline std::vector<survival::RegressorKind> kinds_from(const json& s) {
    std::vector<survival::RegressorKind> kinds;
    if (s.contains("kinds")) {
        for (const auto& k : s.at("kinds"))
            kinds.push_back(survival::kind_from_string(k.get<std::string>()));
    } else {
        kinds = {survival::RegressorKind::GBT, survival::RegressorKind::MLP,
                 survival::RegressorKind::RF, survival::RegressorKind::SVR};
    }
    if (kinds.empty()) throw ConfigError("survival.kinds is empty");
    return kinds;
}

inline survival::BucketThresholds buckets_from(const json& s) {
    survival::BucketThresholds t;
    if (s.contains("buckets")) {
        const json b = s.at("buckets");
        if (b.contains("short_below")) t.short_below = b.at("short_below").get<double>();
        if (b.contains("long_above")) t.long_above = b.at("long_above").get<double>();
        if (t.short_below > t.long_above)
            throw ConfigError("buckets.short_below must be <= buckets.long_above");
    }
    return t;
}

struct TrainingTable {
    std::vector<std::string> names;
    std::vector<std::string> case_ids;
    survival::Matrix x;
    std::vector<double> y;
};

inline TrainingTable training_rows(const FeatureTable& table) {
    TrainingTable t;
    t.names = table.names;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (!table.days[i]) continue;
        t.case_ids.push_back(table.case_ids[i]);
        t.x.push_back(table.rows[i]);
        t.y.push_back(*table.days[i]);
    }
    if (t.x.size() < 2) throw DataError("need at least 2 rows with survival_days");
    return t;
}

inline void cmd_train_os(const RunConfig& cfg) {
    const json s = cfg.section("survival");
    if (!s.contains("features_csv")) throw ConfigError("survival.features_csv is required");
    const FeatureTable table = read_features_csv(s.at("features_csv").get<std::string>());
    const TrainingTable t = training_rows(table);

    const auto params = zoo_params_from(s);
    const auto kinds = kinds_from(s);
    const auto thresholds = buckets_from(s);
    const bool use_rfe = s.contains("use_rfe") ? s.at("use_rfe").get<bool>() : true;
    const int folds = s.contains("folds") ? s.at("folds").get<int>() : 4;
    const int k_max = s.contains("k_max") ? s.at("k_max").get<int>() : 0;
    const int repeats =
        s.contains("importance_repeats") ? s.at("importance_repeats").get<int>() : 5;

    std::vector<std::size_t> all_rows(t.x.size());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const survival::ColumnScaler scaler = survival::ColumnScaler::fit(t.x, all_rows);
    survival::Matrix xs;
    xs.reserve(t.x.size());
    for (const auto& row : t.x) xs.push_back(scaler.apply(row));

    const fs::path models_dir = cfg.out_path(s, "models_dir", "models");
    fs::create_directories(models_dir);

    for (const auto kind : kinds) {
        const std::uint64_t seed =
            derive_seed(cfg.seed, 0x05E0, static_cast<std::uint64_t>(kind));
        std::vector<std::string> selected = t.names;
        if (use_rfe && t.names.size() >= 2) {
            const auto ranking =
                survival::rfe_rank(t.names, xs, t.y, kind, params, derive_seed(seed, 1));
            const int cap = k_max > 0 ? std::min<int>(k_max, static_cast<int>(t.names.size()))
                                      : static_cast<int>(t.names.size());
            selected = survival::select_k(t.names, xs, t.y, ranking, cap, kind, params,
                                          derive_seed(seed, 2), folds, thresholds)
                           .selected;
        }
        std::vector<std::size_t> cols;
        for (const auto& name : selected)
            for (std::size_t j = 0; j < t.names.size(); ++j)
                if (t.names[j] == name) cols.push_back(j);
        auto model = survival::fit(kind, params, derive_seed(seed, 3),
                                   survival::take_columns(xs, cols), t.y);

        json out;
        out["kind"] = survival::kind_to_string(kind);
        out["selected_features"] = selected;
        out["scaler"] = {{"names", t.names}, {"min", scaler.min}, {"max", scaler.max}};
        out["buckets"] = {{"short_below", thresholds.short_below},
                          {"long_above", thresholds.long_above}};
        out["model"] = model->to_json();
        write_text_file(
            (models_dir / (std::string(survival::kind_to_string(kind)) + ".json")).string(),
            out.dump() + "\n");

        // permutation importance stands in for the per-feature attribution plot
        const auto importance = survival::permutation_importance(
            *model, survival::take_columns(xs, cols), t.y, repeats, derive_seed(seed, 4));
        std::vector<std::size_t> order(importance.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return importance[a] > importance[b];
        });
        std::string csv = "feature,mse_increase\n";
        for (std::size_t j : order)
            csv += join_csv({selected[j], fmt_double(importance[j])}) + "\n";
        write_text_file((models_dir / (std::string(survival::kind_to_string(kind)) +
                                       "_importance.csv"))
                            .string(),
                        csv);
    }
    cfg.write_snapshot("train_os");
}

inline void cmd_eval_os(const RunConfig& cfg) {
    const json s = cfg.section("survival");
    if (!s.contains("features_csv")) throw ConfigError("survival.features_csv is required");
    const FeatureTable table = read_features_csv(s.at("features_csv").get<std::string>());
    const TrainingTable t = training_rows(table);

    const auto params = zoo_params_from(s);
    const auto kinds = kinds_from(s);

    survival::CrossValOptions options;
    options.thresholds = buckets_from(s);
    options.folds = s.contains("folds") ? s.at("folds").get<int>() : 4;
    options.use_rfe = s.contains("use_rfe") ? s.at("use_rfe").get<bool>() : true;
    options.k_max = s.contains("k_max") ? s.at("k_max").get<int>() : 0;
    options.seed = derive_seed(cfg.seed, 0x0E7A);

    fs::create_directories(cfg.out_dir);
    const fs::path pred_dir = cfg.out_path(s, "predictions_dir", "os_predictions");
    fs::create_directories(pred_dir);

    // Table-3 column order (Accuracy, MSE, MedianSE, stdSE) plus SpearmanR
    std::string results = "model,accuracy,mse,median_se,std_se,spearman_r\n";
    std::string folds_csv = "model,fold,accuracy,mse,median_se,std_se,spearman_r\n";
    for (const auto kind : kinds) {
        const auto cv = survival::cross_validate(kind, params, t.names, t.x, t.y, options);
        const auto& a = cv.aggregate;
        results += join_csv({survival::kind_to_string(kind), fmt_double(a.accuracy),
                             fmt_double(a.mse), fmt_double(a.median_se),
                             fmt_double(a.std_se), fmt_double(a.spearman)}) +
                   "\n";
        for (std::size_t f = 0; f < cv.per_fold.size(); ++f) {
            const auto& e = cv.per_fold[f].evaluation;
            folds_csv += join_csv({survival::kind_to_string(kind), std::to_string(f),
                                   fmt_double(e.accuracy), fmt_double(e.mse),
                                   fmt_double(e.median_se), fmt_double(e.std_se),
                                   fmt_double(e.spearman)}) +
                         "\n";
        }

        // out-of-fold predictions, portal submission shape
        std::vector<double> pred(t.y.size(), 0.0);
        for (const auto& fold : cv.per_fold)
            for (std::size_t i = 0; i < fold.validation_rows.size(); ++i)
                pred[fold.validation_rows[i]] = fold.predictions[i];
        std::vector<std::size_t> order(t.case_ids.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a_, std::size_t b_) {
            return t.case_ids[a_] < t.case_ids[b_];
        });
        std::string pred_csv = "case_id,predicted_days,bucket\n";
        for (std::size_t i : order)
            pred_csv += join_csv({t.case_ids[i], fmt_double(pred[i]),
                                  survival::bucket_name(survival::bucketize(
                                      pred[i], options.thresholds))}) +
                        "\n";
        write_text_file((pred_dir / (std::string("predictions_") +
                                     survival::kind_to_string(kind) + ".csv"))
                            .string(),
                        pred_csv);
    }
    write_text_file(cfg.out_path(s, "results_csv", "os_results.csv").string(), results);
    write_text_file(cfg.out_path(s, "folds_csv", "os_folds.csv").string(), folds_csv);
    cfg.write_snapshot("eval_os");
}

// ---------------------------------------------------------------- report

inline void cmd_report(const RunConfig& cfg) {
    const json s = cfg.section("report");
    if (!s.contains("predictions_csv"))
        throw ConfigError("report.predictions_csv is required");
    if (!s.contains("survival_csv")) throw ConfigError("report.survival_csv is required");

    const auto lines = read_lines(s.at("predictions_csv").get<std::string>());
    if (lines.size() < 2) throw DataError("prediction set is empty");
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2 || header[0] != "case_id" || header[1] != "predicted_days")
        throw DataError("predictions CSV header must start with case_id,predicted_days");

    const survival::SurvivalTable table =
        survival::read_survival_csv(s.at("survival_csv").get<std::string>());

    std::vector<AgreementPair> pairs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto cells = split_csv_line(lines[i]);
        const survival::SurvivalRecord* rec = table.find(cells[0]);
        if (!rec || !rec->survival_days)
            throw DataError("no ground-truth survival for case " + cells[0]);
        pairs.push_back({cells[0], parse_double(cells[1], "predicted_days"),
                         *rec->survival_days});
    }
    if (pairs.empty()) throw DataError("prediction set is empty");

    fs::create_directories(cfg.out_dir);
    write_text_file(cfg.out_path(s, "bland_altman_csv", "bland_altman.csv").string(),
                    render_bland_altman_csv(pairs));
    write_text_file(cfg.out_path(s, "scatter_csv", "scatter.csv").string(),
                    render_scatter_csv(pairs));
    cfg.write_snapshot("report");
}

}  // namespace gliopipe::cli
