#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gliopipe/cli/commands.hpp"

#include "test_util.hpp"

using namespace gliopipe;
using namespace gliopipe::cli;
namespace fs = std::filesystem;

namespace {

RunConfig config_from(json j) { return RunConfig::from_json(std::move(j), false); }

json synth_json(const fs::path& out, int count, double noise = 0.05,
                std::vector<int> dims = {16, 16, 16}) {
    return {{"seed", 11},
            {"out_dir", out.string()},
            {"synth", {{"count", count}, {"dims", dims}, {"noise_sigma", noise}}}};
}

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

void write_survival(const fs::path& path, const std::vector<std::string>& rows,
                    bool resection = false) {
    std::string csv = resection ? "case_id,age,survival_days,resection_status\n"
                                : "case_id,age,survival_days\n";
    for (const auto& r : rows) csv += r + "\n";
    write_text_file(path.string(), csv);
}

}  // namespace

TEST_CASE("unknown config keys are rejected", "[cli]") {
    CHECK_THROWS_AS(config_from({{"sede", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from({{"train", {{"max_step", 1}}}}), ConfigError);
    CHECK_THROWS_AS(config_from({{"synth", {{"cases", {{{"wt_semis", {1, 2, 3}}}}}}}}),
                    ConfigError);
    CHECK_NOTHROW(config_from({{"seed", 1}, {"train", {{"max_steps", 1}}}}));
}

TEST_CASE("environment overrides map into the config tree", "[cli]") {
    setenv("GLIOPIPE_SEED", "77", 1);
    setenv("GLIOPIPE_TRAIN__MAX_STEPS", "3", 1);
    setenv("GLIOPIPE_SYNTH__FORMAT", "raw", 1);
    const RunConfig cfg = RunConfig::from_json({{"seed", 1}}, true);
    unsetenv("GLIOPIPE_SEED");
    unsetenv("GLIOPIPE_TRAIN__MAX_STEPS");
    unsetenv("GLIOPIPE_SYNTH__FORMAT");
    CHECK(cfg.seed == 77);
    CHECK(cfg.raw.at("train").at("max_steps").get<int>() == 3);
    CHECK(cfg.raw.at("synth").at("format").get<std::string>() == "raw");
}

TEST_CASE("synth writes a deterministic dataset", "[cli]") {
    const auto base = testutil::temp_dir("cli_synth");
    const auto out1 = base / "run1";
    const auto out2 = base / "run2";
    cmd_synth(config_from(synth_json(out1, 3)));
    cmd_synth(config_from(synth_json(out2, 3)));

    const auto cases = load_dataset_index(out1 / "cases");
    REQUIRE(cases.cases.size() == 3);

    SECTION("re-run bytes are identical") {
        for (const auto& name :
             {"manifest.json", "case_000/meta.json", "case_000/t1.bin",
              "case_000/label.bin", "case_002/flair.bin"}) {
            CHECK(slurp(out1 / "cases" / name) == slurp(out2 / "cases" / name));
        }
    }

    SECTION("snapshot written") { CHECK(fs::exists(out1 / "synth_config.json")); }

    SECTION("zero cases is an empty manifest, exit success") {
        const auto out0 = base / "run0";
        cmd_synth(config_from(synth_json(out0, 0)));
        CHECK(load_dataset_index(out0 / "cases").cases.empty());
    }

    SECTION("invalid spec surfaces SpecError") {
        json bad = synth_json(base / "runbad", 1);
        bad["synth"] = {{"cases", {{{"case_id", "x"},
                                    {"ncr_semi", {9, 9, 9}},
                                    {"tc_semi", {4, 4, 4}},
                                    {"wt_semi", {6, 6, 6}}}}}};
        CHECK_THROWS_AS(cmd_synth(config_from(bad)), SpecError);
    }

    SECTION("nifti format datasets load back") {
        const auto outn = base / "run_nifti";
        json j = synth_json(outn, 2);
        j["synth"]["format"] = "nifti";
        cmd_synth(config_from(j));
        const auto loaded = load_dataset(outn / "cases");
        REQUIRE(loaded.size() == 2);
        CHECK(loaded[0].label.has_value());
        CHECK(loaded[0].volume.dims() == Dims3{16, 16, 16});
    }
}

TEST_CASE("train, infer, eval round trip on a tiny phantom set", "[cli]") {
    const auto base = testutil::temp_dir("cli_seg");
    cmd_synth(config_from(synth_json(base / "data", 2, 0.0)));
    const auto dataset = (base / "data" / "cases").string();

    json train_cfg = {{"seed", 5},
                      {"out_dir", (base / "run").string()},
                      {"network",
                       {{"base_filters", 4}, {"depth", 2}, {"attention", true}}},
                      {"train",
                       {{"dataset_dir", dataset},
                        {"max_steps", 3},
                        {"batch_size", 1},
                        {"crop", {8, 8, 8}}}}};
    cmd_train_seg(config_from(train_cfg));
    CHECK(fs::exists(base / "run" / "model.ckpt"));
    CHECK(fs::exists(base / "run" / "loss_history.csv"));

    SECTION("train with zero steps leaves a valid checkpoint and empty history") {
        json zero = train_cfg;
        zero["out_dir"] = (base / "run0").string();
        zero["train"]["max_steps"] = 0;
        cmd_train_seg(config_from(zero));
        auto [model, meta] = nn::Checkpoint::load((base / "run0" / "model.ckpt").string());
        CHECK(meta.loss_history.empty());
        CHECK(slurp(base / "run0" / "loss_history.csv") == "step,loss\n");
    }

    SECTION("training twice yields byte-identical outputs") {
        json again = train_cfg;
        again["out_dir"] = (base / "run_b").string();
        cmd_train_seg(config_from(again));
        CHECK(slurp(base / "run" / "model.ckpt") == slurp(base / "run_b" / "model.ckpt"));
        CHECK(slurp(base / "run" / "loss_history.csv") ==
              slurp(base / "run_b" / "loss_history.csv"));
    }

    SECTION("attention flag flips the arm") {
        json off = train_cfg;
        off["out_dir"] = (base / "run_off").string();
        cmd_train_seg(config_from(off), false);
        auto [model, meta] =
            nn::Checkpoint::load((base / "run_off" / "model.ckpt").string());
        CHECK(meta.config.attention == false);
    }

    json infer_cfg = {{"seed", 5},
                      {"out_dir", (base / "run").string()},
                      {"infer", {{"dataset_dir", dataset}}}};
    cmd_infer_seg(config_from(infer_cfg));
    CHECK(fs::exists(base / "run" / "pred" / "case_000" / "label.bin"));

    SECTION("checkpoint/config mismatch is rejected") {
        json bad = infer_cfg;
        bad["network"] = {{"base_filters", 8}, {"depth", 2}};
        CHECK_THROWS_AS(cmd_infer_seg(config_from(bad)), ConfigError);
    }

    SECTION("missing checkpoint raises IoError") {
        json nock = infer_cfg;
        nock["out_dir"] = (base / "elsewhere").string();
        CHECK_THROWS_AS(cmd_infer_seg(config_from(nock)), IoError);
    }

    json eval_cfg = {{"seed", 5},
                     {"out_dir", (base / "run").string()},
                     {"eval_seg",
                      {{"gt_dir", dataset},
                       {"pred_dir", (base / "run" / "pred").string()}}}};
    cmd_eval_seg(config_from(eval_cfg));
    const std::string cases_csv = slurp(base / "run" / "seg_cases.csv");
    CHECK(cases_csv.rfind("case_id,dice_et,dice_wt,dice_tc,", 0) == 0);

    SECTION("self-evaluation gives dice 1 everywhere") {
        json self = eval_cfg;
        self["out_dir"] = (base / "self").string();
        self["eval_seg"]["pred_dir"] = dataset;  // gt dirs carry labels too
        cmd_eval_seg(config_from(self));
        const std::string summary = slurp(base / "self" / "seg_summary.csv");
        CHECK(summary.find("Mean,1,1,1,0,0,0,1,1,1,1,1,1") != std::string::npos);
    }

    SECTION("two-arm comparison emits one row per arm") {
        json cmp = eval_cfg;
        cmp["out_dir"] = (base / "cmp").string();
        cmp["eval_seg"].erase("pred_dir");
        cmp["eval_seg"]["arms"] = {
            {{"name", "attention"}, {"pred_dir", (base / "run" / "pred").string()}},
            {{"name", "baseline"}, {"pred_dir", dataset}}};
        cmd_eval_seg(config_from(cmp));
        const std::string comparison = slurp(base / "cmp" / "seg_comparison.csv");
        CHECK(comparison.rfind("arm,dice_et,dice_wt,dice_tc\n", 0) == 0);
        CHECK(comparison.find("attention,") != std::string::npos);
        CHECK(comparison.find("baseline,1,1,1") != std::string::npos);
    }
}

TEST_CASE("feature extraction to survival training flows end to end", "[cli]") {
    const auto base = testutil::temp_dir("cli_features");
    json synth = synth_json(base / "data", 6, 0.02, {20, 20, 20});
    cmd_synth(config_from(synth));
    const auto dataset = (base / "data" / "cases").string();

    // one case (case_005) has no survival row on purpose
    write_survival(base / "survival.csv",
                   {"case_000,55.5,210", "case_001,61.2,335", "case_002,70.1,520",
                    "case_003,48.9,150", "case_004,66.0,610"});

    json feat_cfg = {{"seed", 9},
                     {"out_dir", (base / "run").string()},
                     {"features",
                      {{"dataset_dir", dataset},
                       {"survival_csv", (base / "survival.csv").string()}}}};
    cmd_extract_features(config_from(feat_cfg));

    const std::string features = slurp(base / "run" / "features.csv");
    CHECK(features.rfind("case_id,ncr_present,", 0) == 0);
    CHECK(features.find("case_005") == std::string::npos);  // excluded
    const std::string warnings = slurp(base / "run" / "extract_warnings.txt");
    CHECK(warnings.find("case_005") != std::string::npos);
    CHECK(fs::exists(base / "run" / "scaler.json"));

    SECTION("age passes through raw") {
        const FeatureTable table = read_features_csv(base / "run" / "features.csv");
        const auto it = std::find(table.names.begin(), table.names.end(), "age");
        REQUIRE(it != table.names.end());
        const auto col = static_cast<std::size_t>(it - table.names.begin());
        CHECK(table.rows[0][col] == 55.5);
    }

    SECTION("re-run is byte identical") {
        json again = feat_cfg;
        again["out_dir"] = (base / "run_b").string();
        cmd_extract_features(config_from(again));
        CHECK(slurp(base / "run" / "features.csv") ==
              slurp(base / "run_b" / "features.csv"));
        CHECK(slurp(base / "run" / "scaler.json") == slurp(base / "run_b" / "scaler.json"));
    }

    SECTION("resection column is picked up when present") {
        write_survival(base / "survival_r.csv",
                       {"case_000,55.5,210,GTR", "case_001,61.2,335,STR",
                        "case_002,70.1,520,NA", "case_003,48.9,150,GTR",
                        "case_004,66.0,610,GTR"},
                       true);
        json rcfg = feat_cfg;
        rcfg["out_dir"] = (base / "run_r").string();
        rcfg["features"]["survival_csv"] = (base / "survival_r.csv").string();
        cmd_extract_features(config_from(rcfg));
        const FeatureTable table = read_features_csv(base / "run_r" / "features.csv");
        CHECK(std::find(table.names.begin(), table.names.end(), "resection_gtr") !=
              table.names.end());
    }

    json os_cfg = {{"seed", 13},
                   {"out_dir", (base / "os").string()},
                   {"survival",
                    {{"features_csv", (base / "run" / "features.csv").string()},
                     {"kinds", {"gbt", "rf"}},
                     {"use_rfe", false},
                     {"folds", 2},
                     {"gbt", {{"n_rounds", 40}}},
                     {"rf", {{"n_trees", 25}}}}}};
    cmd_train_os(config_from(os_cfg));
    CHECK(fs::exists(base / "os" / "models" / "gbt.json"));
    CHECK(fs::exists(base / "os" / "models" / "gbt_importance.csv"));
    CHECK(fs::exists(base / "os" / "models" / "rf.json"));

    cmd_eval_os(config_from(os_cfg));
    const std::string results = slurp(base / "os" / "os_results.csv");
    CHECK(results.rfind("model,accuracy,mse,median_se,std_se,spearman_r\n", 0) == 0);
    CHECK(results.find("gbt,") != std::string::npos);
    CHECK(results.find("rf,") != std::string::npos);
    CHECK(fs::exists(base / "os" / "os_predictions" / "predictions_gbt.csv"));

    SECTION("eval-os re-run is byte identical") {
        json again = os_cfg;
        again["out_dir"] = (base / "os_b").string();
        cmd_eval_os(config_from(again));
        CHECK(slurp(base / "os" / "os_results.csv") ==
              slurp(base / "os_b" / "os_results.csv"));
        CHECK(slurp(base / "os" / "os_predictions" / "predictions_gbt.csv") ==
              slurp(base / "os_b" / "os_predictions" / "predictions_gbt.csv"));
    }

    SECTION("all four kinds produce four result rows in order") {
        json four = os_cfg;
        four["out_dir"] = (base / "os4").string();
        four["survival"]["kinds"] = {"gbt", "mlp", "rf", "svr"};
        four["survival"]["mlp"] = {{"epochs", 60}};
        four["survival"]["svr"] = {{"max_sweeps", 200}};
        cmd_eval_os(config_from(four));
        const auto lines = read_lines((base / "os4" / "os_results.csv").string());
        REQUIRE(lines.size() == 5);
        CHECK(lines[1].rfind("gbt,", 0) == 0);
        CHECK(lines[2].rfind("mlp,", 0) == 0);
        CHECK(lines[3].rfind("rf,", 0) == 0);
        CHECK(lines[4].rfind("svr,", 0) == 0);
    }

    SECTION("fewer rows than folds raises DataError") {
        json tiny = os_cfg;
        tiny["out_dir"] = (base / "os_tiny").string();
        tiny["survival"]["folds"] = 10;
        CHECK_THROWS_AS(cmd_eval_os(config_from(tiny)), DataError);
    }
}

TEST_CASE("report emits Bland-Altman and scatter CSVs", "[cli]") {
    const auto base = testutil::temp_dir("cli_report");
    write_survival(base / "truth.csv", {"a,60,400", "b,55,320"});

    SECTION("constant +10 bias: mean_diff 10, sd 0") {
        write_text_file((base / "pred.csv").string(),
                        "case_id,predicted_days,bucket\na,410,mid\nb,330,mid\n");
        json cfg = {{"seed", 1},
                    {"out_dir", (base / "r1").string()},
                    {"report",
                     {{"predictions_csv", (base / "pred.csv").string()},
                      {"survival_csv", (base / "truth.csv").string()}}}};
        cmd_report(config_from(cfg));
        const std::string ba = slurp(base / "r1" / "bland_altman.csv");
        CHECK(ba.find("mean_diff,,,10\n") != std::string::npos);
        CHECK(ba.find("sd_diff,,,0\n") != std::string::npos);
        const std::string scatter = slurp(base / "r1" / "scatter.csv");
        CHECK(scatter.find("a,400,410") != std::string::npos);
    }

    SECTION("hand-computed symmetric example") {
        write_survival(base / "truth2.csv", {"a,60,400", "b,55,320"});
        write_text_file((base / "pred2.csv").string(),
                        "case_id,predicted_days\na,420\nb,300\n");
        json cfg = {{"seed", 1},
                    {"out_dir", (base / "r2").string()},
                    {"report",
                     {{"predictions_csv", (base / "pred2.csv").string()},
                      {"survival_csv", (base / "truth2.csv").string()}}}};
        cmd_report(config_from(cfg));
        const std::string ba = slurp(base / "r2" / "bland_altman.csv");
        CHECK(ba.find("mean_diff,,,0\n") != std::string::npos);
        CHECK(ba.find("sd_diff,,,20\n") != std::string::npos);
        CHECK(ba.find("case,a,410,20") != std::string::npos);
        CHECK(ba.find("case,b,310,-20") != std::string::npos);
    }

    SECTION("empty prediction set raises DataError") {
        write_text_file((base / "empty.csv").string(), "case_id,predicted_days\n");
        json cfg = {{"seed", 1},
                    {"out_dir", (base / "r3").string()},
                    {"report",
                     {{"predictions_csv", (base / "empty.csv").string()},
                      {"survival_csv", (base / "truth.csv").string()}}}};
        CHECK_THROWS_AS(cmd_report(config_from(cfg)), DataError);
    }
}
