#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "gliopipe/cli/commands.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<bool> deterministic;
};

gliopipe::cli::RunConfig resolve(const GlobalArgs& args) {
    auto cfg = gliopipe::cli::RunConfig::load(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.raw["seed"] = *args.seed;
    }
    if (args.out_dir) {
        cfg.out_dir = *args.out_dir;
        cfg.raw["out_dir"] = *args.out_dir;
    }
    if (args.deterministic) {
        cfg.deterministic = *args.deterministic;
        cfg.raw["deterministic"] = *args.deterministic;
    }
    return cfg;
}

void add_globals(CLI::App* cmd, GlobalArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_flag("--deterministic,!--no-deterministic", args.deterministic,
                  "force single-threaded reproducible numerics");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brain tumor segmentation and survival prediction pipeline"};
    app.require_subcommand(1);

    GlobalArgs args;
    std::string attention_arm = "";

    auto* synth = app.add_subcommand("synth", "generate a phantom dataset");
    add_globals(synth, args);
    auto* train_seg = app.add_subcommand("train-seg", "train the segmentation network");
    add_globals(train_seg, args);
    train_seg->add_option("--attention", attention_arm,
                          "override network.attention (on|off)")
        ->check(CLI::IsMember({"on", "off", ""}));
    auto* infer_seg = app.add_subcommand("infer-seg", "segment volumes with a checkpoint");
    add_globals(infer_seg, args);
    auto* eval_seg = app.add_subcommand("eval-seg", "score predictions against labels");
    add_globals(eval_seg, args);
    auto* extract = app.add_subcommand("extract-features", "radiomic feature extraction");
    add_globals(extract, args);
    auto* train_os = app.add_subcommand("train-os", "fit survival regressors");
    add_globals(train_os, args);
    auto* eval_os = app.add_subcommand("eval-os", "cross-validated survival evaluation");
    add_globals(eval_os, args);
    auto* report = app.add_subcommand("report", "agreement and scatter reports");
    add_globals(report, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = resolve(args);
        if (synth->parsed()) {
            gliopipe::cli::cmd_synth(cfg);
        } else if (train_seg->parsed()) {
            std::optional<bool> attention;
            if (attention_arm == "on") attention = true;
            if (attention_arm == "off") attention = false;
            gliopipe::cli::cmd_train_seg(cfg, attention);
        } else if (infer_seg->parsed()) {
            gliopipe::cli::cmd_infer_seg(cfg);
        } else if (eval_seg->parsed()) {
            gliopipe::cli::cmd_eval_seg(cfg);
        } else if (extract->parsed()) {
            gliopipe::cli::cmd_extract_features(cfg);
        } else if (train_os->parsed()) {
            gliopipe::cli::cmd_train_os(cfg);
        } else if (eval_os->parsed()) {
            gliopipe::cli::cmd_eval_os(cfg);
        } else if (report->parsed()) {
            gliopipe::cli::cmd_report(cfg);
        }
    } catch (const gliopipe::Error& e) {
        std::fprintf(stderr, "error %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error [Unexpected] %s\n", e.what());
        return 1;
    }
    return 0;
}
