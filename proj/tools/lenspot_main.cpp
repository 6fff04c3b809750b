#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lenspot/cli.hpp"

namespace cli = lenspot::cli;

namespace {

struct Flags {
    std::string config_path;
    std::string dataset;
    std::string format;
    std::string out;
    std::string lexicon;
    std::string map_size;
    double iou{-1.0};
    int jobs{0};
    int nmax{0};
    double ratio_cap{0.0};
};

void add_common_flags(CLI::App* app, Flags& flags) {
    app->add_option("--config", flags.config_path, "JSON run configuration");
    app->add_option("--dataset", flags.dataset, "Dataset path");
    app->add_option("--format", flags.format, "Dataset format: icdar-dir or jsonl");
    app->add_option("--out", flags.out, "Output directory");
    app->add_option("--iou", flags.iou, "IoU threshold for evaluation matching");
    app->add_option("--lexicon", flags.lexicon, "Lexicon word list (one per line)");
    app->add_option("--jobs", flags.jobs, "Worker pool size");
    app->add_option("--nmax", flags.nmax, "Maximum character count");
    app->add_option("--ratio-cap", flags.ratio_cap, "Aspect-ratio normalization cap");
    app->add_option("--map-size", flags.map_size, "Segmentation map size, WxH");
}

cli::RunConfig resolve_config(const CLI::App* app, const Flags& flags) {
    cli::RunConfig config;
    if (!flags.config_path.empty()) {
        config = cli::load_config(flags.config_path);
    }
    if (app->count("--dataset")) config.dataset_path = flags.dataset;
    if (app->count("--format")) config.format = flags.format;
    if (app->count("--out")) config.out_dir = flags.out;
    if (app->count("--iou")) config.iou_threshold = flags.iou;
    if (app->count("--lexicon")) config.lexicon_path = flags.lexicon;
    if (app->count("--jobs")) config.jobs = flags.jobs;
    if (app->count("--nmax")) config.n_max = flags.nmax;
    if (app->count("--ratio-cap")) config.ratio_cap = flags.ratio_cap;
    if (app->count("--map-size")) {
        const std::size_t x = flags.map_size.find('x');
        if (x == std::string::npos) {
            throw lenspot::ParseError("--map-size expects WxH, got '" + flags.map_size +
                                      "'");
        }
        config.map_width = std::stoi(flags.map_size.substr(0, x));
        config.map_height = std::stoi(flags.map_size.substr(x + 1));
    }
    if (config.jobs < 1 || config.n_max < 1 || config.ratio_cap <= 0.0 ||
        config.map_width < 8 || config.map_height < 8 || config.iou_threshold < 0.0 ||
        config.iou_threshold > 1.0) {
        throw lenspot::ValidationError("a flag value is out of range");
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Word-length-aware text spotting toolkit"};
    app.require_subcommand(1);

    Flags flags;
    std::string labels_kind;
    std::string eval_mode;
    std::string predictions_path;

    CLI::App* stats = app.add_subcommand("stats", "Dataset length/density histograms");
    add_common_flags(stats, flags);

    CLI::App* labels = app.add_subcommand("labels", "Generate supervision labels");
    labels->add_option("kind", labels_kind, "prior or segmap")->required();
    add_common_flags(labels, flags);

    CLI::App* match = app.add_subcommand("match", "Hungarian matching report");
    match->add_option("predictions", predictions_path, "Predictions JSONL")->required();
    add_common_flags(match, flags);

    CLI::App* eval = app.add_subcommand("eval", "Detection / end-to-end evaluation");
    eval->add_option("mode", eval_mode, "det or e2e")->required();
    eval->add_option("predictions", predictions_path, "Predictions JSONL")->required();
    add_common_flags(eval, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitParse;
    }

    try {
        if (stats->parsed()) {
            return cli::cmd_stats(resolve_config(stats, flags));
        }
        if (labels->parsed()) {
            return cli::cmd_labels(resolve_config(labels, flags), labels_kind);
        }
        if (match->parsed()) {
            return cli::cmd_match(resolve_config(match, flags), predictions_path);
        }
        if (eval->parsed()) {
            return cli::cmd_eval(resolve_config(eval, flags), predictions_path,
                                 eval_mode);
        }
    } catch (...) {
        return cli::exit_code_for_current_exception();
    }
    return cli::kExitOk;
}
