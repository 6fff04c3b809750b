#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lenspot/annotations.hpp"
#include "lenspot/matchcost.hpp"
#include "lenspot/metrics.hpp"

namespace lenspot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitInfeasible = 4;
inline constexpr int kExitMissingLexicon = 5;

struct RunConfig {
    std::string dataset_path;
    std::string format{"icdar-dir"};
    int n_max{25};
    double ratio_cap{20.0};
    int map_width{224};
    int map_height{224};
    match::CostWeights weights;
    double iou_threshold{0.5};
    int iou_resolution{128};
    std::string lexicon_path;
    std::string out_dir{"."};
    int jobs{1};
    bool case_sensitive{false};
};

RunConfig load_config(const std::filesystem::path& path);

// Per-image prediction records, one JSON object per line.
struct PredictionRecord {
    geom::Polygon polygon;
    double score{0.0};
    std::optional<std::string> text;
    std::optional<match::BoxRect> box;
    std::optional<match::MaskGrid> mask;
    std::optional<std::array<double, 2>> prior;
    std::vector<double> step_probs;
};

struct ImagePredictions {
    std::string image_id;
    std::vector<PredictionRecord> predictions;
};

std::vector<ImagePredictions> load_predictions(const std::filesystem::path& path);
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

int cmd_stats(const RunConfig& config);
int cmd_labels(const RunConfig& config, const std::string& kind);
int cmd_match(const RunConfig& config, const std::string& predictions_path);
int cmd_eval(const RunConfig& config, const std::string& predictions_path,
             const std::string& mode);

// Maps an in-flight exception to the documented exit code and logs it.
int exit_code_for_current_exception();

void log_message(const std::string& level, const std::string& message);

}  // namespace lenspot::cli
