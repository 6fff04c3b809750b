#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lenspot/annotations.hpp"

namespace lenspot::metrics {

struct DetPrediction {
    std::string image_id;
    geom::Polygon polygon;
    double score{0.0};
    std::optional<std::string> transcript;
};

enum class LexiconMode { None, Full };

struct EvalConfig {
    double iou_threshold{0.5};
    LexiconMode lexicon_mode{LexiconMode::None};
    std::vector<std::string> lexicon;
    bool case_sensitive{false};
    int iou_resolution{128};
};

// Greedy score-ordered matching of one image's predictions to its
// non-ignored ground truths. -1 = false positive, -2 = discarded
// (only overlapped an ignored region).
struct ImageMatchSet {
    std::vector<int> pred_to_gt;      // per prediction, gt index into non-ignored list
    std::vector<char> gt_matched;     // per non-ignored gt
    std::vector<int> gt_char_count;   // per non-ignored gt
    long tp{0}, fp{0}, fn{0};
};

ImageMatchSet match_detections(const std::vector<DetPrediction>& preds,
                               const ann::ImageAnnotation& image, double iou_threshold,
                               int iou_resolution);

struct PRF {
    double precision{0.0};
    double recall{0.0};
    double fscore{0.0};
};

PRF detection_prf(long tp, long fp, long fn);

int edit_distance(const std::string& a, const std::string& b);

// Minimum-edit-distance lexicon word; distance ties break to the
// lexicographically smallest entry.
std::string lexicon_correct(const std::string& word,
                            const std::vector<std::string>& lexicon,
                            bool case_sensitive);

// short (<4), regular (4..10), long (>10)
struct BucketRecall {
    double short_recall{0.0};
    double regular_recall{0.0};
    double long_recall{0.0};
};

BucketRecall length_bucket_recall(const std::vector<ImageMatchSet>& matches);

struct ImageEvalResult {
    long tp{0}, fp{0}, fn{0};
    long e2e_tp{0}, e2e_fp{0}, e2e_fn{0};
    std::array<long, 3> bucket_total{0, 0, 0};    // short, regular, long
    std::array<long, 3> bucket_matched{0, 0, 0};
};

ImageEvalResult evaluate_image(const ann::ImageAnnotation& image,
                               const std::vector<DetPrediction>& preds,
                               const EvalConfig& config, bool end_to_end);

struct EvalReport {
    PRF detection;
    std::optional<PRF> e2e;
    BucketRecall bucket_recall;
    long tp{0}, fp{0}, fn{0};
    long e2e_tp{0}, e2e_fp{0}, e2e_fn{0};
};

EvalReport aggregate(const std::vector<ImageEvalResult>& results, bool end_to_end);

// Whole-dataset convenience wrapper (single-threaded; the CLI
// parallelizes over images itself).
EvalReport evaluate(const ann::Dataset& ds, const std::vector<DetPrediction>& preds,
                    const EvalConfig& config, bool end_to_end);

}  // namespace lenspot::metrics
