#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "lenspot/errors.hpp"

namespace lenspot::match {

// Normalized image coordinates, x1 < x2 and y1 < y2.
struct BoxRect {
    double x1{0.0}, y1{0.0}, x2{0.0}, y2{0.0};
};

inline constexpr int kDefaultMaskSize = 28;

// Rectangular soft mask, values in [0, 1], row-major.
struct MaskGrid {
    int width{0};
    int height{0};
    std::vector<double> values;

    static MaskGrid zeros(int width, int height) {
        return MaskGrid{width, height,
                        std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)};
    }
    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct Prediction {
    double class_prob{0.0};
    BoxRect box;
    MaskGrid mask;
    std::array<double, 2> prior{0.0, 0.0};  // (ratio_norm, count_norm)
    std::string transcript;
    std::vector<double> step_probs;
};

struct GroundTruthTarget {
    BoxRect box;
    MaskGrid mask;
    std::array<double, 2> prior{0.0, 0.0};
    std::string transcript;
};

struct CostWeights {
    double cls{2.0};
    double prior{1.0};
    double map{2.0};
    double l1{5.0};
    double giou{2.0};
    double l2{2.0};
    double dice{2.0};
    double focal_alpha{0.25};
    double focal_gamma{2.0};
    double smooth_l1_beta{1.0};
};

inline constexpr double kProbEps = 1e-8;

double focal_loss(double p, bool matched, double alpha, double gamma);
double giou(const BoxRect& a, const BoxRect& b);
inline double giou_loss(const BoxRect& a, const BoxRect& b) { return 1.0 - giou(a, b); }
double box_iou(const BoxRect& a, const BoxRect& b);
double l1_box_loss(const BoxRect& a, const BoxRect& b);
double dice_loss(const MaskGrid& a, const MaskGrid& b);
double l2_mask_loss(const MaskGrid& a, const MaskGrid& b);
double smooth_l1_prior_loss(const std::array<double, 2>& pred,
                            const std::array<double, 2>& gt, double beta);

struct CostBreakdown {
    double cls{0.0};
    double l1{0.0};
    double giou_loss{0.0};
    double l2{0.0};
    double dice{0.0};
    double prior{0.0};
    double total{0.0};  // weighted sum; the image-global map term is not pairwise
};

CostBreakdown pair_cost(const Prediction& p, const GroundTruthTarget& g,
                        const CostWeights& w);

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (gt_index, pred_index), sorted by gt
    double total_cost{0.0};
    std::vector<double> pair_costs;  // aligned with pairs
};

// Minimum-cost one-to-one assignment of every ground truth to a distinct
// prediction. cost[pred][gt], Q >= Y required. Among cost-equal optima the
// pair list that is lexicographically smallest by (gt, pred) is returned.
Assignment hungarian_assign(const std::vector<std::vector<double>>& cost);

// Cost-matrix construction + assignment + per-pair breakdowns in one step.
struct MatchOutcome {
    Assignment assignment;
    std::vector<CostBreakdown> breakdowns;  // aligned with assignment.pairs
};
MatchOutcome match_predictions(const std::vector<Prediction>& preds,
                               const std::vector<GroundTruthTarget>& gts,
                               const CostWeights& w);

struct DetectionLoss {
    double cls{0.0};    // focal, all queries, normalized by Y
    double l1{0.0};     // matched means
    double giou{0.0};
    double l2{0.0};
    double dice{0.0};
    double prior{0.0};
    double map{0.0};    // once per image
    double total{0.0};
};

DetectionLoss detection_loss(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruthTarget>& gts,
                             const Assignment& assignment, const CostWeights& w,
                             const MaskGrid& pred_map, const MaskGrid& gt_map);

// Mean negative log-probability over a character sequence.
double recognition_loss(const std::vector<double>& step_probs);

}  // namespace lenspot::match
