#include "lenspot/matchcost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lenspot::match {

namespace {

double clamp_prob(double p) {
    return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

double box_area(const BoxRect& b) {
    return (b.x2 - b.x1) * (b.y2 - b.y1);
}

double intersection_area(const BoxRect& a, const BoxRect& b) {
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

void check_shapes(const MaskGrid& a, const MaskGrid& b) {
    if (a.width != b.width || a.height != b.height) {
        throw ShapeMismatch("mask grids differ in shape: " + std::to_string(a.width) +
                            "x" + std::to_string(a.height) + " vs " +
                            std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

}  // namespace

double focal_loss(double p, bool matched, double alpha, double gamma) {
    const double q = clamp_prob(p);
    if (matched) {
        return -alpha * std::pow(1.0 - q, gamma) * std::log(q);
    }
    return -(1.0 - alpha) * std::pow(q, gamma) * std::log(1.0 - q);
}

double box_iou(const BoxRect& a, const BoxRect& b) {
    const double inter = intersection_area(a, b);
    const double uni = box_area(a) + box_area(b) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double giou(const BoxRect& a, const BoxRect& b) {
    const double inter = intersection_area(a, b);
    const double uni = box_area(a) + box_area(b) - inter;
    const BoxRect hull{std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
                       std::max(a.y2, b.y2)};
    const double hull_area = box_area(hull);
    const double iou = uni > 0.0 ? inter / uni : 0.0;
    if (hull_area <= 0.0) {
        return iou;
    }
    return iou - (hull_area - uni) / hull_area;
}

double l1_box_loss(const BoxRect& a, const BoxRect& b) {
    return std::abs(a.x1 - b.x1) + std::abs(a.y1 - b.y1) + std::abs(a.x2 - b.x2) +
           std::abs(a.y2 - b.y2);
}

// Squared-denominator soft dice: identical to the plain form on binary
// grids, but 0 for any pair of identical soft grids (so equal {0,0.5,1}
// segmentation maps cost nothing).
double dice_loss(const MaskGrid& a, const MaskGrid& b) {
    check_shapes(a, b);
    double inter = 0.0;
    double size_a = 0.0;
    double size_b = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        inter += a.values[i] * b.values[i];
        size_a += a.values[i] * a.values[i];
        size_b += b.values[i] * b.values[i];
    }
    if (size_a + size_b <= 0.0) {
        return 0.0;
    }
    return 1.0 - 2.0 * inter / (size_a + size_b);
}

double l2_mask_loss(const MaskGrid& a, const MaskGrid& b) {
    check_shapes(a, b);
    if (a.values.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.values.size());
}

namespace {

double smooth_l1(double x, double beta) {
    const double ax = std::abs(x);
    return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

}  // namespace

double smooth_l1_prior_loss(const std::array<double, 2>& pred,
                            const std::array<double, 2>& gt, double beta) {
    return smooth_l1(pred[0] - gt[0], beta) + smooth_l1(pred[1] - gt[1], beta);
}

CostBreakdown pair_cost(const Prediction& p, const GroundTruthTarget& g,
                        const CostWeights& w) {
    CostBreakdown c;
    c.cls = focal_loss(p.class_prob, true, w.focal_alpha, w.focal_gamma);
    c.l1 = l1_box_loss(p.box, g.box);
    c.giou_loss = 1.0 - giou(p.box, g.box);
    c.l2 = l2_mask_loss(p.mask, g.mask);
    c.dice = dice_loss(p.mask, g.mask);
    c.prior = smooth_l1_prior_loss(p.prior, g.prior, w.smooth_l1_beta);
    c.total = w.cls * c.cls + w.l1 * c.l1 + w.giou * c.giou_loss + w.l2 * c.l2 +
              w.dice * c.dice + w.prior * c.prior;
    return c;
}

namespace {

// Kuhn-Munkres with potentials on a Y x Q matrix (rows = ground truths,
// Y <= Q). Returns the column assigned to each row plus the dual values.
struct HungarianResult {
    std::vector<int> row_to_col;
    std::vector<double> u, v;
    double total{0.0};
};

HungarianResult solve_rectangular(const std::vector<std::vector<double>>& cost) {
    const int rows = static_cast<int>(cost.size());
    const int cols = rows > 0 ? static_cast<int>(cost[0].size()) : 0;
    const double kInf = std::numeric_limits<double>::infinity();

    std::vector<double> u(rows + 1, 0.0);
    std::vector<double> v(cols + 1, 0.0);
    std::vector<int> match(cols + 1, 0);  // col -> row (1-based, 0 = free)
    std::vector<int> way(cols + 1, 0);

    for (int i = 1; i <= rows; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(cols + 1, kInf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= cols; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    HungarianResult result;
    result.row_to_col.assign(rows, -1);
    for (int j = 1; j <= cols; ++j) {
        if (match[j] != 0) {
            result.row_to_col[match[j] - 1] = j - 1;
        }
    }
    for (int i = 0; i < rows; ++i) {
        result.total += cost[i][result.row_to_col[i]];
    }
    result.u = std::move(u);
    result.v = std::move(v);
    return result;
}

// Optimal cost of assigning the listed rows to the listed columns.
double subproblem_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<int>& row_ids, const std::vector<int>& col_ids) {
    if (row_ids.empty()) {
        return 0.0;
    }
    std::vector<std::vector<double>> sub(row_ids.size(),
                                         std::vector<double>(col_ids.size()));
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        for (std::size_t c = 0; c < col_ids.size(); ++c) {
            sub[r][c] = cost[static_cast<std::size_t>(row_ids[r])]
                            [static_cast<std::size_t>(col_ids[c])];
        }
    }
    return solve_rectangular(sub).total;
}

}  // namespace

Assignment hungarian_assign(const std::vector<std::vector<double>>& cost_pred_by_gt) {
    const int num_preds = static_cast<int>(cost_pred_by_gt.size());
    const int num_gts = num_preds > 0 ? static_cast<int>(cost_pred_by_gt[0].size()) : 0;
    if (num_preds < num_gts) {
        throw InfeasibleMatrix("need at least as many predictions as ground truths (" +
                               std::to_string(num_preds) + " < " +
                               std::to_string(num_gts) + ")");
    }
    for (const auto& row : cost_pred_by_gt) {
        if (static_cast<int>(row.size()) != num_gts) {
            throw InfeasibleMatrix("ragged cost matrix");
        }
        for (double c : row) {
            if (!std::isfinite(c)) {
                throw InfeasibleMatrix("non-finite cost entry");
            }
        }
    }

    Assignment out;
    if (num_gts == 0) {
        return out;
    }

    // Transpose to gt-major for the solver.
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(num_gts),
                                          std::vector<double>(num_preds));
    for (int p = 0; p < num_preds; ++p) {
        for (int g = 0; g < num_gts; ++g) {
            cost[g][p] = cost_pred_by_gt[p][g];
        }
    }

    const HungarianResult base = solve_rectangular(cost);
    const double tol = 1e-9 * (1.0 + std::abs(base.total));

    // Pin the lexicographically smallest optimal pair list: walk the ground
    // truths in order and keep the lowest prediction index that still
    // admits an optimal completion. Dual slack prunes most candidates.
    std::vector<char> pred_used(static_cast<std::size_t>(num_preds), 0);
    double fixed_cost = 0.0;
    for (int g = 0; g < num_gts; ++g) {
        std::vector<int> remaining_gts;
        for (int g2 = g + 1; g2 < num_gts; ++g2) {
            remaining_gts.push_back(g2);
        }
        int chosen = -1;
        for (int p = 0; p < num_preds && chosen < 0; ++p) {
            if (pred_used[p]) {
                continue;
            }
            const double slack = cost[g][p] - base.u[g + 1] - base.v[p + 1];
            if (slack > tol) {
                continue;
            }
            std::vector<int> remaining_preds;
            for (int p2 = 0; p2 < num_preds; ++p2) {
                if (!pred_used[p2] && p2 != p) {
                    remaining_preds.push_back(p2);
                }
            }
            const double completion = subproblem_cost(cost, remaining_gts, remaining_preds);
            if (fixed_cost + cost[g][p] + completion <= base.total + tol) {
                chosen = p;
            }
        }
        if (chosen < 0) {
            // Dual-slack pruning was too tight; rescan without it and take
            // the best completion among unused predictions.
            double best = std::numeric_limits<double>::infinity();
            for (int p = 0; p < num_preds; ++p) {
                if (pred_used[p]) {
                    continue;
                }
                std::vector<int> remaining_preds;
                for (int p2 = 0; p2 < num_preds; ++p2) {
                    if (!pred_used[p2] && p2 != p) {
                        remaining_preds.push_back(p2);
                    }
                }
                const double candidate =
                    cost[g][p] + subproblem_cost(cost, remaining_gts, remaining_preds);
                if (candidate < best - tol) {
                    best = candidate;
                    chosen = p;
                }
            }
        }
        pred_used[chosen] = 1;
        fixed_cost += cost[g][chosen];
        out.pairs.emplace_back(g, chosen);
        out.pair_costs.push_back(cost[g][chosen]);
    }
    out.total_cost = fixed_cost;
    return out;
}

MatchOutcome match_predictions(const std::vector<Prediction>& preds,
                               const std::vector<GroundTruthTarget>& gts,
                               const CostWeights& w) {
    std::vector<std::vector<double>> cost(preds.size(), std::vector<double>(gts.size()));
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gts.size(); ++g) {
            cost[p][g] = pair_cost(preds[p], gts[g], w).total;
        }
    }
    MatchOutcome outcome;
    outcome.assignment = hungarian_assign(cost);
    for (const auto& [g, p] : outcome.assignment.pairs) {
        outcome.breakdowns.push_back(pair_cost(preds[static_cast<std::size_t>(p)],
                                               gts[static_cast<std::size_t>(g)], w));
    }
    return outcome;
}

DetectionLoss detection_loss(const std::vector<Prediction>& preds,
                             const std::vector<GroundTruthTarget>& gts,
                             const Assignment& assignment, const CostWeights& w,
                             const MaskGrid& pred_map, const MaskGrid& gt_map) {
    const std::size_t num_gts = gts.size();
    std::vector<int> pred_to_gt(preds.size(), -1);
    for (const auto& [g, p] : assignment.pairs) {
        pred_to_gt[static_cast<std::size_t>(p)] = g;
    }

    DetectionLoss loss;
    double cls_sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        const int g = pred_to_gt[p];
        if (g >= 0) {
            cls_sum += focal_loss(preds[p].class_prob, true, w.focal_alpha, w.focal_gamma);
            const GroundTruthTarget& gt = gts[static_cast<std::size_t>(g)];
            loss.l1 += l1_box_loss(preds[p].box, gt.box);
            loss.giou += 1.0 - giou(preds[p].box, gt.box);
            loss.l2 += l2_mask_loss(preds[p].mask, gt.mask);
            loss.dice += dice_loss(preds[p].mask, gt.mask);
            loss.prior += smooth_l1_prior_loss(preds[p].prior, gt.prior, w.smooth_l1_beta);
            ++matched;
        } else {
            cls_sum += focal_loss(preds[p].class_prob, false, w.focal_alpha, w.focal_gamma);
        }
    }
    loss.cls = cls_sum / static_cast<double>(std::max<std::size_t>(num_gts, 1));
    if (matched > 0) {
        const double inv = 1.0 / static_cast<double>(matched);
        loss.l1 *= inv;
        loss.giou *= inv;
        loss.l2 *= inv;
        loss.dice *= inv;
        loss.prior *= inv;
    }
    loss.map = dice_loss(pred_map, gt_map);
    loss.total = w.cls * loss.cls + w.l1 * loss.l1 + w.giou * loss.giou +
                 w.l2 * loss.l2 + w.dice * loss.dice + w.prior * loss.prior +
                 w.map * loss.map;
    return loss;
}

double recognition_loss(const std::vector<double>& step_probs) {
    if (step_probs.empty()) {
        throw EmptySequence("recognition loss needs at least one step probability");
    }
    double sum = 0.0;
    for (double p : step_probs) {
        sum += std::log(std::clamp(p, kProbEps, 1.0));
    }
    return -sum / static_cast<double>(step_probs.size());
}

}  // namespace lenspot::match
