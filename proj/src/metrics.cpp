#include "lenspot/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <numeric>

namespace lenspot::metrics {

namespace {

std::vector<std::uint32_t> decode_utf8(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::uint32_t cp = 0;
    int pending = 0;
    for (unsigned char c : s) {
        if ((c & 0x80) == 0) {
            out.push_back(c);
            pending = 0;
        } else if ((c & 0xC0) == 0xC0) {
            pending = (c & 0xE0) == 0xC0 ? 1 : (c & 0xF0) == 0xE0 ? 2 : 3;
            cp = c;
        } else if (pending > 0) {
            cp = (cp << 6) | (c & 0x3F);
            if (--pending == 0) {
                out.push_back(cp);
            }
        } else {
            out.push_back(c);  // stray continuation byte, keep as-is
        }
    }
    return out;
}

std::string fold_case(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool transcripts_match(const std::string& pred, const std::string& gt,
                       bool case_sensitive) {
    if (case_sensitive) {
        return pred == gt;
    }
    return fold_case(pred) == fold_case(gt);
}

int bucket_of(int char_count) {
    if (char_count < 4) return 0;
    if (char_count <= 10) return 1;
    return 2;
}

}  // namespace

ImageMatchSet match_detections(const std::vector<DetPrediction>& preds,
                               const ann::ImageAnnotation& image, double iou_threshold,
                               int iou_resolution) {
    std::vector<const geom::Polygon*> gt_polys;
    std::vector<const geom::Polygon*> ignored_polys;
    ImageMatchSet result;
    for (const ann::TextInstance& inst : image.instances) {
        if (inst.transcription.ignore) {
            ignored_polys.push_back(&inst.polygon);
        } else {
            gt_polys.push_back(&inst.polygon);
            result.gt_char_count.push_back(ann::char_count(inst.transcription));
        }
    }
    result.gt_matched.assign(gt_polys.size(), 0);
    result.pred_to_gt.assign(preds.size(), -1);

    // Descending score, stable so equal scores keep input order.
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].score > preds[b].score;
    });

    for (std::size_t idx : order) {
        const geom::Polygon& poly = preds[idx].polygon;
        double best_iou = 0.0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gt_polys.size(); ++g) {
            if (result.gt_matched[g]) {
                continue;
            }
            const double iou = geom::polygon_iou(poly, *gt_polys[g], iou_resolution);
            if (iou >= iou_threshold && iou > best_iou) {
                best_iou = iou;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            result.gt_matched[static_cast<std::size_t>(best_gt)] = 1;
            result.pred_to_gt[idx] = best_gt;
            ++result.tp;
            continue;
        }
        bool in_ignored = false;
        for (const geom::Polygon* ign : ignored_polys) {
            if (geom::polygon_iou(poly, *ign, iou_resolution) >= iou_threshold) {
                in_ignored = true;
                break;
            }
        }
        if (in_ignored) {
            result.pred_to_gt[idx] = -2;
        } else {
            ++result.fp;
        }
    }
    result.fn = static_cast<long>(gt_polys.size()) - result.tp;
    return result;
}

PRF detection_prf(long tp, long fp, long fn) {
    PRF prf;
    prf.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    prf.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double denom = prf.precision + prf.recall;
    prf.fscore = denom > 0.0 ? 2.0 * prf.precision * prf.recall / denom : 0.0;
    return prf;
}

int edit_distance(const std::string& a, const std::string& b) {
    const std::vector<std::uint32_t> ca = decode_utf8(a);
    const std::vector<std::uint32_t> cb = decode_utf8(b);
    const std::size_t n = ca.size();
    const std::size_t m = cb.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::string lexicon_correct(const std::string& word,
                            const std::vector<std::string>& lexicon,
                            bool case_sensitive) {
    if (lexicon.empty()) {
        throw MissingLexicon("lexicon correction requested with an empty lexicon");
    }
    const std::string key = case_sensitive ? word : fold_case(word);
    int best_dist = -1;
    const std::string* best = nullptr;
    for (const std::string& entry : lexicon) {
        const int d = edit_distance(key, case_sensitive ? entry : fold_case(entry));
        if (best == nullptr || d < best_dist || (d == best_dist && entry < *best)) {
            best_dist = d;
            best = &entry;
        }
    }
    return *best;
}

BucketRecall length_bucket_recall(const std::vector<ImageMatchSet>& matches) {
    std::array<long, 3> total{0, 0, 0};
    std::array<long, 3> matched{0, 0, 0};
    for (const ImageMatchSet& m : matches) {
        for (std::size_t g = 0; g < m.gt_char_count.size(); ++g) {
            const int b = bucket_of(m.gt_char_count[g]);
            ++total[static_cast<std::size_t>(b)];
            if (m.gt_matched[g]) {
                ++matched[static_cast<std::size_t>(b)];
            }
        }
    }
    BucketRecall r;
    r.short_recall = total[0] > 0 ? static_cast<double>(matched[0]) / total[0] : 0.0;
    r.regular_recall = total[1] > 0 ? static_cast<double>(matched[1]) / total[1] : 0.0;
    r.long_recall = total[2] > 0 ? static_cast<double>(matched[2]) / total[2] : 0.0;
    return r;
}

ImageEvalResult evaluate_image(const ann::ImageAnnotation& image,
                               const std::vector<DetPrediction>& preds,
                               const EvalConfig& config, bool end_to_end) {
    if (end_to_end && config.lexicon_mode == LexiconMode::Full && config.lexicon.empty()) {
        throw MissingLexicon("Full lexicon mode requires a non-empty lexicon");
    }
    const ImageMatchSet match =
        match_detections(preds, image, config.iou_threshold, config.iou_resolution);

    ImageEvalResult result;
    result.tp = match.tp;
    result.fp = match.fp;
    result.fn = match.fn;
    for (std::size_t g = 0; g < match.gt_char_count.size(); ++g) {
        const int b = bucket_of(match.gt_char_count[g]);
        ++result.bucket_total[static_cast<std::size_t>(b)];
        if (match.gt_matched[g]) {
            ++result.bucket_matched[static_cast<std::size_t>(b)];
        }
    }

    if (end_to_end) {
        std::vector<std::string> gt_texts;
        for (const ann::TextInstance& inst : image.instances) {
            if (!inst.transcription.ignore) {
                gt_texts.push_back(inst.transcription.text);
            }
        }
        for (std::size_t p = 0; p < preds.size(); ++p) {
            const int g = match.pred_to_gt[p];
            if (g == -2) {
                continue;  // ignored region, neither TP nor FP
            }
            if (g < 0) {
                ++result.e2e_fp;
                continue;
            }
            std::string text = preds[p].transcript.value_or("");
            if (config.lexicon_mode == LexiconMode::Full) {
                text = lexicon_correct(text, config.lexicon, config.case_sensitive);
            }
            if (transcripts_match(text, gt_texts[static_cast<std::size_t>(g)],
                                  config.case_sensitive)) {
                ++result.e2e_tp;
            } else {
                ++result.e2e_fp;
            }
        }
        result.e2e_fn = static_cast<long>(gt_texts.size()) - result.e2e_tp;
    }
    return result;
}

EvalReport aggregate(const std::vector<ImageEvalResult>& results, bool end_to_end) {
    EvalReport report;
    std::array<long, 3> total{0, 0, 0};
    std::array<long, 3> matched{0, 0, 0};
    for (const ImageEvalResult& r : results) {
        report.tp += r.tp;
        report.fp += r.fp;
        report.fn += r.fn;
        report.e2e_tp += r.e2e_tp;
        report.e2e_fp += r.e2e_fp;
        report.e2e_fn += r.e2e_fn;
        for (std::size_t b = 0; b < 3; ++b) {
            total[b] += r.bucket_total[b];
            matched[b] += r.bucket_matched[b];
        }
    }
    report.detection = detection_prf(report.tp, report.fp, report.fn);
    if (end_to_end) {
        report.e2e = detection_prf(report.e2e_tp, report.e2e_fp, report.e2e_fn);
    }
    report.bucket_recall.short_recall =
        total[0] > 0 ? static_cast<double>(matched[0]) / total[0] : 0.0;
    report.bucket_recall.regular_recall =
        total[1] > 0 ? static_cast<double>(matched[1]) / total[1] : 0.0;
    report.bucket_recall.long_recall =
        total[2] > 0 ? static_cast<double>(matched[2]) / total[2] : 0.0;
    return report;
}

EvalReport evaluate(const ann::Dataset& ds, const std::vector<DetPrediction>& preds,
                    const EvalConfig& config, bool end_to_end) {
    std::map<std::string, std::vector<DetPrediction>> by_image;
    for (const DetPrediction& p : preds) {
        by_image[p.image_id].push_back(p);
    }
    static const std::vector<DetPrediction> kNone;
    std::vector<ImageEvalResult> results;
    results.reserve(ds.images.size());
    for (const ann::ImageAnnotation& image : ds.images) {
        const auto it = by_image.find(image.image_id);
        const auto& image_preds = it != by_image.end() ? it->second : kNone;
        results.push_back(evaluate_image(image, image_preds, config, end_to_end));
        if (it != by_image.end()) {
            by_image.erase(it);
        }
    }
    // Predictions for unknown image ids count as false positives.
    for (const auto& [id, orphan] : by_image) {
        ImageEvalResult r;
        r.fp = static_cast<long>(orphan.size());
        if (end_to_end) {
            r.e2e_fp = static_cast<long>(orphan.size());
        }
        results.push_back(r);
    }
    return aggregate(results, end_to_end);
}

}  // namespace lenspot::metrics
