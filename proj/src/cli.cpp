#include "lenspot/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lenspot/labelgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lenspot::cli {

namespace {

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("LENSPOT_LOG");
        const std::string v = env ? env : "warn";
        if (v == "debug") return 0;
        if (v == "info") return 1;
        if (v == "warn") return 2;
        return 3;
    }();
    return level;
}

int level_of(const std::string& level) {
    if (level == "debug") return 0;
    if (level == "info") return 1;
    if (level == "warn") return 2;
    return 3;
}

// Bounded worker pool; results land in caller-owned slots indexed by i,
// so output order never depends on the parallelism degree.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

ann::Dataset load_configured_dataset(const RunConfig& config) {
    if (config.dataset_path.empty()) {
        throw IoError("no dataset path configured");
    }
    return ann::load_dataset(config.dataset_path, ann::parse_format(config.format));
}

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + config.out_dir + "'");
    }
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << content;
}

std::string histogram_csv(const std::string& key_header, const std::map<int, long>& hist) {
    std::ostringstream out;
    out << key_header << ",count\n";
    for (const auto& [key, count] : hist) {
        out << key << "," << count << "\n";
    }
    return out.str();
}

std::string bar_chart_svg(const std::string& title, const std::string& x_label,
                          const std::map<int, long>& hist) {
    const int width = 640;
    const int height = 360;
    const int margin = 48;
    long max_count = 1;
    for (const auto& [key, count] : hist) {
        max_count = std::max(max_count, count);
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << x_label << "</text>\n";
    if (!hist.empty()) {
        const int plot_w = width - 2 * margin;
        const int plot_h = height - 2 * margin;
        const double bar_w = static_cast<double>(plot_w) / static_cast<double>(hist.size());
        std::size_t i = 0;
        for (const auto& [key, count] : hist) {
            const double h = plot_h * static_cast<double>(count) / max_count;
            const double x = margin + i * bar_w;
            const double y = margin + (plot_h - h);
            out << "<rect x=\"" << x + 1 << "\" y=\"" << y << "\" width=\""
                << std::max(1.0, bar_w - 2) << "\" height=\"" << h
                << "\" fill=\"#4477aa\"/>\n";
            out << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << height - margin + 14
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                << "font-size=\"9\">" << key << "</text>\n";
            ++i;
        }
    }
    out << "</svg>\n";
    return out.str();
}

match::BoxRect polygon_box_normalized(const geom::Polygon& poly, double img_w,
                                      double img_h) {
    const geom::BoundingBox bb = geom::bounding_box(poly);
    match::BoxRect box{bb.min_x / img_w, bb.min_y / img_h, bb.max_x / img_w,
                       bb.max_y / img_h};
    // Guard against zero-extent boxes from degenerate polygons.
    if (box.x2 <= box.x1) box.x2 = box.x1 + 1e-6;
    if (box.y2 <= box.y1) box.y2 = box.y1 + 1e-6;
    return box;
}

// Pixel-center occupancy of the polygon inside its box, RoI style.
match::MaskGrid rasterize_mask(const geom::Polygon& poly, const match::BoxRect& box,
                               double img_w, double img_h, int size) {
    match::MaskGrid grid = match::MaskGrid::zeros(size, size);
    const double x0 = box.x1 * img_w;
    const double y0 = box.y1 * img_h;
    const double bw = (box.x2 - box.x1) * img_w;
    const double bh = (box.y2 - box.y1) * img_h;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const geom::Point2 p{x0 + (x + 0.5) / size * bw, y0 + (y + 0.5) / size * bh};
            if (geom::point_in_polygon(p, poly)) {
                grid.at(x, y) = 1.0;
            }
        }
    }
    return grid;
}

match::MaskGrid to_mask_grid(const labelgen::SegMapLabel& label) {
    match::MaskGrid grid;
    grid.width = label.width;
    grid.height = label.height;
    grid.values.assign(label.values.begin(), label.values.end());
    return grid;
}

// Word-length segmentation map built from arbitrary polygons and
// character counts; counts are clamped so malformed predictions still
// rasterize.
match::MaskGrid segmap_from_polygons(const std::vector<const geom::Polygon*>& polys,
                                     const std::vector<int>& char_counts, double img_w,
                                     double img_h, int width, int height, int n_max) {
    match::MaskGrid grid = match::MaskGrid::zeros(width, height);
    const double sx = width / img_w;
    const double sy = height / img_h;
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const int n = std::clamp(char_counts[i], 1, n_max);
        const double value =
            labelgen::classify_length(n, n_max) == labelgen::LengthClass::Extreme ? 1.0
                                                                                  : 0.5;
        geom::Polygon scaled;
        for (const geom::Point2& p : polys[i]->points) {
            scaled.points.push_back(geom::Point2{p.x * sx, p.y * sy});
        }
        const geom::BoundingBox bb = geom::bounding_box(scaled);
        const int x0 = std::max(0, static_cast<int>(std::floor(bb.min_x - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(bb.min_y - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(bb.max_x)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(bb.max_y)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if (geom::point_in_polygon(geom::Point2{x + 0.5, y + 0.5}, scaled)) {
                    grid.at(x, y) = std::max(grid.at(x, y), value);
                }
            }
        }
    }
    return grid;
}

match::Prediction build_prediction(const PredictionRecord& rec,
                                   const ann::ImageAnnotation& image,
                                   const RunConfig& config) {
    match::Prediction pred;
    pred.class_prob = rec.score;
    pred.box = rec.box ? *rec.box
                       : polygon_box_normalized(rec.polygon, image.width, image.height);
    pred.mask = rec.mask ? *rec.mask
                         : rasterize_mask(rec.polygon, pred.box, image.width,
                                          image.height, match::kDefaultMaskSize);
    if (rec.prior) {
        pred.prior = *rec.prior;
    } else {
        pred.prior[0] =
            std::min(geom::aspect_ratio(rec.polygon).ratio / config.ratio_cap, 1.0);
        const int n = rec.text ? ann::count_scalar_values(*rec.text) : 0;
        pred.prior[1] = std::min(static_cast<double>(n) / config.n_max, 1.0);
    }
    pred.transcript = rec.text.value_or("");
    pred.step_probs = rec.step_probs;
    return pred;
}

match::GroundTruthTarget build_target(const ann::TextInstance& inst,
                                      const ann::ImageAnnotation& image,
                                      const RunConfig& config) {
    match::GroundTruthTarget gt;
    gt.box = polygon_box_normalized(inst.polygon, image.width, image.height);
    gt.mask = rasterize_mask(inst.polygon, gt.box, image.width, image.height,
                             match::kDefaultMaskSize);
    const labelgen::WordLengthPrior prior =
        labelgen::make_prior(inst, config.ratio_cap, config.n_max);
    gt.prior = {prior.ratio_norm, prior.count_norm};
    gt.transcript = inst.transcription.text;
    return gt;
}

std::string format_double(double v) {
    json j = v;
    return j.dump();
}

}  // namespace

void log_message(const std::string& level, const std::string& message) {
    if (level_of(level) >= log_level()) {
        std::cerr << "[" << level << "] " << message << "\n";
    }
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    RunConfig config;
    try {
        config.dataset_path = doc.value("dataset", config.dataset_path);
        config.format = doc.value("format", config.format);
        config.n_max = doc.value("nmax", config.n_max);
        config.ratio_cap = doc.value("ratio_cap", config.ratio_cap);
        config.map_width = doc.value("map_width", config.map_width);
        config.map_height = doc.value("map_height", config.map_height);
        config.iou_threshold = doc.value("iou_threshold", config.iou_threshold);
        config.iou_resolution = doc.value("iou_resolution", config.iou_resolution);
        config.lexicon_path = doc.value("lexicon", config.lexicon_path);
        config.out_dir = doc.value("out", config.out_dir);
        config.jobs = doc.value("jobs", config.jobs);
        config.case_sensitive = doc.value("case_sensitive", config.case_sensitive);
        if (doc.contains("weights")) {
            const json& w = doc["weights"];
            config.weights.cls = w.value("cls", config.weights.cls);
            config.weights.prior = w.value("prior", config.weights.prior);
            config.weights.map = w.value("map", config.weights.map);
            config.weights.l1 = w.value("l1", config.weights.l1);
            config.weights.giou = w.value("giou", config.weights.giou);
            config.weights.l2 = w.value("l2", config.weights.l2);
            config.weights.dice = w.value("dice", config.weights.dice);
            config.weights.focal_alpha = w.value("focal_alpha", config.weights.focal_alpha);
            config.weights.focal_gamma = w.value("focal_gamma", config.weights.focal_gamma);
            config.weights.smooth_l1_beta =
                w.value("smooth_l1_beta", config.weights.smooth_l1_beta);
        }
    } catch (const json::exception& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    if (config.n_max < 1 || config.ratio_cap <= 0.0 || config.map_width < 8 ||
        config.map_height < 8 || config.iou_threshold < 0.0 ||
        config.iou_threshold > 1.0 || config.jobs < 1) {
        throw ValidationError("config '" + path.string() + "' has a field out of range");
    }
    return config;
}

std::vector<ImagePredictions> load_predictions(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open predictions '" + path.string() + "'");
    }
    std::vector<ImagePredictions> all;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
        try {
            ImagePredictions img;
            img.image_id = rec.at("image_id").get<std::string>();
            for (const json& jp : rec.at("predictions")) {
                PredictionRecord p;
                for (const json& pt : jp.at("points")) {
                    p.polygon.points.push_back(
                        geom::Point2{pt.at(0).get<double>(), pt.at(1).get<double>()});
                }
                geom::validate_polygon(p.polygon);
                p.score = jp.at("score").get<double>();
                if (jp.contains("text")) {
                    p.text = jp["text"].get<std::string>();
                }
                if (jp.contains("box")) {
                    const json& b = jp["box"];
                    p.box = match::BoxRect{b.at(0).get<double>(), b.at(1).get<double>(),
                                           b.at(2).get<double>(), b.at(3).get<double>()};
                }
                if (jp.contains("mask")) {
                    match::MaskGrid grid;
                    grid.height = static_cast<int>(jp["mask"].size());
                    for (const json& row : jp["mask"]) {
                        grid.width = static_cast<int>(row.size());
                        for (const json& v : row) {
                            grid.values.push_back(v.get<double>());
                        }
                    }
                    p.mask = std::move(grid);
                }
                if (jp.contains("prior")) {
                    p.prior = std::array<double, 2>{jp["prior"].at(0).get<double>(),
                                                    jp["prior"].at(1).get<double>()};
                }
                if (jp.contains("step_probs")) {
                    p.step_probs = jp["step_probs"].get<std::vector<double>>();
                }
                img.predictions.push_back(std::move(p));
            }
            all.push_back(std::move(img));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        } catch (const Error& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return all;
}

std::vector<std::string> load_lexicon(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open lexicon '" + path.string() + "'");
    }
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            words.push_back(line);
        }
    }
    return words;
}

int cmd_stats(const RunConfig& config) {
    const ann::Dataset ds = load_configured_dataset(config);
    ensure_out_dir(config);

    const labelgen::LengthHistogram lengths = labelgen::dataset_length_histogram(ds);
    const std::map<int, long> density = labelgen::density_histogram(ds);

    const fs::path out(config.out_dir);
    write_text_file(out / "length_histogram.csv", histogram_csv("chars", lengths.buckets));
    write_text_file(out / "density_histogram.csv", histogram_csv("instances", density));
    write_text_file(out / "length_histogram.svg",
                    bar_chart_svg("Word length distribution", "characters per word",
                                  lengths.buckets));
    write_text_file(out / "density_histogram.svg",
                    bar_chart_svg("Text density distribution", "instances per image",
                                  density));

    std::cout << "short=" << lengths.short_count << " regular=" << lengths.regular_count
              << " long=" << lengths.long_count << " total=" << lengths.total() << "\n";
    return kExitOk;
}

int cmd_labels(const RunConfig& config, const std::string& kind) {
    if (kind != "prior" && kind != "segmap") {
        throw ParseError("labels kind must be 'prior' or 'segmap', got '" + kind + "'");
    }
    const ann::Dataset ds = load_configured_dataset(config);
    ensure_out_dir(config);
    const fs::path out(config.out_dir);

    std::vector<std::string> outputs(ds.images.size());
    std::vector<std::string> failures(ds.images.size());
    parallel_for(ds.images.size(), config.jobs, [&](std::size_t i) {
        const ann::ImageAnnotation& image = ds.images[i];
        try {
            if (kind == "prior") {
                const labelgen::PriorLabelSet labels =
                    labelgen::gen_prior_labels(image, config.ratio_cap, config.n_max);
                json rec;
                rec["image_id"] = labels.image_id;
                json priors = json::array();
                for (const labelgen::WordLengthPrior& p : labels.priors) {
                    priors.push_back(json::array({p.ratio_norm, p.count_norm}));
                }
                rec["priors"] = priors;
                outputs[i] = rec.dump();
            } else {
                const labelgen::SegMapLabel map = labelgen::gen_segmap_label(
                    image, config.map_width, config.map_height, config.n_max);
                std::ostringstream pgm;
                pgm << "P2\n" << map.width << " " << map.height << "\n255\n";
                for (int y = 0; y < map.height; ++y) {
                    for (int x = 0; x < map.width; ++x) {
                        const float v = map.at(x, y);
                        pgm << (v >= 1.0f ? 255 : v >= 0.5f ? 128 : 0);
                        pgm << (x + 1 == map.width ? '\n' : ' ');
                    }
                }
                outputs[i] = pgm.str();
            }
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    bool any_failed = false;
    if (kind == "prior") {
        std::ostringstream all;
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            if (!failures[i].empty()) {
                any_failed = true;
                continue;
            }
            all << outputs[i] << "\n";
        }
        write_text_file(out / "priors.jsonl", all.str());
    } else {
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            if (!failures[i].empty()) {
                any_failed = true;
                continue;
            }
            write_text_file(out / ("segmap_" + ds.images[i].image_id + ".pgm"),
                            outputs[i]);
        }
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i].empty()) {
            log_message("error",
                        "image '" + ds.images[i].image_id + "': " + failures[i]);
        }
    }
    return any_failed ? kExitValidation : kExitOk;
}

int cmd_match(const RunConfig& config, const std::string& predictions_path) {
    const ann::Dataset ds = load_configured_dataset(config);
    const std::vector<ImagePredictions> preds = load_predictions(predictions_path);
    ensure_out_dir(config);

    std::map<std::string, const ann::ImageAnnotation*> images;
    for (const ann::ImageAnnotation& image : ds.images) {
        images[image.image_id] = &image;
    }
    for (const ImagePredictions& img : preds) {
        if (images.find(img.image_id) == images.end()) {
            throw ValidationError("predictions reference unknown image_id '" +
                                  img.image_id + "'");
        }
    }

    std::vector<std::string> records(preds.size());
    std::vector<std::string> infeasible(preds.size());
    parallel_for(preds.size(), config.jobs, [&](std::size_t i) {
        const ImagePredictions& img = preds[i];
        const ann::ImageAnnotation& image = *images.at(img.image_id);

        std::vector<match::Prediction> mpreds;
        for (const PredictionRecord& rec : img.predictions) {
            mpreds.push_back(build_prediction(rec, image, config));
        }
        std::vector<match::GroundTruthTarget> targets;
        for (const ann::TextInstance& inst : image.instances) {
            if (!inst.transcription.ignore) {
                targets.push_back(build_target(inst, image, config));
            }
        }

        match::MatchOutcome outcome;
        try {
            outcome = match::match_predictions(mpreds, targets, config.weights);
        } catch (const InfeasibleMatrix& e) {
            infeasible[i] = e.what();
            return;
        }

        std::vector<const geom::Polygon*> pred_polys;
        std::vector<int> pred_counts;
        for (const PredictionRecord& rec : img.predictions) {
            pred_polys.push_back(&rec.polygon);
            pred_counts.push_back(rec.text ? ann::count_scalar_values(*rec.text) : 5);
        }
        const match::MaskGrid pred_map =
            segmap_from_polygons(pred_polys, pred_counts, image.width, image.height,
                                 config.map_width, config.map_height, config.n_max);
        const match::MaskGrid gt_map = to_mask_grid(labelgen::gen_segmap_label(
            image, config.map_width, config.map_height, config.n_max));

        const match::DetectionLoss loss = match::detection_loss(
            mpreds, targets, outcome.assignment, config.weights, pred_map, gt_map);

        json rec;
        rec["image_id"] = img.image_id;
        json pairs = json::array();
        for (std::size_t k = 0; k < outcome.assignment.pairs.size(); ++k) {
            const auto& [g, p] = outcome.assignment.pairs[k];
            const match::CostBreakdown& b = outcome.breakdowns[k];
            pairs.push_back(json{{"gt", g},
                                 {"pred", p},
                                 {"cost", b.total},
                                 {"breakdown",
                                  {{"cls", b.cls},
                                   {"l1", b.l1},
                                   {"giou", b.giou_loss},
                                   {"l2", b.l2},
                                   {"dice", b.dice},
                                   {"prior", b.prior}}}});
        }
        rec["pairs"] = pairs;
        rec["total_cost"] = outcome.assignment.total_cost;
        rec["loss"] = {{"cls", loss.cls},     {"l1", loss.l1},   {"giou", loss.giou},
                       {"l2", loss.l2},       {"dice", loss.dice}, {"prior", loss.prior},
                       {"map", loss.map},     {"total", loss.total}};
        records[i] = rec.dump();
    });

    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!infeasible[i].empty()) {
            log_message("error",
                        "image '" + preds[i].image_id + "': " + infeasible[i]);
            return kExitInfeasible;
        }
    }

    std::ostringstream all;
    for (const std::string& rec : records) {
        all << rec << "\n";
    }
    write_text_file(fs::path(config.out_dir) / "matches.jsonl", all.str());
    return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& predictions_path,
             const std::string& mode) {
    if (mode != "det" && mode != "e2e") {
        throw ParseError("eval mode must be 'det' or 'e2e', got '" + mode + "'");
    }
    const bool end_to_end = (mode == "e2e");
    const ann::Dataset ds = load_configured_dataset(config);
    const std::vector<ImagePredictions> preds = load_predictions(predictions_path);
    ensure_out_dir(config);

    metrics::EvalConfig eval_config;
    eval_config.iou_threshold = config.iou_threshold;
    eval_config.iou_resolution = config.iou_resolution;
    eval_config.case_sensitive = config.case_sensitive;
    if (end_to_end && !config.lexicon_path.empty()) {
        eval_config.lexicon_mode = metrics::LexiconMode::Full;
        eval_config.lexicon = load_lexicon(config.lexicon_path);
        if (eval_config.lexicon.empty()) {
            throw MissingLexicon("lexicon '" + config.lexicon_path + "' is empty");
        }
    }

    std::map<std::string, std::vector<metrics::DetPrediction>> by_image;
    for (const ImagePredictions& img : preds) {
        for (const PredictionRecord& rec : img.predictions) {
            metrics::DetPrediction dp;
            dp.image_id = img.image_id;
            dp.polygon = rec.polygon;
            dp.score = rec.score;
            dp.transcript = rec.text;
            by_image[img.image_id].push_back(std::move(dp));
        }
    }

    static const std::vector<metrics::DetPrediction> kNone;
    std::vector<metrics::ImageEvalResult> results(ds.images.size());
    parallel_for(ds.images.size(), config.jobs, [&](std::size_t i) {
        const auto it = by_image.find(ds.images[i].image_id);
        results[i] = metrics::evaluate_image(
            ds.images[i], it != by_image.end() ? it->second : kNone, eval_config,
            end_to_end);
    });
    // Predictions on unknown image ids are plain false positives.
    std::map<std::string, bool> known;
    for (const ann::ImageAnnotation& image : ds.images) {
        known[image.image_id] = true;
    }
    for (const auto& [id, orphan] : by_image) {
        if (known.count(id)) {
            continue;
        }
        metrics::ImageEvalResult r;
        r.fp = static_cast<long>(orphan.size());
        if (end_to_end) {
            r.e2e_fp = r.fp;
        }
        results.push_back(r);
    }
    const metrics::EvalReport report = metrics::aggregate(results, end_to_end);

    json doc;
    doc["mode"] = mode;
    doc["precision"] = report.detection.precision;
    doc["recall"] = report.detection.recall;
    doc["fscore"] = report.detection.fscore;
    doc["counts"] = {{"tp", report.tp}, {"fp", report.fp}, {"fn", report.fn}};
    doc["bucket_recall"] = {{"short", report.bucket_recall.short_recall},
                            {"regular", report.bucket_recall.regular_recall},
                            {"long", report.bucket_recall.long_recall}};
    if (report.e2e) {
        doc["e2e"] = {{"precision", report.e2e->precision},
                      {"recall", report.e2e->recall},
                      {"fscore", report.e2e->fscore},
                      {"lexicon", eval_config.lexicon_mode == metrics::LexiconMode::Full
                                      ? "full"
                                      : "none"},
                      {"counts",
                       {{"tp", report.e2e_tp},
                        {"fp", report.e2e_fp},
                        {"fn", report.e2e_fn}}}};
    }
    write_text_file(fs::path(config.out_dir) / "eval_report.json", doc.dump(2) + "\n");

    std::cout << "P=" << format_double(report.detection.precision)
              << " R=" << format_double(report.detection.recall)
              << " F=" << format_double(report.detection.fscore);
    if (report.e2e) {
        std::cout << " e2e_F=" << format_double(report.e2e->fscore);
    }
    std::cout << "\n";
    return kExitOk;
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const MissingLexicon& e) {
        log_message("error", e.what());
        return kExitMissingLexicon;
    } catch (const InfeasibleMatrix& e) {
        log_message("error", e.what());
        return kExitInfeasible;
    } catch (const ValidationError& e) {
        log_message("error", e.what());
        return kExitValidation;
    } catch (const OutOfRange& e) {
        log_message("error", e.what());
        return kExitValidation;
    } catch (const ParseError& e) {
        log_message("error", e.what());
        return kExitParse;
    } catch (const IoError& e) {
        log_message("error", e.what());
        return kExitParse;
    } catch (const Error& e) {
        log_message("error", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        log_message("error", e.what());
        return kExitValidation;
    }
}

}  // namespace lenspot::cli
