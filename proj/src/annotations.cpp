#include "lenspot/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lenspot::ann {

Transcription make_transcription(std::string raw) {
    Transcription t;
    t.ignore = (raw == kIgnoreMarker);
    t.text = std::move(raw);
    return t;
}

int count_scalar_values(const std::string& utf8) {
    int n = 0;
    for (unsigned char c : utf8) {
        if ((c & 0xC0) != 0x80) {
            ++n;
        }
    }
    return n;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& field) {
    const std::string t = trim(field);
    if (t.empty()) {
        throw ParseError("empty coordinate field");
    }
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &consumed);
    } catch (const std::exception&) {
        throw ParseError("malformed coordinate '" + field + "'");
    }
    if (consumed != t.size() || !std::isfinite(value)) {
        throw ParseError("malformed coordinate '" + field + "'");
    }
    return value;
}

// Comma split with double-quote awareness; quotes are stripped from the
// field and "" unescapes to a literal quote.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw ParseError("unterminated quote");
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

int char_count(const Transcription& t) {
    if (t.ignore) {
        throw IgnoredInstance("char_count on an ignored ('###') instance");
    }
    return count_scalar_values(trim(t.text));
}

TextInstance parse_icdar_line(const std::string& line) {
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() < 9) {
        throw ParseError("expected at least 8 coordinates and a transcription, got " +
                         std::to_string(fields.size()) + " fields");
    }
    const std::size_t coord_count = fields.size() - 1;
    if (coord_count % 2 != 0) {
        throw ParseError("odd coordinate count " + std::to_string(coord_count));
    }
    const std::size_t point_count = coord_count / 2;
    if (point_count < 4 || point_count > 16 || point_count % 2 != 0) {
        throw ParseError("unsupported point count " + std::to_string(point_count));
    }

    TextInstance inst;
    inst.polygon.points.reserve(point_count);
    for (std::size_t i = 0; i < point_count; ++i) {
        inst.polygon.points.push_back(
            geom::Point2{parse_number(fields[2 * i]), parse_number(fields[2 * i + 1])});
    }
    inst.transcription = make_transcription(fields.back());
    if (!inst.transcription.ignore && trim(inst.transcription.text).empty()) {
        throw ParseError("empty transcription field");
    }
    geom::validate_polygon(inst.polygon);
    return inst;
}

DatasetFormat parse_format(const std::string& name) {
    if (name == "icdar-dir") return DatasetFormat::IcdarDir;
    if (name == "jsonl") return DatasetFormat::Jsonl;
    throw ParseError("unknown dataset format '" + name + "'");
}

void validate_image(const ImageAnnotation& image) {
    if (image.image_id.empty()) {
        throw ValidationError("image with empty image_id");
    }
    if (image.width <= 0.0 || image.height <= 0.0) {
        throw ValidationError("image '" + image.image_id + "' has non-positive size");
    }
    for (std::size_t i = 0; i < image.instances.size(); ++i) {
        const TextInstance& inst = image.instances[i];
        geom::validate_polygon(inst.polygon);
        if (!inst.transcription.ignore && trim(inst.transcription.text).empty()) {
            throw ValidationError("image '" + image.image_id + "' instance " +
                                  std::to_string(i) + " has an empty transcription");
        }
        for (const geom::Point2& p : inst.polygon.points) {
            if (p.x < -0.1 * image.width || p.x > 1.1 * image.width ||
                p.y < -0.1 * image.height || p.y > 1.1 * image.height) {
                throw ValidationError("image '" + image.image_id + "' instance " +
                                      std::to_string(i) + " vertex out of frame");
            }
        }
    }
}

void validate_dataset(const Dataset& ds) {
    std::set<std::string> ids;
    for (const ImageAnnotation& image : ds.images) {
        if (!ids.insert(image.image_id).second) {
            throw ValidationError("duplicate image_id '" + image.image_id + "'");
        }
        validate_image(image);
    }
}

std::string to_jsonl_record(const ImageAnnotation& image) {
    json rec;
    rec["image_id"] = image.image_id;
    rec["width"] = static_cast<long>(std::llround(image.width));
    rec["height"] = static_cast<long>(std::llround(image.height));
    json instances = json::array();
    for (const TextInstance& inst : image.instances) {
        json points = json::array();
        for (const geom::Point2& p : inst.polygon.points) {
            points.push_back(json::array({p.x, p.y}));
        }
        instances.push_back(json{{"points", points}, {"text", inst.transcription.text}});
    }
    rec["instances"] = instances;
    return rec.dump();
}

ImageAnnotation parse_jsonl_record(const std::string& line) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad json record: ") + e.what());
    }
    ImageAnnotation image;
    try {
        image.image_id = rec.at("image_id").get<std::string>();
        image.width = rec.at("width").get<double>();
        image.height = rec.at("height").get<double>();
        for (const json& ji : rec.at("instances")) {
            TextInstance inst;
            for (const json& jp : ji.at("points")) {
                inst.polygon.points.push_back(
                    geom::Point2{jp.at(0).get<double>(), jp.at(1).get<double>()});
            }
            inst.transcription = make_transcription(ji.at("text").get<std::string>());
            image.instances.push_back(std::move(inst));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("record missing field: ") + e.what());
    }
    return image;
}

namespace {

ImageAnnotation load_icdar_file(const fs::path& file, const std::string& image_id) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open '" + file.string() + "'");
    }
    ImageAnnotation image;
    image.image_id = image_id;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        // UTF-8 BOM on the first line of some ICDAR ground-truth files.
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) {
            continue;
        }
        try {
            image.instances.push_back(parse_icdar_line(line));
        } catch (const Error& e) {
            throw ParseError(file.string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    // ICDAR ground truth carries no image size; use the tight vertex
    // extent so frame-bound validation stays meaningful.
    double max_x = 1.0;
    double max_y = 1.0;
    for (const TextInstance& inst : image.instances) {
        for (const geom::Point2& p : inst.polygon.points) {
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
    }
    image.width = std::ceil(max_x);
    image.height = std::ceil(max_y);
    return image;
}

}  // namespace

Dataset load_dataset(const fs::path& path, DatasetFormat format) {
    Dataset ds;
    ds.name = path.filename().string();
    std::error_code ec;
    if (format == DatasetFormat::IcdarDir) {
        if (!fs::is_directory(path, ec)) {
            throw IoError("not a readable directory: '" + path.string() + "'");
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.rfind("gt_", 0) == 0 &&
                entry.path().extension() == ".txt") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& file : files) {
            const std::string stem = file.stem().string();
            ds.images.push_back(load_icdar_file(file, stem.substr(3)));
        }
    } else {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open '" + path.string() + "'");
        }
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) {
                continue;
            }
            try {
                ds.images.push_back(parse_jsonl_record(line));
            } catch (const Error& e) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                                 e.what());
            }
        }
    }
    validate_dataset(ds);
    return ds;
}

}  // namespace lenspot::ann
