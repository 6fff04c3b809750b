#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lenspot/geometry.hpp"

namespace lenspot::ann {

inline constexpr const char* kIgnoreMarker = "###";

struct Transcription {
    std::string text;
    bool ignore{false};
};

Transcription make_transcription(std::string raw);

// Number of Unicode scalar values, leading/trailing ASCII whitespace
// stripped. Throws IgnoredInstance for "###" entries.
int char_count(const Transcription& t);
int count_scalar_values(const std::string& utf8);

struct TextInstance {
    geom::Polygon polygon;
    Transcription transcription;
};

struct ImageAnnotation {
    std::string image_id;
    double width{0.0};
    double height{0.0};
    std::vector<TextInstance> instances;
};

struct Dataset {
    std::string name;
    std::vector<ImageAnnotation> images;
};

// `x1,y1,...,x2m,y2m,transcription`; the transcription may be
// double-quoted when it contains commas.
TextInstance parse_icdar_line(const std::string& line);

enum class DatasetFormat { IcdarDir, Jsonl };
DatasetFormat parse_format(const std::string& name);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

// Polygon vertices may overshoot the frame by up to 10% per side.
void validate_image(const ImageAnnotation& image);
void validate_dataset(const Dataset& ds);

std::string to_jsonl_record(const ImageAnnotation& image);
ImageAnnotation parse_jsonl_record(const std::string& line);

}  // namespace lenspot::ann
