#pragma once

#include <map>
#include <string>
#include <vector>

#include "lenspot/annotations.hpp"

namespace lenspot::labelgen {

inline constexpr int kDefaultNMax = 25;
inline constexpr int kLineLevelNMax = 100;
inline constexpr double kDefaultRatioCap = 20.0;
inline constexpr int kDefaultMapSize = 224;

// Regular/extreme split of the word-length range: 4..10 characters is
// regular, everything else up to n_max is extreme.
enum class LengthClass { Regular, Extreme };

LengthClass classify_length(int n, int n_max);

struct WordLengthPrior {
    double ratio_raw{0.0};
    int char_count{0};
    double ratio_norm{0.0};  // min(ratio_raw / ratio_cap, 1)
    double count_norm{0.0};  // min(char_count / n_max, 1)
};

struct PriorLabelSet {
    std::string image_id;
    std::vector<WordLengthPrior> priors;  // one per non-ignored instance
};

WordLengthPrior make_prior(const ann::TextInstance& inst, double ratio_cap, int n_max);
PriorLabelSet gen_prior_labels(const ann::ImageAnnotation& image, double ratio_cap,
                               int n_max);

// W x H grid over {0, 0.5, 1}: background, regular text, extreme
// word-length text. Row-major, extreme wins on overlap.
struct SegMapLabel {
    int width{0};
    int height{0};
    std::vector<float> values;

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

SegMapLabel gen_segmap_label(const ann::ImageAnnotation& image, int width, int height,
                             int n_max);

struct LengthHistogram {
    std::map<int, long> buckets;  // exact character count -> instances
    long short_count{0};          // N < 4
    long regular_count{0};        // 4 <= N <= 10
    long long_count{0};           // N > 10
    long total() const { return short_count + regular_count + long_count; }
};

LengthHistogram dataset_length_histogram(const ann::Dataset& ds);

// instances-per-image -> image count, ignored instances excluded.
std::map<int, long> density_histogram(const ann::Dataset& ds);

}  // namespace lenspot::labelgen
