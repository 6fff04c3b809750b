#include "lenspot/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lenspot::labelgen {

LengthClass classify_length(int n, int n_max) {
    if (n < 1 || n > n_max) {
        throw OutOfRange("character count " + std::to_string(n) + " outside [1, " +
                         std::to_string(n_max) + "]");
    }
    return (n >= 4 && n <= 10) ? LengthClass::Regular : LengthClass::Extreme;
}

WordLengthPrior make_prior(const ann::TextInstance& inst, double ratio_cap, int n_max) {
    WordLengthPrior prior;
    prior.ratio_raw = geom::aspect_ratio(inst.polygon).ratio;
    prior.char_count = ann::char_count(inst.transcription);
    if (prior.char_count > n_max) {
        throw OutOfRange("transcription '" + inst.transcription.text + "' has " +
                         std::to_string(prior.char_count) + " characters, n_max is " +
                         std::to_string(n_max));
    }
    prior.ratio_norm = std::min(prior.ratio_raw / ratio_cap, 1.0);
    prior.count_norm = std::min(static_cast<double>(prior.char_count) / n_max, 1.0);
    return prior;
}

PriorLabelSet gen_prior_labels(const ann::ImageAnnotation& image, double ratio_cap,
                               int n_max) {
    PriorLabelSet set;
    set.image_id = image.image_id;
    for (std::size_t i = 0; i < image.instances.size(); ++i) {
        const ann::TextInstance& inst = image.instances[i];
        if (inst.transcription.ignore) {
            continue;
        }
        try {
            set.priors.push_back(make_prior(inst, ratio_cap, n_max));
        } catch (const DegenerateGeometry& e) {
            throw DegenerateGeometry("image '" + image.image_id + "' instance " +
                                     std::to_string(i) + ": " + e.what());
        }
    }
    return set;
}

SegMapLabel gen_segmap_label(const ann::ImageAnnotation& image, int width, int height,
                             int n_max) {
    if (width < 8 || height < 8) {
        throw ValidationError("segmentation map must be at least 8x8");
    }
    SegMapLabel map;
    map.width = width;
    map.height = height;
    map.values.assign(static_cast<std::size_t>(width) * height, 0.0f);

    const double sx = width / image.width;
    const double sy = height / image.height;
    for (const ann::TextInstance& inst : image.instances) {
        if (inst.transcription.ignore) {
            continue;
        }
        const LengthClass cls = classify_length(ann::char_count(inst.transcription), n_max);
        const float value = (cls == LengthClass::Extreme) ? 1.0f : 0.5f;

        geom::Polygon scaled;
        scaled.points.reserve(inst.polygon.points.size());
        for (const geom::Point2& p : inst.polygon.points) {
            scaled.points.push_back(geom::Point2{p.x * sx, p.y * sy});
        }
        const geom::BoundingBox bb = geom::bounding_box(scaled);
        const int x0 = std::max(0, static_cast<int>(std::floor(bb.min_x - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::floor(bb.min_y - 0.5)));
        const int x1 = std::min(width - 1, static_cast<int>(std::ceil(bb.max_x)));
        const int y1 = std::min(height - 1, static_cast<int>(std::ceil(bb.max_y)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const geom::Point2 center{x + 0.5, y + 0.5};
                if (geom::point_in_polygon(center, scaled)) {
                    float& cell = map.values[static_cast<std::size_t>(y) * width + x];
                    cell = std::max(cell, value);
                }
            }
        }
    }
    return map;
}

LengthHistogram dataset_length_histogram(const ann::Dataset& ds) {
    LengthHistogram hist;
    for (const ann::ImageAnnotation& image : ds.images) {
        for (const ann::TextInstance& inst : image.instances) {
            if (inst.transcription.ignore) {
                continue;
            }
            const int n = ann::char_count(inst.transcription);
            ++hist.buckets[n];
            if (n < 4) {
                ++hist.short_count;
            } else if (n <= 10) {
                ++hist.regular_count;
            } else {
                ++hist.long_count;
            }
        }
    }
    return hist;
}

std::map<int, long> density_histogram(const ann::Dataset& ds) {
    std::map<int, long> hist;
    for (const ann::ImageAnnotation& image : ds.images) {
        int count = 0;
        for (const ann::TextInstance& inst : image.instances) {
            if (!inst.transcription.ignore) {
                ++count;
            }
        }
        ++hist[count];
    }
    return hist;
}

}  // namespace lenspot::labelgen
