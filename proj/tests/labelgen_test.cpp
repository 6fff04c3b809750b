#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lenspot/labelgen.hpp"

using namespace lenspot;
using labelgen::LengthClass;

namespace {

ann::TextInstance make_instance(double x0, double y0, double w, double h,
                                const std::string& text) {
    ann::TextInstance inst;
    inst.polygon.points = {{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}};
    inst.transcription = ann::make_transcription(text);
    return inst;
}

ann::ImageAnnotation single_word_image(double w, double h, const std::string& text) {
    ann::ImageAnnotation image;
    image.image_id = "img";
    image.width = 100;
    image.height = 100;
    image.instances.push_back(make_instance(10, 10, w, h, text));
    return image;
}

// Rank (Spearman) correlation on two columns.
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
            return v[x] < v[y];
        });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[idx[i]] = static_cast<double>(i);
        return r;
    };
    const std::vector<double> ra = ranks(a);
    const std::vector<double> rb = ranks(b);
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("classify_length") {
    CHECK(labelgen::classify_length(5, 25) == LengthClass::Regular);
    CHECK(labelgen::classify_length(3, 25) == LengthClass::Extreme);
    CHECK(labelgen::classify_length(11, 25) == LengthClass::Extreme);
    CHECK(labelgen::classify_length(10, 25) == LengthClass::Regular);
    CHECK(labelgen::classify_length(4, 25) == LengthClass::Regular);
    CHECK(labelgen::classify_length(25, 25) == LengthClass::Extreme);
    CHECK(labelgen::classify_length(1, 25) == LengthClass::Extreme);
    CHECK_THROWS_AS(labelgen::classify_length(0, 25), OutOfRange);
    CHECK_THROWS_AS(labelgen::classify_length(26, 25), OutOfRange);
}

TEST_CASE("classify_length partitions [1, n_max]") {
    for (int n = 1; n <= 25; ++n) {
        const LengthClass cls = labelgen::classify_length(n, 25);
        const bool regular = (n >= 4 && n <= 10);
        CHECK(cls == (regular ? LengthClass::Regular : LengthClass::Extreme));
    }
}

TEST_CASE("gen_prior_labels") {
    const auto set =
        labelgen::gen_prior_labels(single_word_image(40, 10, "hello"), 20.0, 25);
    REQUIRE(set.priors.size() == 1);
    CHECK(set.priors[0].ratio_raw == doctest::Approx(4.0));
    CHECK(set.priors[0].char_count == 5);
    CHECK(set.priors[0].ratio_norm == doctest::Approx(0.2));
    CHECK(set.priors[0].count_norm == doctest::Approx(0.2));

    const auto unit = labelgen::gen_prior_labels(single_word_image(1, 1, "I"), 20.0, 25);
    REQUIRE(unit.priors.size() == 1);
    CHECK(unit.priors[0].ratio_raw == doctest::Approx(1.0));
    CHECK(unit.priors[0].char_count == 1);

    const auto ignored =
        labelgen::gen_prior_labels(single_word_image(40, 10, "###"), 20.0, 25);
    CHECK(ignored.priors.empty());

    CHECK_THROWS_AS(labelgen::gen_prior_labels(
                        single_word_image(40, 10, "waytoolongforthetinylimit"), 20.0, 10),
                    OutOfRange);
}

TEST_CASE("prior normalization stays in [0,1]") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> w(1.0, 90.0);
    std::uniform_int_distribution<int> len(1, 25);
    for (int trial = 0; trial < 100; ++trial) {
        const std::string text(static_cast<std::size_t>(len(rng)), 'a');
        const auto set = labelgen::gen_prior_labels(
            single_word_image(w(rng), 1.0 + w(rng) / 10, text), 20.0, 25);
        REQUIRE(set.priors.size() == 1);
        CHECK(set.priors[0].ratio_norm >= 0.0);
        CHECK(set.priors[0].ratio_norm <= 1.0);
        CHECK(set.priors[0].count_norm >= 0.0);
        CHECK(set.priors[0].count_norm <= 1.0);
    }
}

TEST_CASE("gen_segmap_label") {
    ann::ImageAnnotation empty;
    empty.image_id = "empty";
    empty.width = 100;
    empty.height = 100;
    const auto zero_map = labelgen::gen_segmap_label(empty, 32, 32, 25);
    for (float v : zero_map.values) {
        CHECK(v == 0.0f);
    }

    // Extreme word (2 chars) covering the left half exactly.
    ann::ImageAnnotation half;
    half.image_id = "half";
    half.width = 100;
    half.height = 100;
    half.instances.push_back(make_instance(0, 0, 50, 100, "ab"));
    const auto map = labelgen::gen_segmap_label(half, 32, 32, 25);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            CHECK(map.at(x, y) == (x < 16 ? 1.0f : 0.0f));
        }
    }

    // Overlapping regular and extreme words: extreme wins.
    ann::ImageAnnotation overlap;
    overlap.image_id = "overlap";
    overlap.width = 100;
    overlap.height = 100;
    overlap.instances.push_back(make_instance(0, 0, 60, 40, "seven77"));   // regular
    overlap.instances.push_back(make_instance(30, 0, 60, 40, "ab"));       // extreme
    const auto both = labelgen::gen_segmap_label(overlap, 100, 100, 25);
    CHECK(both.at(10, 10) == 0.5f);
    CHECK(both.at(45, 10) == 1.0f);  // overlap region
    CHECK(both.at(80, 10) == 1.0f);
    CHECK(both.at(10, 80) == 0.0f);
}

TEST_CASE("segmap values stay in the label domain") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> pos(0.0, 60.0);
    std::uniform_int_distribution<int> len(1, 25);
    ann::ImageAnnotation image;
    image.image_id = "rand";
    image.width = 100;
    image.height = 100;
    for (int i = 0; i < 12; ++i) {
        image.instances.push_back(
            make_instance(pos(rng), pos(rng), 5 + pos(rng) / 2, 4 + pos(rng) / 6,
                          std::string(static_cast<std::size_t>(len(rng)), 'x')));
    }
    const auto map = labelgen::gen_segmap_label(image, 64, 64, 25);
    for (float v : map.values) {
        CHECK((v == 0.0f || v == 0.5f || v == 1.0f));
    }
}

TEST_CASE("segmap agrees with classify_length for single instances") {
    for (int n : {1, 3, 4, 10, 11, 25}) {
        const auto image = single_word_image(60, 30, std::string(n, 'a'));
        const auto map = labelgen::gen_segmap_label(image, 64, 64, 25);
        float covered = 0.0f;
        for (float v : map.values) {
            covered = std::max(covered, v);
        }
        const bool extreme = labelgen::classify_length(n, 25) == LengthClass::Extreme;
        CHECK(covered == (extreme ? 1.0f : 0.5f));
    }
}

TEST_CASE("convex dilation never shrinks coverage") {
    auto coverage = [](double grow) {
        ann::ImageAnnotation image;
        image.image_id = "grow";
        image.width = 100;
        image.height = 100;
        image.instances.push_back(
            make_instance(30 - grow, 30 - grow, 20 + 2 * grow, 10 + 2 * grow, "word"));
        const auto map = labelgen::gen_segmap_label(image, 64, 64, 25);
        long nonzero = 0;
        for (float v : map.values) {
            if (v > 0.0f) ++nonzero;
        }
        return nonzero;
    };
    long prev = -1;
    for (double g = 0.0; g <= 10.0; g += 1.0) {
        const long cur = coverage(g);
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("dataset histograms") {
    ann::Dataset ds;
    ds.name = "mini";
    ann::ImageAnnotation image;
    image.image_id = "a";
    image.width = 200;
    image.height = 200;
    for (const std::string text : {"i", "hello", "world", "abcdefghijkl"}) {
        image.instances.push_back(make_instance(0, 0, 20, 10, text));
    }
    ds.images.push_back(image);

    const auto hist = labelgen::dataset_length_histogram(ds);
    CHECK(hist.buckets.at(1) == 1);
    CHECK(hist.buckets.at(5) == 2);
    CHECK(hist.buckets.at(12) == 1);
    CHECK(hist.short_count == 1);
    CHECK(hist.regular_count == 2);
    CHECK(hist.long_count == 1);
    CHECK(hist.total() == 4);

    const auto empty_hist = labelgen::dataset_length_histogram(ann::Dataset{});
    CHECK(empty_hist.buckets.empty());
    CHECK(empty_hist.total() == 0);
}

TEST_CASE("density_histogram") {
    ann::Dataset ds;
    for (int count : {2, 2, 7}) {
        ann::ImageAnnotation image;
        image.image_id = "img" + std::to_string(ds.images.size());
        image.width = 200;
        image.height = 200;
        for (int i = 0; i < count; ++i) {
            image.instances.push_back(make_instance(0, 12.0 * i, 20, 10, "word"));
        }
        ds.images.push_back(image);
    }
    const auto hist = labelgen::density_histogram(ds);
    CHECK(hist.at(2) == 2);
    CHECK(hist.at(7) == 1);

    // All-ignored image lands in bucket 0.
    ann::Dataset ignored;
    ann::ImageAnnotation image;
    image.image_id = "ign";
    image.width = 100;
    image.height = 100;
    image.instances.push_back(make_instance(0, 0, 20, 10, "###"));
    ignored.images.push_back(image);
    CHECK(labelgen::density_histogram(ignored).at(0) == 1);
}

TEST_CASE("histogram counts match a streaming recount oracle") {
    std::mt19937 rng(29);
    std::uniform_int_distribution<int> len(1, 25);
    ann::Dataset ds;
    std::map<int, long> recount;
    for (int img = 0; img < 50; ++img) {
        ann::ImageAnnotation image;
        image.image_id = "img" + std::to_string(img);
        image.width = 2000;
        image.height = 2000;
        for (int i = 0; i < 200; ++i) {
            const int n = len(rng);
            image.instances.push_back(
                make_instance(0, 11.0 * (i % 100), 8.0 * n, 8, std::string(n, 'a')));
            ++recount[n];
        }
        ds.images.push_back(image);
    }
    const auto hist = labelgen::dataset_length_histogram(ds);
    CHECK(hist.buckets == recount);
    CHECK(hist.total() == 50L * 200L);
}

TEST_CASE("aspect ratio tracks character count on width-proportional words") {
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> len(1, 25);
    std::uniform_real_distribution<double> height(8.0, 12.0);
    std::vector<double> ratios, counts;
    for (int i = 0; i < 500; ++i) {
        const int n = len(rng);
        const double h = height(rng);
        ann::TextInstance inst = make_instance(0, 0, 7.5 * n, h, std::string(n, 'a'));
        ann::ImageAnnotation image;
        image.image_id = "w";
        image.width = 400;
        image.height = 50;
        image.instances.push_back(inst);
        const auto set = labelgen::gen_prior_labels(image, 20.0, 25);
        ratios.push_back(set.priors[0].ratio_raw);
        counts.push_back(static_cast<double>(set.priors[0].char_count));
    }
    CHECK(rank_correlation(ratios, counts) > 0.9);
}
