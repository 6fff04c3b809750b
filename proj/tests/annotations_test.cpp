#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "lenspot/annotations.hpp"

using namespace lenspot;
namespace fs = std::filesystem;

namespace {

fs::path make_temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("lenspot_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("char_count") {
    CHECK(ann::char_count(ann::make_transcription("hello")) == 5);
    CHECK(ann::char_count(ann::make_transcription("don't")) == 5);
    CHECK_THROWS_AS(ann::char_count(ann::make_transcription("###")), IgnoredInstance);

    // Unicode scalar values, not bytes.
    CHECK(ann::char_count(ann::make_transcription("caf\xC3\xA9")) == 4);
    // Leading/trailing whitespace is not counted; interior whitespace is.
    CHECK(ann::char_count(ann::make_transcription("  ab cd ")) == 5);
}

TEST_CASE("char_count is additive over concatenation") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_int_distribution<int> ch('a', 'z');
    for (int trial = 0; trial < 100; ++trial) {
        std::string a, b;
        for (int i = 0; i < len(rng); ++i) a += static_cast<char>(ch(rng));
        for (int i = 0; i < len(rng); ++i) b += static_cast<char>(ch(rng));
        CHECK(ann::char_count(ann::make_transcription(a + b)) ==
              ann::char_count(ann::make_transcription(a)) +
                  ann::char_count(ann::make_transcription(b)));
    }
}

TEST_CASE("parse_icdar_line") {
    const ann::TextInstance quad = ann::parse_icdar_line("0,0,4,0,4,2,0,2,word");
    CHECK(quad.polygon.points.size() == 4);
    CHECK(quad.transcription.text == "word");
    CHECK(!quad.transcription.ignore);

    const ann::TextInstance curve =
        ann::parse_icdar_line("0,0,2,1,4,1,6,0,6,2,4,3,2,3,0,2,curve");
    CHECK(curve.polygon.points.size() == 8);
    CHECK(curve.polygon.points[3].x == 6);

    CHECK_THROWS_AS(ann::parse_icdar_line("0,0,4,0,4,2,word"), ParseError);
    CHECK_THROWS_AS(ann::parse_icdar_line("0,0,4,0,4,x,0,2,word"), ParseError);
    CHECK_THROWS_AS(ann::parse_icdar_line("0,0,4,0,4,2,0,2,"), ParseError);

    const ann::TextInstance ignored = ann::parse_icdar_line("0,0,4,0,4,2,0,2,###");
    CHECK(ignored.transcription.ignore);

    const ann::TextInstance quoted =
        ann::parse_icdar_line("0,0,4,0,4,2,0,2,\"a,b\"");
    CHECK(quoted.transcription.text == "a,b");
}

TEST_CASE("load_dataset icdar-dir") {
    const fs::path dir = make_temp_dir("icdar");
    write_file(dir / "gt_img1.txt", "0,0,40,0,40,10,0,10,hello\n0,20,10,20,10,30,0,30,x\n");
    write_file(dir / "gt_img2.txt", "5,5,25,5,25,15,5,15,###\n");

    const ann::Dataset ds = ann::load_dataset(dir, ann::DatasetFormat::IcdarDir);
    REQUIRE(ds.images.size() == 2);
    CHECK(ds.images[0].image_id == "img1");
    CHECK(ds.images[0].instances.size() == 2);
    CHECK(ds.images[1].instances[0].transcription.ignore);

    fs::remove_all(dir);
}

TEST_CASE("load_dataset jsonl rejects duplicate image ids") {
    const fs::path dir = make_temp_dir("jsonl_dup");
    const std::string rec =
        R"({"image_id":"a","width":100,"height":50,"instances":[{"points":[[0,0],[10,0],[10,5],[0,5]],"text":"hi"}]})";
    write_file(dir / "data.jsonl", rec + "\n" + rec + "\n");
    CHECK_THROWS_AS(ann::load_dataset(dir / "data.jsonl", ann::DatasetFormat::Jsonl),
                    ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("jsonl round trip") {
    ann::ImageAnnotation image;
    image.image_id = "img42";
    image.width = 640;
    image.height = 480;
    ann::TextInstance inst;
    inst.polygon.points = {{1.5, 2}, {30, 2}, {30, 12}, {1.5, 12}};
    inst.transcription = ann::make_transcription("word");
    image.instances.push_back(inst);

    const ann::ImageAnnotation back = ann::parse_jsonl_record(ann::to_jsonl_record(image));
    CHECK(back.image_id == image.image_id);
    CHECK(back.width == image.width);
    REQUIRE(back.instances.size() == 1);
    CHECK(back.instances[0].transcription.text == "word");
    CHECK(back.instances[0].polygon.points[0].x == 1.5);
    // Serializing again reproduces the same bytes.
    CHECK(ann::to_jsonl_record(back) == ann::to_jsonl_record(image));
}

TEST_CASE("validation catches out-of-frame vertices") {
    ann::ImageAnnotation image;
    image.image_id = "bad";
    image.width = 100;
    image.height = 100;
    ann::TextInstance inst;
    inst.polygon.points = {{0, 0}, {300, 0}, {300, 10}, {0, 10}};
    inst.transcription = ann::make_transcription("far");
    image.instances.push_back(inst);
    CHECK_THROWS_AS(ann::validate_image(image), ValidationError);

    // 10% slack is accepted.
    image.instances[0].polygon.points = {{-5, 0}, {105, 0}, {105, 10}, {-5, 10}};
    CHECK_NOTHROW(ann::validate_image(image));
}

TEST_CASE("fixture corpus instance count matches a line recount") {
    const fs::path dir = make_temp_dir("fixture10");
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> lines_per_image(1, 6);
    long expected = 0;
    for (int i = 0; i < 10; ++i) {
        std::string content;
        const int lines = lines_per_image(rng);
        for (int l = 0; l < lines; ++l) {
            const int y = 12 * l;
            content += "0," + std::to_string(y) + ",40," + std::to_string(y) + ",40," +
                       std::to_string(y + 10) + ",0," + std::to_string(y + 10) + ",word\n";
            ++expected;
        }
        write_file(dir / ("gt_img" + std::to_string(i) + ".txt"), content);
    }
    const ann::Dataset ds = ann::load_dataset(dir, ann::DatasetFormat::IcdarDir);
    long total = 0;
    for (const auto& image : ds.images) {
        total += static_cast<long>(image.instances.size());
    }
    CHECK(total == expected);
    fs::remove_all(dir);
}

TEST_CASE("unreadable path raises IoError") {
    CHECK_THROWS_AS(
        ann::load_dataset("/nonexistent/nowhere", ann::DatasetFormat::IcdarDir), IoError);
    CHECK_THROWS_AS(ann::load_dataset("/nonexistent/nowhere.jsonl",
                                      ann::DatasetFormat::Jsonl),
                    IoError);
}
