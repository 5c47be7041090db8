#include "config_file.hpp"
#include "datasets.hpp"
#include "error.hpp"
#include "export.hpp"
#include "stats.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace octo;

TEST_CASE("empty grid exports an obj with no faces") {
    test::TempDir dir("obj_empty");
    export_obj(VoxelGrid(4), dir.file("e.obj"));
    std::ifstream f(dir.file("e.obj"));
    std::string line;
    while (std::getline(f, line)) {
        CHECK(line.rfind("v ", 0) != 0);
        CHECK(line.rfind("f ", 0) != 0);
    }
}

TEST_CASE("a single voxel exports 8 vertices and 12 triangles") {
    test::TempDir dir("obj_one");
    VoxelGrid g(4);
    g.set(1, 2, 3, true);
    export_obj(g, dir.file("one.obj"));
    std::ifstream f(dir.file("one.obj"));
    std::string line;
    int verts = 0, faces = 0;
    while (std::getline(f, line)) {
        if (line.rfind("v ", 0) == 0) ++verts;
        if (line.rfind("f ", 0) == 0) ++faces;
    }
    CHECK(verts == 8);
    CHECK(faces == 12);
}

TEST_CASE("slices of an all-full grid are all white") {
    test::TempDir dir("slices");
    export_slices(VoxelGrid(4, true), dir.path());
    for (int z = 0; z < 4; ++z) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%04d.pgm", z);
        std::ifstream f(dir.file(name), std::ios::binary);
        REQUIRE(f.good());
        std::string header;
        std::getline(f, header);
        CHECK(header == "P5");
        std::string dims, maxv;
        std::getline(f, dims);
        std::getline(f, maxv);
        CHECK(dims == "4 4");
        for (int i = 0; i < 16; ++i) CHECK(uint8_t(f.get()) == 255);
    }
}

TEST_CASE("stats on a corpus of identical shapes equals that shape's counts") {
    test::TempDir dir("stats_same");
    VoxelGrid g = test::fully_mixed_grid(4);
    for (int i = 0; i < 3; ++i) save_octv(g, dir.file("g" + std::to_string(i) + ".octv"));
    CompressionScheme scheme = CompressionScheme::parse("0/8,0/8");
    auto stats = corpus_stats(dir.path(), scheme);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].resolution == 4);
    CHECK(stats[0].shape_count == 3);
    CHECK(stats[0].p90_tokens_total == 72);
    REQUIRE(stats[0].latents_per_depth.size() == 2);
    CHECK(stats[0].latents_per_depth[0] == 1); // 8/8
    CHECK(stats[0].latents_per_depth[1] == 8); // 64/8
    CHECK(stats[0].latents_total == 9);
}

TEST_CASE("identity scheme reports latent count equal to token count") {
    test::TempDir dir("stats_id");
    Rng rng(3);
    for (int i = 0; i < 5; ++i) save_octv(test::random_grid(rng, 8), dir.file("g" + std::to_string(i) + ".octv"));
    CompressionScheme scheme = CompressionScheme::parse("0/1");
    auto stats = corpus_stats(dir.path(), scheme);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].latents_total == stats[0].p90_tokens_total);
    std::string table = format_stats_table(stats, scheme);
    CHECK(table.find("0/1") != std::string::npos);
}

TEST_CASE("empty corpus errors") {
    test::TempDir dir("stats_empty");
    CHECK_THROWS_AS(corpus_stats(dir.path(), CompressionScheme::parse("0/1")), Error);
}

TEST_CASE("config files parse with defaults and reject unknown keys") {
    FullConfig cfg = parse_config_json(R"({"model": {"width": 32, "heads": 4}, "train": {"epochs": 3}})");
    CHECK(cfg.model.width == 32);
    CHECK(cfg.model.layers == 2); // default
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.alpha == 1.0);

    CHECK_THROWS_AS(parse_config_json(R"({"model": {"widht": 32}})"), Error);
    CHECK_THROWS_AS(parse_config_json("not json"), Error);
    CHECK_THROWS_AS(parse_config_json(R"({"train": {"warmup_fraction": 1.5}})"), Error);

    // round trip through the serializer
    FullConfig back = parse_config_json(config_to_json(cfg));
    CHECK(back.model.width == 32);
    CHECK(back.train.epochs == 3);
}
