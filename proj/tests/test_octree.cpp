#include "error.hpp"
#include "octree.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace octo;

namespace {

std::vector<CellValue> values_of(const TokenSequence& seq) {
    std::vector<CellValue> v;
    v.reserve(seq.tokens.size());
    for (const Token& t : seq.tokens) v.push_back(t.value);
    return v;
}

} // namespace

TEST_CASE("uniform grids still subdivide the root") {
    Octree empty = build_octree(VoxelGrid(2, false));
    REQUIRE(empty.max_depth() == 1);
    REQUIRE(empty.level(1).size() == 8);
    for (const Cell& c : empty.level(1)) CHECK(c.value == CellValue::Empty);

    Octree full = build_octree(VoxelGrid(2, true));
    for (const Cell& c : full.level(1)) CHECK(c.value == CellValue::Full);
}

TEST_CASE("single full voxel lands at child index 4z+2y+x") {
    VoxelGrid g(2);
    g.set(0, 0, 0, true);
    Octree t = build_octree(g);
    REQUIRE(t.level(1).size() == 8);
    CHECK(t.level(1)[0].value == CellValue::Full);
    for (int i = 1; i < 8; ++i) CHECK(t.level(1)[size_t(i)].value == CellValue::Empty);

    // voxel (1,0,1): index 4*1+2*0+1 = 5
    VoxelGrid g2(2);
    g2.set(1, 0, 1, true);
    Octree t2 = build_octree(g2);
    CHECK(t2.level(1)[5].value == CellValue::Full);
}

TEST_CASE("expansion inverts construction bit-exactly on random grids") {
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        uint32_t res = 16;
        VoxelGrid g = (i % 2 == 0) ? test::random_grid(rng, res) : test::random_blocky_grid(rng, res);
        CHECK(octree_to_voxels(build_octree(g), res) == g);
    }
}

TEST_CASE("depth-1 full octant paints exactly its corner") {
    Octree t = delinearize({CellValue::Full, CellValue::Empty, CellValue::Empty, CellValue::Empty, CellValue::Empty,
                            CellValue::Empty, CellValue::Empty, CellValue::Empty});
    VoxelGrid g = octree_to_voxels(t, 2);
    CHECK(g.get(0, 0, 0));
    CHECK(g.count_full() == 1);

    // same tree painted at a finer resolution fills the whole octant
    VoxelGrid g4 = octree_to_voxels(t, 4);
    CHECK(g4.count_full() == 8);
    CHECK(g4.get(1, 1, 1));
    CHECK(!g4.get(2, 1, 1));
}

TEST_CASE("spatial ids accumulate 2^d - 2 per axis") {
    CHECK(spatial_ids(1, 0, 0, 0) == std::array<uint32_t, 3>{0, 0, 0});
    CHECK(spatial_ids(2, 3, 0, 1) == std::array<uint32_t, 3>{5, 2, 3});
    CHECK(spatial_ids(3, 0, 7, 0) == std::array<uint32_t, 3>{6, 13, 6});
    CHECK_THROWS_AS(axis_spatial_id(1, 2), Error);
}

TEST_CASE("spatial ids never collide across depths") {
    // id(d, i) ranges over [2^d - 2, 2^(d+1) - 2): disjoint intervals per depth.
    std::vector<bool> seen(uint32_t{1} << 7, false);
    for (int d = 1; d <= 5; ++d)
        for (uint32_t i = 0; i < (uint32_t{1} << d); ++i) {
            uint32_t id = axis_spatial_id(d, i);
            CHECK(!seen[id]);
            seen[id] = true;
        }
}

TEST_CASE("linearize emits breadth-first order with sibling counting rule") {
    VoxelGrid g(4);
    g.set(0, 0, 0, true); // only one voxel: depth-1 child 0 mixed, rest empty
    Octree t = build_octree(g);
    TokenSequence seq = linearize(t);
    REQUIRE(seq.tokens.size() == 16);
    CHECK(seq.tokens[0].value == CellValue::Mixed);
    for (int i = 1; i < 8; ++i) CHECK(seq.tokens[size_t(i)].value == CellValue::Empty);
    for (size_t i = 0; i < 8; ++i) CHECK(seq.tokens[i].depth == 1);
    for (size_t i = 8; i < 16; ++i) CHECK(seq.tokens[i].depth == 2);
    CHECK(seq.tokens[8].value == CellValue::Full);

    // depth-1 x ids come from {0, 1}
    for (size_t i = 0; i < 8; ++i) CHECK((seq.tokens[i].idx == 0 || seq.tokens[i].idx == 1));
}

TEST_CASE("fully mixed res-4 tree linearizes to 72 tokens") {
    TokenSequence seq = linearize(build_octree(test::fully_mixed_grid(4)));
    CHECK(seq.tokens.size() == 72);
    CHECK(seq.level_begin(2) == 8);
}

TEST_CASE("token count per level is eight times the mixed count above") {
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        Octree t = build_octree(test::random_blocky_grid(rng, 16));
        auto mixed = t.mixed_counts();
        auto tokens = t.token_counts();
        CHECK(tokens[0] == 8);
        for (size_t d = 1; d < tokens.size(); ++d) CHECK(tokens[d] == 8 * mixed[d - 1]);
        if (!tokens.empty()) CHECK(mixed.back() == 0);
    }
}

TEST_CASE("delinearize inverts linearize and recomputes ids") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        Octree t = build_octree(test::random_grid(rng, 8));
        TokenSequence seq = linearize(t);
        Octree back = delinearize(values_of(seq));
        TokenSequence seq2 = linearize(back);
        REQUIRE(seq2.tokens.size() == seq.tokens.size());
        for (size_t k = 0; k < seq.tokens.size(); ++k) {
            CHECK(seq2.tokens[k].value == seq.tokens[k].value);
            CHECK(seq2.tokens[k].depth == seq.tokens[k].depth);
            CHECK(seq2.tokens[k].idx == seq.tokens[k].idx);
            CHECK(seq2.tokens[k].idy == seq.tokens[k].idy);
            CHECK(seq2.tokens[k].idz == seq.tokens[k].idz);
        }
    }
}

TEST_CASE("uniform empty sequence decodes to the uniform tree") {
    std::vector<CellValue> vals(8, CellValue::Empty);
    Octree t = delinearize(vals);
    CHECK(t.max_depth() == 1);
    CHECK(octree_to_voxels(t, 2).count_full() == 0);
}

TEST_CASE("short sequences report the first missing index") {
    std::vector<CellValue> vals(8, CellValue::Empty);
    vals[0] = CellValue::Mixed;
    for (int i = 0; i < 7; ++i) vals.push_back(CellValue::Empty); // 7 of 8 children
    try {
        delinearize(vals);
        FAIL("expected malformed-sequence error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Format);
        CHECK(std::string(e.what()).find("15") != std::string::npos);
    }
}

TEST_CASE("trailing tokens report the first unexpected index") {
    std::vector<CellValue> vals(9, CellValue::Empty); // one too many
    try {
        delinearize(vals);
        FAIL("expected malformed-sequence error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("8") != std::string::npos);
    }
}

TEST_CASE("partial delinearize accepts whole-level prefixes only") {
    std::vector<CellValue> vals(8, CellValue::Empty);
    vals[0] = CellValue::Mixed;
    Octree t = delinearize_partial(vals);
    CHECK(t.max_depth() == 1);

    vals.push_back(CellValue::Full); // mid-level cut
    CHECK_THROWS_AS(delinearize_partial(vals), Error);
}

TEST_CASE("mixed leaf at the finest level is rejected when painting") {
    std::vector<CellValue> vals(8, CellValue::Empty);
    vals[3] = CellValue::Mixed;
    Octree t = delinearize_partial(vals);
    CHECK_THROWS_AS(octree_to_voxels(t, 2), Error);
    // the tolerant variant paints it full
    VoxelGrid g = octree_to_voxels_partial(t, 2);
    CHECK(g.count_full() == 1);
    CHECK(g.get(1, 1, 0)); // child index 3 = (x=1, y=1, z=0)
}

TEST_CASE("sequence files round-trip and validate their ids") {
    test::TempDir dir("seq");
    Rng rng(17);
    Octree t = build_octree(test::random_grid(rng, 8));
    TokenSequence seq = linearize(t);
    seq.class_label = 3;
    std::string path = dir.file("s.octoseq");
    save_sequence(seq, path);
    TokenSequence back = load_sequence(path);
    REQUIRE(back.tokens.size() == seq.tokens.size());
    CHECK(back.class_label == seq.class_label);
    for (size_t k = 0; k < seq.tokens.size(); ++k) {
        CHECK(back.tokens[k].value == seq.tokens[k].value);
        CHECK(back.tokens[k].idx == seq.tokens[k].idx);
    }

    // tamper with a spatial id: loader must reject
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    size_t lastline = content.rfind('\n', content.size() - 2);
    std::string tampered = content.substr(0, lastline + 1) + "1 9 99 99 99\n";
    std::ofstream out(path);
    out << tampered;
    out.close();
    CHECK_THROWS_AS(load_sequence(path), Error);
}
