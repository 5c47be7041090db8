#include "embedding.hpp"
#include "error.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

using namespace octo;

namespace {

/// Tables whose rows are one-hot into disjoint ranges of a shared width:
/// value rows at [0,4), p_x at [4,4+S), p_y and p_z after that.
struct OneHotTables {
    static constexpr int kMaxDepth = 1;
    size_t S;
    size_t D;
    Param value, px, py, pz, cls;

    OneHotTables()
        : S(end_spatial_id(kMaxDepth) + 1),
          D(4 + 3 * S),
          value("v", Matrix(4, D)),
          px("x", Matrix(S, D)),
          py("y", Matrix(S, D)),
          pz("z", Matrix(S, D)),
          cls("c", Matrix(2, D)) {
        for (size_t r = 0; r < 4; ++r) value.value.at(r, r) = 1.0;
        for (size_t r = 0; r < S; ++r) {
            px.value.at(r, 4 + r) = 1.0;
            py.value.at(r, 4 + S + r) = 1.0;
            pz.value.at(r, 4 + 2 * S + r) = 1.0;
        }
    }

    WiredEmbeddings wire(Tape& t) {
        return {t.param(value), t.param(px), t.param(py), t.param(pz), t.param(cls), kMaxDepth};
    }
};

} // namespace

TEST_CASE("zero tables embed every token to zero") {
    Param v("v", Matrix(4, 8)), x("x", Matrix(7, 8)), y("y", Matrix(7, 8)), z("z", Matrix(7, 8)), c("c", Matrix(2, 8));
    Tape t(false);
    WiredEmbeddings emb{t.param(v), t.param(x), t.param(y), t.param(z), t.param(c), 2};
    Var e = embed_rows(t, emb, {{3, 0, 0, 0, 1, 0, 0}});
    for (double d : e->value.data) CHECK(d == 0.0);
}

TEST_CASE("seven-term sum with coinciding indices accumulating") {
    OneHotTables tables;
    Tape t(false);
    WiredEmbeddings emb = tables.wire(t);
    // token value 3 at (0,0,0), successor at (1,0,0)
    Var e = embed_rows(t, emb, {{3, 0, 0, 0, 1, 0, 0}});
    const Matrix& m = e->value;
    size_t S = tables.S;
    CHECK(m.at(0, 3) == 1.0);         // value 3
    CHECK(m.at(0, 4 + 0) == 1.0);     // own p_x 0
    CHECK(m.at(0, 4 + 1) == 1.0);     // successor p_x 1
    CHECK(m.at(0, 4 + S) == 2.0);     // p_y 0 twice
    CHECK(m.at(0, 4 + 2 * S) == 2.0); // p_z 0 twice
    double total = 0.0;
    for (double d : m.data) total += d;
    CHECK(total == 7.0);
}

TEST_CASE("changing only the successor shifts the embedding by the position delta") {
    OneHotTables tables;
    Tape t(false);
    WiredEmbeddings emb = tables.wire(t);
    Var e1 = embed_rows(t, emb, {{2, 0, 1, 0, 0, 0, 1}});
    Var e2 = embed_rows(t, emb, {{2, 0, 1, 0, 1, 1, 0}});
    // e1 - e2 = p(succ1) - p(succ2)
    Var p1 = position_embedding(t, emb, 0, 0, 1);
    Var p2 = position_embedding(t, emb, 1, 1, 0);
    for (size_t i = 0; i < e1->value.size(); ++i)
        CHECK(e1->value.data[i] - e2->value.data[i] ==
              doctest::Approx(p1->value.data[i] - p2->value.data[i]).epsilon(1e-14));
}

TEST_CASE("sequence indices wire each token to its successor and END at the end") {
    VoxelGrid g(2);
    g.set(0, 0, 0, true);
    TokenSequence seq = linearize(build_octree(g));
    REQUIRE(seq.tokens.size() == 8);
    auto idx = sequence_indices(seq, 0, 8, 3);
    CHECK(idx.size() == 8);
    for (size_t i = 0; i + 1 < 8; ++i) {
        CHECK(idx[i].sx == int(seq.tokens[i + 1].idx));
        CHECK(idx[i].sy == int(seq.tokens[i + 1].idy));
    }
    CHECK(idx[7].sx == int(end_spatial_id(3)));
    CHECK(idx[7].sy == int(end_spatial_id(3)));

    // empty range: empty list
    CHECK(sequence_indices(seq, 3, 3, 3).empty());
}

TEST_CASE("row i of a sequence embedding depends only on tokens i and i+1") {
    Rng rng(31);
    Param v("v", Matrix(4, 6)), x("x", Matrix(15, 6)), y("y", Matrix(15, 6)), z("z", Matrix(15, 6)),
        c("c", Matrix(2, 6));
    for (Param* p : {&v, &x, &y, &z})
        for (double& d : p->value.data) d = rng.normal();

    Octree tree = build_octree(test::random_grid(rng, 4));
    TokenSequence seq = linearize(tree);
    auto indices = sequence_indices(seq, 0, seq.tokens.size(), 3);

    Tape t(false);
    WiredEmbeddings emb{t.param(v), t.param(x), t.param(y), t.param(z), t.param(c), 3};
    Var base = embed_rows(t, emb, indices);

    // flip a leaf token's value between empty and full; rows other than k-1's
    // successor-value... only row k carries the value, and no positions move
    for (size_t k = 0; k < seq.tokens.size(); ++k) {
        if (seq.tokens[k].value == CellValue::Mixed) continue;
        auto flipped = indices;
        flipped[k].value = flipped[k].value == 1 ? 3 : 1;
        Var alt = embed_rows(t, emb, flipped);
        for (size_t i = 0; i < seq.tokens.size(); ++i) {
            bool should_change = i == k;
            bool changed = false;
            for (size_t j = 0; j < 6; ++j)
                if (alt->value.at(i, j) != base->value.at(i, j)) changed = true;
            CHECK(changed == should_change);
        }
        break;
    }
}

TEST_CASE("class embedding bounds") {
    Param v("v", Matrix(4, 4)), x("x", Matrix(7, 4)), y("y", Matrix(7, 4)), z("z", Matrix(7, 4)), c("c", Matrix(3, 4));
    c.value.at(2, 1) = 5.0;
    Tape t(false);
    WiredEmbeddings emb{t.param(v), t.param(x), t.param(y), t.param(z), t.param(c), 2};
    CHECK(class_embedding(t, emb, 2)->value.at(0, 1) == 5.0);
    CHECK_THROWS_AS(class_embedding(t, emb, 3), Error);
    CHECK_THROWS_AS(class_embedding(t, emb, -1), Error);
}
