#pragma once

#include "octree.hpp"
#include "tensor.hpp"

#include <vector>

namespace octo {

/// Embedding tables lifted onto a tape (one node per table per forward).
struct WiredEmbeddings {
    Var value;  // 4 x D, row 0 reserved padding, rows 1..3 = cell values
    Var pos_x;  // S x D with S = 2^(max_depth+1) - 1; last row is the END slot
    Var pos_y;
    Var pos_z;
    Var cls;    // C x D
    int max_depth;

    int end_id() const { return int(end_spatial_id(max_depth)); }
};

/// Table row indices for one token: own value + position plus the successor's
/// position (END rows for the final token).
struct TokenIndices {
    int value;
    int px, py, pz;
    int sx, sy, sz;
};

TokenIndices token_indices(const Token& tok, const Token* successor, int max_depth);

/// Indices for every token in [begin, end) of a sequence. The successor of
/// token end-1 is seq.tokens[end] when it exists, END otherwise.
std::vector<TokenIndices> sequence_indices(const TokenSequence& seq, size_t begin, size_t end, int max_depth);

/// e(c_i) = v(c_i) + p_x(c_i) + p_y(c_i) + p_z(c_i) + p_x(c_{i+1}) + p_y(c_{i+1}) + p_z(c_{i+1}),
/// one row per entry. Row i depends only on entry i, so single-token and
/// whole-sequence evaluations agree bit for bit.
Var embed_rows(Tape& tape, const WiredEmbeddings& emb, const std::vector<TokenIndices>& idx);

/// Position-only sum p_x + p_y + p_z for a cell, added to decoder slots.
Var position_embedding(Tape& tape, const WiredEmbeddings& emb, uint32_t idx, uint32_t idy, uint32_t idz);

Var class_embedding(Tape& tape, const WiredEmbeddings& emb, int label);

} // namespace octo
