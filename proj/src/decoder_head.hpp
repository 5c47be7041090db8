#pragma once

#include "compressor.hpp"
#include "model.hpp"
#include "octree.hpp"
#include "scheme.hpp"
#include "tensor.hpp"

#include <functional>

namespace octo {

struct DecodedToken {
    size_t token_index; // global position in the uncompressed sequence
    Var logits;         // 1 x 3 raw logits, finalized before the value was chosen
    CellValue value;
};

/// Decides a token's value from its logits. Teacher forcing returns the
/// target; sampling draws and records the value on the in-construction tree.
using TokenValueFn = std::function<CellValue(size_t token_index, Var logits)>;

/// Expand one group's context vector back into per-token logits, preserving
/// the autoregressive order of the uncompressed sequence.
///
/// The context is upsampled stride-b into the ancestor slots, then stride-8
/// through every collapse step, expanding only below mixed cells; each token
/// slot receives its spatial position embedding. Tokens are then visited in
/// sequence order: a slot's logits are read, its value chosen, and its
/// embedding passed to later slots of the same 8-sibling block through the
/// strictly lower-triangular block maps. When a block finishes, its sibling
/// convolution (shared with the encoder) lifts a summary to the parent slot,
/// the parent-level block maps carry it to later parents, and the deltas are
/// pushed back down through the transposed convolutions into not-yet-sampled
/// slots. Cells without children never contribute upward.
std::vector<DecodedToken> decode_group(Tape& tape, const WiredModel& w, const Octree& tree, const Group& group,
                                       Var ctx, const EmbedProvider& embed, const TokenValueFn& choose);

} // namespace octo
