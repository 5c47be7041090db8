#pragma once

#include "model.hpp"
#include "octree.hpp"
#include "scheme.hpp"
#include "tensor.hpp"

#include <functional>

namespace octo {

/// Embedding lookup for the cell at (depth, index-in-level) as a 1 x D row.
/// Training slices rows of a precomputed sequence embedding; sampling embeds
/// cells on the fly. Both must route through embed_rows so values agree.
using EmbedProvider = std::function<Var(int depth, int32_t cell_index)>;

/// Compress one group into a single latent: collapse each 8-sibling block with
/// the level's stride-8 convolution and place the result at the parent slot
/// (leaf parents keep their own embedding), repeating per collapse step, then
/// apply the stride-b convolution over the b ancestor slots. Padded slots
/// contribute zero vectors.
Var encode_group(Tape& tape, const WiredModel& w, const Octree& tree, const Group& group,
                 const EmbedProvider& embed);

} // namespace octo
