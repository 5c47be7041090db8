#include "compressor.hpp"

#include "error.hpp"

namespace octo {

namespace {

Var subtree_vector(Tape& tape, const WiredModel& w, const Octree& tree, const Group& group,
                   const EmbedProvider& embed, int depth, int32_t cell_index) {
    if (depth == group.target_depth) return embed(depth, cell_index);
    const Cell& cell = tree.level(depth)[size_t(cell_index)];
    if (cell.value != CellValue::Mixed) return embed(depth, cell_index);
    if (cell.first_child < 0)
        throw_runtime("encode_group: mixed cell without children at depth " + std::to_string(depth));
    std::vector<Var> parts;
    parts.reserve(8);
    for (int i = 0; i < 8; ++i)
        parts.push_back(subtree_vector(tape, w, tree, group, embed, depth + 1, cell.first_child + i));
    int step = group.target_depth - 1 - depth;
    const WiredLevel& lv = w.level(group.target_depth);
    return tape.matmul(tape.concat_cols(parts), lv.enc_sib[size_t(step)]);
}

} // namespace

Var encode_group(Tape& tape, const WiredModel& w, const Octree& tree, const Group& group,
                 const EmbedProvider& embed) {
    const WiredLevel& lv = w.level(group.target_depth);
    const size_t d = size_t(w.cfg->width);
    std::vector<Var> slots;
    slots.reserve(group.ancestors.size());
    for (int32_t anc : group.ancestors) {
        if (anc < 0)
            slots.push_back(tape.constant(Matrix(1, d)));
        else
            slots.push_back(subtree_vector(tape, w, tree, group, embed, group.ancestor_depth, anc));
    }
    return tape.matmul(tape.concat_cols(slots), lv.enc_root);
}

} // namespace octo
