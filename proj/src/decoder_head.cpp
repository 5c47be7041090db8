#include "decoder_head.hpp"

#include "error.hpp"

#include <memory>

namespace octo {

namespace {

struct Slot {
    int depth;
    int32_t cell;
    Var vec;
    std::vector<std::unique_ptr<Slot>> children; // 8 when expanded
};

struct DecodeState {
    Tape& tape;
    const WiredModel& w;
    const Octree& tree;
    const Group& group;
    const EmbedProvider& embed;
    const TokenValueFn& choose;
    std::vector<DecodedToken> out;
    size_t next_token;
};

int expand_step(const Group& g, int parent_depth) { return g.target_depth - 1 - parent_depth; }

Var pair_map(Tape& tape, Var packed, int j, int k, size_t d) {
    size_t off = block_pair_index(j, k) * d;
    return tape.slice_rows(packed, off, off + d);
}

void build_slots(DecodeState& st, Slot& slot) {
    if (slot.depth == st.group.target_depth) {
        const Cell& cell = st.tree.level(slot.depth)[size_t(slot.cell)];
        auto ids = spatial_ids(slot.depth, cell.x, cell.y, cell.z);
        slot.vec = st.tape.add(slot.vec, position_embedding(st.tape, st.w.emb, ids[0], ids[1], ids[2]));
        return;
    }
    const Cell& cell = st.tree.level(slot.depth)[size_t(slot.cell)];
    if (cell.value != CellValue::Mixed) return; // leaf: conditioning only, never expanded
    if (cell.first_child < 0)
        throw_runtime("decode_group: mixed cell without children at depth " + std::to_string(slot.depth));
    const WiredLevel& lv = st.w.level(st.group.target_depth);
    size_t d = size_t(st.w.cfg->width);
    Var rows = st.tape.unflatten(st.tape.matmul(slot.vec, lv.dec_expand[size_t(expand_step(st.group, slot.depth))]), 8, d);
    slot.children.reserve(8);
    for (int i = 0; i < 8; ++i) {
        auto child = std::make_unique<Slot>();
        child->depth = slot.depth + 1;
        child->cell = cell.first_child + i;
        child->vec = st.tape.row(rows, size_t(i));
        slot.children.push_back(std::move(child));
        build_slots(st, *slot.children.back());
    }
}

void propagate_down(DecodeState& st, Slot& slot, Var delta) {
    slot.vec = st.tape.add(slot.vec, delta);
    if (slot.children.empty()) return;
    const WiredLevel& lv = st.w.level(st.group.target_depth);
    size_t d = size_t(st.w.cfg->width);
    Var rows = st.tape.unflatten(st.tape.matmul(delta, lv.dec_expand[size_t(expand_step(st.group, slot.depth))]), 8, d);
    for (int i = 0; i < 8; ++i) propagate_down(st, *slot.children[size_t(i)], st.tape.row(rows, size_t(i)));
}

/// Walks the subtree in sequence order, sampling tokens at the target depth,
/// and returns the subtree summary (the token/leaf embedding, or the sibling
/// convolution over the children's summaries).
Var walk(DecodeState& st, Slot& slot) {
    if (slot.depth == st.group.target_depth) {
        Var logits = st.tape.linear(slot.vec, st.w.out_w, st.w.out_b);
        size_t idx = st.next_token++;
        CellValue value = st.choose(idx, logits);
        st.out.push_back({idx, logits, value});
        return st.embed(slot.depth, slot.cell);
    }
    const Cell& cell = st.tree.level(slot.depth)[size_t(slot.cell)];
    if (cell.value != CellValue::Mixed) return st.embed(slot.depth, slot.cell);

    const WiredLevel& lv = st.w.level(st.group.target_depth);
    size_t d = size_t(st.w.cfg->width);
    int step = expand_step(st.group, slot.depth);
    Var block_maps = lv.block[size_t(step)];
    std::vector<Var> summaries(8);
    for (int j = 0; j < 8; ++j) {
        Slot& child = *slot.children[size_t(j)];
        bool child_contributes =
            child.depth == st.group.target_depth ||
            st.tree.level(child.depth)[size_t(child.cell)].value == CellValue::Mixed;
        summaries[size_t(j)] = walk(st, child);
        if (!child_contributes) continue;
        for (int q = j + 1; q < 8; ++q) {
            Var delta = st.tape.matmul(summaries[size_t(j)], pair_map(st.tape, block_maps, q, j, d));
            propagate_down(st, *slot.children[size_t(q)], delta);
        }
    }
    return st.tape.matmul(st.tape.concat_cols(summaries), lv.enc_sib[size_t(step)]);
}

} // namespace

std::vector<DecodedToken> decode_group(Tape& tape, const WiredModel& w, const Octree& tree, const Group& group,
                                       Var ctx, const EmbedProvider& embed, const TokenValueFn& choose) {
    DecodeState st{tape, w, tree, group, embed, choose, {}, group.token_begin};
    const WiredLevel& lv = w.level(group.target_depth);
    const size_t d = size_t(w.cfg->width);

    Var root_rows = tape.unflatten(tape.matmul(ctx, lv.dec_root), size_t(group.group_size), d);
    std::vector<std::unique_ptr<Slot>> members(group.ancestors.size());
    for (size_t i = 0; i < group.ancestors.size(); ++i) {
        if (group.ancestors[i] < 0) continue; // trailing padding
        auto slot = std::make_unique<Slot>();
        slot->depth = group.ancestor_depth;
        slot->cell = group.ancestors[i];
        slot->vec = tape.row(root_rows, i);
        members[i] = std::move(slot);
        build_slots(st, *members[i]);
    }

    for (size_t i = 0; i < members.size(); ++i) {
        if (!members[i]) break;
        Var summary = walk(st, *members[i]);
        bool contributes = group.collapse_depth == 0 ||
                           tree.level(group.ancestor_depth)[size_t(members[i]->cell)].value == CellValue::Mixed;
        if (!contributes || lv.root_block == nullptr) continue;
        for (size_t q = i + 1; q < members.size(); ++q) {
            if (!members[q]) break;
            Var delta = tape.matmul(summary, pair_map(tape, lv.root_block, int(q), int(i), d));
            propagate_down(st, *members[q], delta);
        }
    }

    if (st.next_token != group.token_end)
        throw_runtime("decode_group: generated token count does not match the group layout");
    return std::move(st.out);
}

} // namespace octo
