#include "sampler.hpp"

#include "compressor.hpp"
#include "decoder_head.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "transformer.hpp"

#include <cmath>
#include <limits>

namespace octo {

void SampleConfig::validate(const ModelConfig& cfg) const {
    if (temperature < 0.0) throw_invalid("temperature must be >= 0");
    if (max_depth < 0 || max_depth > cfg.max_depth)
        throw_invalid("sample max depth must be within the model's max depth");
    if (class_label >= cfg.class_count) throw_invalid("class label out of range");
}

std::array<double, 3> temperature_probs(const std::array<double, 3>& logits, double tau) {
    if (tau < 0.0) throw_invalid("temperature must be >= 0");
    std::array<double, 3> p;
    if (tau == 0.0) {
        size_t best = 0;
        for (size_t i = 1; i < 3; ++i)
            if (logits[i] > logits[best]) best = i;
        p = {0.0, 0.0, 0.0};
        p[best] = 1.0;
        return p;
    }
    for (size_t i = 0; i < 3; ++i) p[i] = logits[i] / tau;
    softmax_inplace(p.data(), 3);
    return p;
}

namespace {

/// Successor-aware embedding indices computed from tree structure alone. For
/// the last cell of a level the successor is the first child of the level's
/// first mixed cell (that level is complete whenever this runs), or END when
/// none exists. Matches sequence_indices on complete sequences.
TokenIndices cell_indices(const Octree& tree, int depth, int32_t ci, int model_max_depth) {
    const Cell& c = tree.level(depth)[size_t(ci)];
    auto ids = spatial_ids(depth, c.x, c.y, c.z);
    Token tok{c.value, uint16_t(depth), ids[0], ids[1], ids[2]};
    const auto& cells = tree.level(depth);
    if (size_t(ci) + 1 < cells.size()) {
        const Cell& s = cells[size_t(ci) + 1];
        auto sids = spatial_ids(depth, s.x, s.y, s.z);
        Token succ{s.value, uint16_t(depth), sids[0], sids[1], sids[2]};
        return token_indices(tok, &succ, model_max_depth);
    }
    for (const Cell& s : cells) {
        if (s.value != CellValue::Mixed) continue;
        auto sids = spatial_ids(depth + 1, 2 * s.x, 2 * s.y, 2 * s.z);
        Token succ{CellValue::Empty, uint16_t(depth + 1), sids[0], sids[1], sids[2]};
        return token_indices(tok, &succ, model_max_depth);
    }
    return token_indices(tok, nullptr, model_max_depth);
}

struct Generator {
    Model& model;
    const SampleConfig& cfg;
    int label;
    int max_depth;
    Rng rng;
    Octree tree;
    std::vector<Matrix> latents;
    bool truncated = false;

    Generator(Model& m, const SampleConfig& c)
        : model(m), cfg(c),
          label(c.class_label >= 0 ? c.class_label : m.config().unconditional_label()),
          max_depth(c.max_depth > 0 ? c.max_depth : m.config().max_depth),
          rng(c.seed) {}

    /// Appends the next level's cells (children of the previous level's mixed
    /// cells). Returns false when there is nothing to extend.
    bool extend_level(int depth) {
        if (depth == 1) {
            tree.add_level();
            for (int i = 0; i < 8; ++i) {
                uint32_t x = uint32_t(i) & 1, y = (uint32_t(i) >> 1) & 1, z = (uint32_t(i) >> 2) & 1;
                tree.level(1).push_back({CellValue::Empty, x, y, z, -1, -1});
            }
            return true;
        }
        bool any = false;
        for (const Cell& p : tree.level(depth - 1))
            if (p.value == CellValue::Mixed) { any = true; break; }
        if (!any) return false;
        tree.add_level(); // may reallocate; take level references after this
        auto& parents = tree.level(depth - 1);
        auto& cells = tree.level(depth);
        for (size_t pi = 0; pi < parents.size(); ++pi) {
            Cell& p = parents[pi];
            if (p.value != CellValue::Mixed) continue;
            p.first_child = int32_t(cells.size());
            for (int i = 0; i < 8; ++i) {
                uint32_t cx = 2 * p.x + (uint32_t(i) & 1);
                uint32_t cy = 2 * p.y + ((uint32_t(i) >> 1) & 1);
                uint32_t cz = 2 * p.z + ((uint32_t(i) >> 2) & 1);
                cells.push_back({CellValue::Empty, cx, cy, cz, int32_t(pi), -1});
            }
        }
        return true;
    }

    CellValue draw(const std::array<double, 3>& logits, bool mask_mixed) {
        std::array<double, 3> l = logits;
        if (mask_mixed) l[1] = -std::numeric_limits<double>::infinity();
        std::array<double, 3> p = temperature_probs(l, cfg.temperature);
        double u = rng.uniform01();
        double acc = 0.0;
        for (size_t i = 0; i < 3; ++i) {
            acc += p[i];
            if (u < acc) return CellValue(int(i) + 1);
        }
        return CellValue::Full; // u landed on the tail of accumulated rounding
    }

    /// Feeds one group: decodes it (sampling values into the tree unless the
    /// level is force-fed) and appends its re-encoded latent. Returns false
    /// on latent budget exhaustion.
    bool run_group(const Group& g, bool force_fed) {
        if (latents.size() + 1 > size_t(model.config().max_positions)) {
            truncated = true;
            return false;
        }
        Tape tape(false);
        WiredModel w = model.wire(tape);
        auto embed = [&](int depth, int32_t cell) -> Var {
            return embed_rows(tape, w.emb, {cell_indices(tree, depth, cell, model.config().max_depth)});
        };
        if (!force_fed) {
            size_t level_off = 0;
            for (int d = 1; d < g.target_depth; ++d) level_off += tree.level(d).size();
            std::vector<Var> lat_vars;
            lat_vars.reserve(latents.size());
            for (const Matrix& m : latents) lat_vars.push_back(tape.constant(m));
            Var ctx_all = transformer_forward(tape, w, lat_vars, label);
            Var ctx = tape.row(ctx_all, latents.size());
            const bool mask_mixed = g.target_depth == max_depth;
            auto choose = [&](size_t idx, Var logits) {
                const Matrix& l = logits->value;
                CellValue v = draw({l.at(0, 0), l.at(0, 1), l.at(0, 2)}, mask_mixed);
                // record before the decoder asks for this token's embedding
                tree.level(g.target_depth)[idx - level_off].value = v;
                return v;
            };
            decode_group(tape, w, tree, g, ctx, embed, choose);
        }
        Var latent = encode_group(tape, w, tree, g, embed);
        latents.push_back(latent->value);
        return true;
    }

    /// Generates levels [from_depth, max_depth]. Assumes levels below
    /// from_depth are complete and their groups already encoded.
    void run(int from_depth) {
        const CompressionScheme& scheme = model.scheme();
        for (int depth = from_depth; depth <= max_depth; ++depth) {
            if (!extend_level(depth)) break;
            size_t off = 0;
            for (int d = 1; d < depth; ++d) off += tree.level(d).size();
            auto groups = plan_level_groups(tree, scheme, depth, off);
            bool ok = true;
            for (const Group& g : groups) {
                if (!run_group(g, false)) { ok = false; break; }
            }
            if (!ok) {
                tree.drop_last_level();
                break;
            }
        }
    }

    SampleResult finish() {
        SampleResult r;
        r.seq = linearize(tree);
        r.seq.class_label = label;
        uint32_t res = uint32_t{1} << max_depth;
        r.grid = truncated ? octree_to_voxels_partial(tree, res) : octree_to_voxels(tree, res);
        r.latent_count = latents.size();
        r.truncated = truncated;
        return r;
    }
};

} // namespace

SampleResult sample_shape(Model& model, const SampleConfig& cfg) {
    cfg.validate(model.config());
    Generator gen(model, cfg);
    gen.run(1);
    return gen.finish();
}

SampleResult superresolve(Model& model, const TokenSequence& prefix, int target_depth, const SampleConfig& cfg) {
    cfg.validate(model.config());
    if (target_depth < 1 || target_depth > model.config().max_depth)
        throw_invalid("target depth must be within the model's max depth");
    if (prefix.tokens.empty()) throw_invalid("prefix must not be empty");

    std::vector<CellValue> values;
    values.reserve(prefix.tokens.size());
    for (const Token& t : prefix.tokens) values.push_back(t.value);
    Octree ptree = delinearize_partial(values); // errors on mid-level prefixes
    if (ptree.max_depth() > target_depth)
        throw_invalid("prefix is deeper than the requested target depth");

    SampleConfig inner = cfg;
    inner.max_depth = target_depth;
    if (inner.class_label < 0 && prefix.class_label) inner.class_label = *prefix.class_label;
    Generator gen(model, inner);
    gen.tree = std::move(ptree);

    // Force-feed the prefix: encode its groups in order to build the latent
    // sequence the continuation conditions on.
    const CompressionScheme& scheme = model.scheme();
    size_t off = 0;
    for (int depth = 1; depth <= gen.tree.max_depth(); ++depth) {
        auto groups = plan_level_groups(gen.tree, scheme, depth, off);
        off += gen.tree.level(depth).size();
        for (const Group& g : groups)
            if (!gen.run_group(g, true))
                throw_runtime("prefix alone exceeds the model's latent positions");
    }
    int prefix_depth = gen.tree.max_depth();
    gen.run(prefix_depth + 1);
    return gen.finish();
}

} // namespace octo
