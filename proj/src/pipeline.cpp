#include "pipeline.hpp"

#include "compressor.hpp"
#include "error.hpp"
#include "transformer.hpp"

#include <cmath>

namespace octo {

PipelineOutput forward_teacher(Tape& tape, Model& model, const Octree& tree, const TokenSequence& seq,
                               const GroupLayout& layout, int class_label, bool training, Rng* dropout_rng) {
    const ModelConfig& cfg = model.config();
    if (seq.max_depth() > cfg.max_depth)
        throw_invalid("sequence depth " + std::to_string(seq.max_depth()) + " exceeds model max depth " +
                      std::to_string(cfg.max_depth));
    WiredModel w = model.wire(tape);

    Var e = embed_rows(tape, w.emb, sequence_indices(seq, 0, seq.tokens.size(), cfg.max_depth));
    auto embed = [&](int depth, int32_t cell) -> Var {
        return tape.row(e, seq.level_begin(depth) + size_t(cell));
    };

    const size_t n_groups = layout.groups.size();
    std::vector<Var> latents;
    latents.reserve(n_groups);
    for (const Group& g : layout.groups) latents.push_back(encode_group(tape, w, tree, g, embed));

    std::vector<Var> prefix(latents.begin(), latents.end() - 1);
    Var ctx = transformer_forward(tape, w, prefix, class_label, training, dropout_rng);

    PipelineOutput out;
    out.group_count = n_groups;
    out.token_logits.assign(seq.tokens.size(), nullptr);
    for (size_t g = 0; g < n_groups; ++g) {
        auto choose = [&](size_t idx, Var) { return seq.tokens[idx].value; };
        auto decoded = decode_group(tape, w, tree, layout.groups[g], tape.row(ctx, g), embed, choose);
        for (const DecodedToken& t : decoded) out.token_logits[t.token_index] = t.logits;
    }
    for (Var v : out.token_logits)
        if (v == nullptr) throw_runtime("forward_teacher: a token was not covered by any group");
    return out;
}

std::vector<double> normalized_depth_weights(const std::vector<int>& depths, double alpha) {
    if (alpha <= 0.0) throw_invalid("depth weight factor must be > 0");
    std::vector<double> w(depths.size());
    double sum = 0.0;
    for (size_t i = 0; i < depths.size(); ++i) {
        w[i] = std::pow(alpha, double(depths[i] - 1));
        sum += w[i];
    }
    if (depths.empty()) return w;
    double scale = double(depths.size()) / sum;
    for (double& x : w) x *= scale;
    return w;
}

Var depth_weighted_loss(Tape& tape, const PipelineOutput& out, const TokenSequence& seq, double alpha) {
    const size_t n = seq.tokens.size();
    if (out.token_logits.size() != n) throw_invalid("loss: logits/targets length mismatch");
    std::vector<int> depths(n);
    for (size_t i = 0; i < n; ++i) depths[i] = int(seq.tokens[i].depth);
    std::vector<double> w = normalized_depth_weights(depths, alpha);
    std::vector<Var> nlls;
    nlls.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        nlls.push_back(tape.nll_row(out.token_logits[i], int(seq.tokens[i].value) - 1));
        w[i] /= double(n);
    }
    return tape.sum_scaled(nlls, w);
}

double sequence_bits(const PipelineOutput& out, const TokenSequence& seq) {
    constexpr double kInvLn2 = 1.4426950408889634074;
    double bits = 0.0;
    for (size_t i = 0; i < seq.tokens.size(); ++i) {
        const Matrix& l = out.token_logits[i]->value;
        double nll = log_sum_exp(l.row_ptr(0), l.cols) - l.at(0, size_t(int(seq.tokens[i].value) - 1));
        bits += nll * kInvLn2;
    }
    return bits;
}

double loss_value(Model& model, const Octree& tree, const TokenSequence& seq, const GroupLayout& layout,
                  int class_label, double alpha) {
    Tape tape(false);
    PipelineOutput out = forward_teacher(tape, model, tree, seq, layout, class_label);
    std::vector<int> depths(seq.tokens.size());
    for (size_t i = 0; i < depths.size(); ++i) depths[i] = int(seq.tokens[i].depth);
    std::vector<double> w = normalized_depth_weights(depths, alpha);
    double loss = 0.0;
    for (size_t i = 0; i < depths.size(); ++i) {
        const Matrix& l = out.token_logits[i]->value;
        double nll = log_sum_exp(l.row_ptr(0), l.cols) - l.at(0, size_t(int(seq.tokens[i].value) - 1));
        loss += (w[i] / double(depths.size())) * nll;
    }
    return loss;
}

} // namespace octo
