#include "transformer.hpp"

#include "error.hpp"

#include <cmath>

namespace octo {

namespace {

constexpr double kLnEps = 1e-5;

Matrix dropout_mask(size_t rows, size_t cols, double rate, Rng& rng) {
    Matrix m(rows, cols);
    double keep = 1.0 / (1.0 - rate);
    for (double& v : m.data) v = rng.uniform01() < rate ? 0.0 : keep;
    return m;
}

} // namespace

Var transformer_forward(Tape& tape, const WiredModel& w, const std::vector<Var>& latents, int class_label,
                        bool training, Rng* dropout_rng) {
    const ModelConfig& cfg = *w.cfg;
    const size_t d = size_t(cfg.width);
    const size_t n = latents.size() + 1;
    if (n > size_t(cfg.max_positions))
        throw_runtime("latent sequence of length " + std::to_string(latents.size()) +
                      " exceeds the model's " + std::to_string(cfg.max_positions) + " positions");

    std::vector<Var> rows;
    rows.reserve(n);
    rows.push_back(class_embedding(tape, w.emb, class_label));
    for (Var l : latents) rows.push_back(l);
    Var x = tape.concat_rows(rows);

    std::vector<int> pos_idx(n);
    for (size_t i = 0; i < n; ++i) pos_idx[i] = int(i);
    x = tape.add(x, tape.gather_rows(w.latent_pos, std::move(pos_idx)));

    const bool drop = training && cfg.dropout > 0.0 && dropout_rng != nullptr;
    const int heads = cfg.heads;
    const size_t dh = d / size_t(heads);
    const double scale = 1.0 / std::sqrt(double(dh));

    for (const WiredTransformerLayer& layer : w.layers) {
        Var h = tape.layer_norm(x, layer.ln1_g, layer.ln1_b, kLnEps);
        Var qkv = tape.linear(h, layer.qkv_w, layer.qkv_b);
        std::vector<Var> head_outs;
        head_outs.reserve(size_t(heads));
        for (int hd = 0; hd < heads; ++hd) {
            size_t off = size_t(hd) * dh;
            Var q = tape.slice_cols(qkv, off, off + dh);
            Var k = tape.slice_cols(qkv, d + off, d + off + dh);
            Var v = tape.slice_cols(qkv, 2 * d + off, 2 * d + off + dh);
            Var scores = tape.scale(tape.matmul_nt(q, k), scale);
            Var attn = tape.causal_softmax(scores);
            head_outs.push_back(tape.matmul(attn, v));
        }
        Var ctx = tape.concat_cols(head_outs);
        Var attn_out = tape.linear(ctx, layer.proj_w, layer.proj_b);
        if (drop) attn_out = tape.dropout(attn_out, dropout_mask(n, d, cfg.dropout, *dropout_rng));
        x = tape.add(x, attn_out);

        Var h2 = tape.layer_norm(x, layer.ln2_g, layer.ln2_b, kLnEps);
        Var ff = tape.linear(tape.gelu(tape.linear(h2, layer.ff1_w, layer.ff1_b)), layer.ff2_w, layer.ff2_b);
        if (drop) ff = tape.dropout(ff, dropout_mask(n, d, cfg.dropout, *dropout_rng));
        x = tape.add(x, ff);
    }
    return tape.layer_norm(x, w.final_ln_g, w.final_ln_b, kLnEps);
}

} // namespace octo
