#pragma once

#include "decoder_head.hpp"
#include "model.hpp"
#include "octree.hpp"
#include "rng.hpp"
#include "scheme.hpp"
#include "tensor.hpp"

namespace octo {

struct PipelineOutput {
    std::vector<Var> token_logits; // aligned with seq.tokens
    size_t group_count = 0;
};

/// Teacher-forced end-to-end forward: embed, compress every group, run the
/// transformer on [class, latent_1 .. latent_{n-1}], then decode each group
/// with ground-truth tokens. Returns the raw 3-way logits per token.
PipelineOutput forward_teacher(Tape& tape, Model& model, const Octree& tree, const TokenSequence& seq,
                               const GroupLayout& layout, int class_label, bool training = false,
                               Rng* dropout_rng = nullptr);

/// Depth-weighted NLL: raw weight alpha^(depth-1), rescaled per shape so the
/// mean over its tokens is exactly one, then averaged.
Var depth_weighted_loss(Tape& tape, const PipelineOutput& out, const TokenSequence& seq, double alpha);

/// Effective per-token weights used by depth_weighted_loss (mean is 1).
std::vector<double> normalized_depth_weights(const std::vector<int>& depths, double alpha);

/// Sum over tokens of -log2 p(target); divide by token count for bits/token.
double sequence_bits(const PipelineOutput& out, const TokenSequence& seq);

/// Convenience for gradient checking: grad-off forward + loss value.
double loss_value(Model& model, const Octree& tree, const TokenSequence& seq, const GroupLayout& layout,
                  int class_label, double alpha);

} // namespace octo
