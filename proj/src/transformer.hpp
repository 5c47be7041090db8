#pragma once

#include "model.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace octo {

/// Decoder-only causal transformer over the latent sequence.
///
/// Input row 0 is the class embedding, rows 1..n-1 the first n-1 latents;
/// learned latent-position embeddings are added to every row. Output row t is
/// the context vector that decodes group t. Masking is strict, so row t is a
/// function of input rows 0..t only, bit for bit.
Var transformer_forward(Tape& tape, const WiredModel& w, const std::vector<Var>& latents, int class_label,
                        bool training = false, Rng* dropout_rng = nullptr);

} // namespace octo
