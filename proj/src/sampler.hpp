#pragma once

#include "model.hpp"
#include "octree.hpp"

#include <array>
#include <cstdint>

namespace octo {

struct SampleConfig {
    double temperature = 0.8; // 0 = argmax
    int max_depth = 0;        // 0 = model's max depth
    int class_label = -1;     // -1 = unconditional slot
    uint64_t seed = 0;

    void validate(const ModelConfig& cfg) const;
};

struct SampleResult {
    TokenSequence seq;
    VoxelGrid grid;
    size_t latent_count = 0;
    bool truncated = false; // latent budget ran out; seq holds the completed levels
};

/// softmax(logits / tau); tau = 0 puts all mass on the argmax (lowest index
/// wins ties).
std::array<double, 3> temperature_probs(const std::array<double, 3>& logits, double tau);

/// Generate one shape level by level, group by group, token by token. Each
/// finished group is re-encoded and appended to the latent sequence. At the
/// maximum depth the MIXED logit is masked, so sampling stops there at the
/// latest; it stops earlier once a level has no mixed cells.
SampleResult sample_shape(Model& model, const SampleConfig& cfg);

/// Continue a whole-level prefix up to target_depth. The prefix is force-fed
/// through the encoder and transformer; the output sequence starts with the
/// prefix verbatim.
SampleResult superresolve(Model& model, const TokenSequence& prefix, int target_depth, const SampleConfig& cfg);

} // namespace octo
