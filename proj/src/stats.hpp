#pragma once

#include "scheme.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

struct ResolutionStats {
    uint32_t resolution = 0;
    size_t shape_count = 0;
    std::vector<uint64_t> p90_tokens_per_depth; // 90th percentile per depth layer
    uint64_t p90_tokens_total = 0;
    std::vector<uint64_t> latents_per_depth; // under the given scheme
    uint64_t latents_total = 0;
};

/// Per-resolution 90th-percentile token counts (per depth layer, summed) and
/// the latent counts the scheme yields for them.
std::vector<ResolutionStats> corpus_stats(const std::string& dir, const CompressionScheme& scheme);

std::string format_stats_table(const std::vector<ResolutionStats>& stats, const CompressionScheme& scheme);

} // namespace octo
