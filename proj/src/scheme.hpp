#pragma once

#include "octree.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

struct SchemeEntry {
    int collapse_depth; // a: depth of the subtrees collapsed into their ancestor
    int group_size;     // b: how many ancestor-level cells share one latent
};

/// Per-depth compression factors, written "a/b[,a/b...]" with entry i applying
/// at octree depth i+1. Trees deeper than the list reuse the last entry.
class CompressionScheme {
public:
    static CompressionScheme parse(const std::string& text);
    /// Same entry at every level, with a clamped to depth-1 where it would
    /// reach above the root.
    static CompressionScheme uniform(int a, int b, int depth);

    explicit CompressionScheme(std::vector<SchemeEntry> entries);

    const std::vector<SchemeEntry>& entries() const noexcept { return entries_; }
    SchemeEntry entry_for_depth(int depth) const;
    std::string to_text() const;

    bool operator==(const CompressionScheme& o) const {
        if (entries_.size() != o.entries_.size()) return false;
        for (size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].collapse_depth != o.entries_[i].collapse_depth ||
                entries_[i].group_size != o.entries_[i].group_size)
                return false;
        return true;
    }

private:
    std::vector<SchemeEntry> entries_;
};

/// One group: a run of b consecutive cells at the ancestor depth, generating
/// every depth-`target_depth` descendant of those cells. The run is padded at
/// the end of a level; padded slots hold -1 and contribute zero vectors.
struct Group {
    int target_depth;
    int ancestor_depth;
    int collapse_depth; // a
    int group_size;     // b
    std::vector<int32_t> ancestors; // indices into level(ancestor_depth), -1 = padding
    size_t token_begin;             // global token index of first generated token
    size_t token_end;               // one past the last generated token
};

/// Deterministic token -> group partition: groups are level-major, then by
/// first ancestor position. Every token is generated by exactly one group.
struct GroupLayout {
    std::vector<Group> groups;
    size_t group_count() const noexcept { return groups.size(); }
};

GroupLayout plan_groups(const Octree& tree, const CompressionScheme& scheme);

/// Groups for a single level. Planning reads only the structure of levels
/// up to `depth`, never cell values at `depth`, so the sampler can plan a
/// level before generating it. `level_token_offset` is the global index of
/// the level's first token.
std::vector<Group> plan_level_groups(const Octree& tree, const CompressionScheme& scheme, int depth,
                                     size_t level_token_offset);

/// Latent counts per depth from raw token counts: level d with entry (a, b)
/// yields ceil(tokens[d-a] / b) latents.
std::vector<uint64_t> latent_counts_from_tokens(const std::vector<uint64_t>& tokens_per_depth,
                                                const CompressionScheme& scheme);

/// Same accounting, starting from per-depth mixed-cell counts.
std::vector<uint64_t> expected_latent_counts(const std::vector<uint32_t>& mixed_counts,
                                             const CompressionScheme& scheme);

} // namespace octo
