#include "scheme.hpp"

#include "error.hpp"

#include <algorithm>
#include <charconv>

namespace octo {

namespace {

int parse_int(const std::string& text, size_t begin, size_t end) {
    int v = 0;
    auto [p, ec] = std::from_chars(text.data() + begin, text.data() + end, v);
    if (ec != std::errc() || p != text.data() + end)
        throw_format("malformed scheme entry '" + text.substr(begin, end - begin) + "'");
    return v;
}

} // namespace

CompressionScheme::CompressionScheme(std::vector<SchemeEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw_format("compression scheme needs at least one entry");
    for (size_t i = 0; i < entries_.size(); ++i) {
        const SchemeEntry& e = entries_[i];
        int depth = int(i) + 1;
        if (e.group_size != 1 && e.group_size != 2 && e.group_size != 4 && e.group_size != 8)
            throw_format("scheme group size must be 1, 2, 4 or 8, got " + std::to_string(e.group_size));
        if (e.collapse_depth < 0) throw_format("scheme collapse depth must be >= 0");
        if (e.collapse_depth >= depth)
            throw_format("scheme entry " + std::to_string(e.collapse_depth) + "/" + std::to_string(e.group_size) +
                         " at level " + std::to_string(depth) + ": collapse depth must be below the level");
    }
}

CompressionScheme CompressionScheme::parse(const std::string& text) {
    std::vector<SchemeEntry> entries;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        size_t end = comma == std::string::npos ? text.size() : comma;
        size_t slash = text.find('/', pos);
        if (slash == std::string::npos || slash >= end)
            throw_format("malformed scheme entry '" + text.substr(pos, end - pos) + "' (expected a/b)");
        entries.push_back({parse_int(text, pos, slash), parse_int(text, slash + 1, end)});
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return CompressionScheme(std::move(entries));
}

CompressionScheme CompressionScheme::uniform(int a, int b, int depth) {
    if (depth < 1) throw_invalid("scheme depth must be >= 1");
    std::vector<SchemeEntry> entries;
    entries.reserve(size_t(depth));
    for (int d = 1; d <= depth; ++d) entries.push_back({std::min(a, d - 1), b});
    return CompressionScheme(std::move(entries));
}

SchemeEntry CompressionScheme::entry_for_depth(int depth) const {
    if (depth < 1) throw_invalid("scheme depth must be >= 1");
    if (size_t(depth) <= entries_.size()) return entries_[size_t(depth) - 1];
    return entries_.back();
}

std::string CompressionScheme::to_text() const {
    std::string out;
    for (size_t i = 0; i < entries_.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(entries_[i].collapse_depth);
        out += '/';
        out += std::to_string(entries_[i].group_size);
    }
    return out;
}

std::vector<Group> plan_level_groups(const Octree& tree, const CompressionScheme& scheme, int depth,
                                     size_t level_token_offset) {
    SchemeEntry e = scheme.entry_for_depth(depth);
    if (e.collapse_depth >= depth)
        throw_invalid("scheme entry at level " + std::to_string(depth) + " collapses above the root");
    int anc_depth = depth - e.collapse_depth;
    const auto& cells = tree.level(depth);
    const size_t anc_count = tree.level(anc_depth).size();

    // Ancestor index a levels up for each depth-`depth` cell. Monotone over
    // the level, so group token ranges are contiguous.
    std::vector<uint32_t> anc_of(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
        int32_t cur = int32_t(i);
        int d = depth;
        while (d > anc_depth) {
            cur = tree.level(d)[size_t(cur)].parent;
            --d;
        }
        anc_of[i] = uint32_t(cur);
    }

    std::vector<Group> groups;
    size_t next_token = 0;
    for (size_t start = 0; start < anc_count; start += size_t(e.group_size)) {
        Group g;
        g.target_depth = depth;
        g.ancestor_depth = anc_depth;
        g.collapse_depth = e.collapse_depth;
        g.group_size = e.group_size;
        g.ancestors.assign(size_t(e.group_size), -1);
        for (int k = 0; k < e.group_size && start + size_t(k) < anc_count; ++k)
            g.ancestors[size_t(k)] = int32_t(start + size_t(k));
        size_t begin = next_token;
        while (next_token < cells.size() && anc_of[next_token] < start + size_t(e.group_size)) ++next_token;
        g.token_begin = level_token_offset + begin;
        g.token_end = level_token_offset + next_token;
        groups.push_back(std::move(g));
    }
    return groups;
}

GroupLayout plan_groups(const Octree& tree, const CompressionScheme& scheme) {
    GroupLayout layout;
    size_t off = 0;
    for (int depth = 1; depth <= tree.max_depth(); ++depth) {
        auto groups = plan_level_groups(tree, scheme, depth, off);
        off += tree.level(depth).size();
        for (Group& g : groups) layout.groups.push_back(std::move(g));
    }
    return layout;
}

std::vector<uint64_t> latent_counts_from_tokens(const std::vector<uint64_t>& tokens_per_depth,
                                                const CompressionScheme& scheme) {
    std::vector<uint64_t> out;
    out.reserve(tokens_per_depth.size());
    for (size_t i = 0; i < tokens_per_depth.size(); ++i) {
        int depth = int(i) + 1;
        SchemeEntry e = scheme.entry_for_depth(depth);
        if (e.collapse_depth >= depth)
            throw_invalid("scheme entry at level " + std::to_string(depth) + " collapses above the root");
        uint64_t anc_tokens = tokens_per_depth[size_t(depth - e.collapse_depth) - 1];
        out.push_back((anc_tokens + uint64_t(e.group_size) - 1) / uint64_t(e.group_size));
    }
    return out;
}

std::vector<uint64_t> expected_latent_counts(const std::vector<uint32_t>& mixed_counts,
                                             const CompressionScheme& scheme) {
    std::vector<uint64_t> tokens;
    tokens.reserve(mixed_counts.size());
    for (size_t i = 0; i < mixed_counts.size(); ++i) {
        uint64_t n = i == 0 ? 8 : uint64_t(mixed_counts[i - 1]) * 8;
        if (n == 0) throw_invalid("inconsistent counts: level " + std::to_string(i + 1) + " has no cells");
        if (uint64_t(mixed_counts[i]) > n)
            throw_invalid("inconsistent counts: more mixed cells than cells at level " + std::to_string(i + 1));
        tokens.push_back(n);
    }
    return latent_counts_from_tokens(tokens, scheme);
}

} // namespace octo
