#include "stats.hpp"

#include "datasets.hpp"
#include "error.hpp"
#include "octree.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace octo {

namespace {

uint64_t percentile90(std::vector<uint64_t>& values) {
    std::sort(values.begin(), values.end());
    // nearest-rank: ceil(0.9 * n)
    size_t rank = (values.size() * 9 + 9) / 10;
    if (rank == 0) rank = 1;
    return values[std::min(values.size(), rank) - 1];
}

} // namespace

std::vector<ResolutionStats> corpus_stats(const std::string& dir, const CompressionScheme& scheme) {
    auto files = list_octv_files(dir);
    if (files.empty()) throw_io("no .octv files in " + dir);

    // per resolution: per shape: token counts per depth
    std::map<uint32_t, std::vector<std::vector<uint32_t>>> by_res;
    for (const std::string& f : files) {
        VoxelGrid g = load_octv(f);
        Octree tree = build_octree(g);
        by_res[g.resolution()].push_back(tree.token_counts());
    }

    std::vector<ResolutionStats> out;
    for (auto& [res, shapes] : by_res) {
        size_t max_depth = 0;
        for (const auto& counts : shapes) max_depth = std::max(max_depth, counts.size());
        ResolutionStats st;
        st.resolution = res;
        st.shape_count = shapes.size();
        for (size_t d = 0; d < max_depth; ++d) {
            std::vector<uint64_t> values;
            values.reserve(shapes.size());
            for (const auto& counts : shapes) values.push_back(d < counts.size() ? counts[d] : 0);
            st.p90_tokens_per_depth.push_back(percentile90(values));
        }
        for (uint64_t t : st.p90_tokens_per_depth) st.p90_tokens_total += t;
        st.latents_per_depth = latent_counts_from_tokens(st.p90_tokens_per_depth, scheme);
        for (uint64_t l : st.latents_per_depth) st.latents_total += l;
        out.push_back(std::move(st));
    }
    return out;
}

std::string format_stats_table(const std::vector<ResolutionStats>& stats, const CompressionScheme& scheme) {
    std::ostringstream os;
    os << "scheme: " << scheme.to_text() << "\n";
    os << "res     shapes  tokens(p90)  latents   per-depth tokens -> latents\n";
    for (const ResolutionStats& st : stats) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-7u %-7zu %-12llu %-9llu ", st.resolution, st.shape_count,
                      (unsigned long long)st.p90_tokens_total, (unsigned long long)st.latents_total);
        os << buf;
        for (size_t d = 0; d < st.p90_tokens_per_depth.size(); ++d) {
            if (d) os << ", ";
            os << st.p90_tokens_per_depth[d] << "->" << st.latents_per_depth[d];
        }
        os << "\n";
    }
    return os.str();
}

} // namespace octo
