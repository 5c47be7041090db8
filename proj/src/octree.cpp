#include "octree.hpp"

#include "error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace octo {

size_t Octree::total_cells() const {
    size_t n = 0;
    for (int d = 1; d <= max_depth(); ++d) n += level(d).size();
    return n;
}

std::vector<uint32_t> Octree::mixed_counts() const {
    std::vector<uint32_t> counts;
    counts.reserve(levels_.size());
    for (const auto& cells : levels_) {
        uint32_t m = 0;
        for (const Cell& c : cells)
            if (c.value == CellValue::Mixed) ++m;
        counts.push_back(m);
    }
    return counts;
}

std::vector<uint32_t> Octree::token_counts() const {
    std::vector<uint32_t> counts;
    counts.reserve(levels_.size());
    for (const auto& cells : levels_) counts.push_back(uint32_t(cells.size()));
    return counts;
}

void Octree::drop_last_level() {
    if (levels_.empty()) throw_invalid("drop_last_level: tree is empty");
    levels_.pop_back();
    if (!levels_.empty())
        for (Cell& c : levels_.back()) c.first_child = -1;
}

uint32_t axis_spatial_id(int depth, uint32_t i) {
    if (depth < 1) throw_invalid("spatial id depth must be >= 1");
    uint32_t cells = uint32_t{1} << depth;
    if (i >= cells)
        throw_invalid("cell index " + std::to_string(i) + " out of range for depth " + std::to_string(depth));
    return cells - 2 + i;
}

std::array<uint32_t, 3> spatial_ids(int depth, uint32_t x, uint32_t y, uint32_t z) {
    return {axis_spatial_id(depth, x), axis_spatial_id(depth, y), axis_spatial_id(depth, z)};
}

uint32_t end_spatial_id(int max_depth) {
    return (uint32_t{1} << (max_depth + 1)) - 2;
}

Octree build_octree(const VoxelGrid& grid) {
    if (grid.resolution() == 0) throw_format("cannot build an octree from an empty grid");
    const int L = grid.levels();
    const uint32_t res = grid.resolution();

    // Per-level full-voxel counts, built bottom-up. counts[d][cell] is the
    // number of full voxels inside the cell at depth d (d = 0 is the root).
    std::vector<std::vector<uint32_t>> counts(size_t(L) + 1);
    counts[size_t(L)].resize(size_t(res) * res * res);
    {
        auto& fine = counts[size_t(L)];
        for (uint32_t z = 0; z < res; ++z)
            for (uint32_t y = 0; y < res; ++y)
                for (uint32_t x = 0; x < res; ++x)
                    fine[(size_t(z) * res + y) * res + x] = grid.get(x, y, z) ? 1u : 0u;
    }
    for (int d = L - 1; d >= 0; --d) {
        uint32_t n = uint32_t{1} << d;
        counts[size_t(d)].assign(size_t(n) * n * n, 0);
        uint32_t n1 = n * 2;
        const auto& child = counts[size_t(d) + 1];
        auto& cur = counts[size_t(d)];
        for (uint32_t z = 0; z < n; ++z)
            for (uint32_t y = 0; y < n; ++y)
                for (uint32_t x = 0; x < n; ++x) {
                    uint32_t sum = 0;
                    for (int i = 0; i < 8; ++i) {
                        uint32_t cx = 2 * x + (uint32_t(i) & 1);
                        uint32_t cy = 2 * y + ((uint32_t(i) >> 1) & 1);
                        uint32_t cz = 2 * z + ((uint32_t(i) >> 2) & 1);
                        sum += child[(size_t(cz) * n1 + cy) * n1 + cx];
                    }
                    cur[(size_t(z) * n + y) * n + x] = sum;
                }
    }

    auto cell_value = [&](int d, uint32_t x, uint32_t y, uint32_t z) {
        uint32_t n = uint32_t{1} << d;
        uint64_t cube = uint64_t{1} << (3 * (L - d));
        uint32_t c = counts[size_t(d)][(size_t(z) * n + y) * n + x];
        if (c == 0) return CellValue::Empty;
        if (c == cube) return CellValue::Full;
        return CellValue::Mixed;
    };

    Octree tree;
    // The root is always subdivided: depth 1 always holds 8 cells.
    tree.add_level();
    for (int i = 0; i < 8; ++i) {
        uint32_t x = uint32_t(i) & 1, y = (uint32_t(i) >> 1) & 1, z = (uint32_t(i) >> 2) & 1;
        tree.level(1).push_back({cell_value(1, x, y, z), x, y, z, -1, -1});
    }
    for (int d = 1; d < L; ++d) {
        bool any_mixed = false;
        for (const Cell& c : tree.level(d))
            if (c.value == CellValue::Mixed) { any_mixed = true; break; }
        if (!any_mixed) break;
        tree.add_level(); // may reallocate; take level references after this
        auto& cur = tree.level(d);
        auto& next = tree.level(d + 1);
        for (size_t pi = 0; pi < cur.size(); ++pi) {
            Cell& p = cur[pi];
            if (p.value != CellValue::Mixed) continue;
            p.first_child = int32_t(next.size());
            for (int i = 0; i < 8; ++i) {
                uint32_t cx = 2 * p.x + (uint32_t(i) & 1);
                uint32_t cy = 2 * p.y + ((uint32_t(i) >> 1) & 1);
                uint32_t cz = 2 * p.z + ((uint32_t(i) >> 2) & 1);
                next.push_back({cell_value(d + 1, cx, cy, cz), cx, cy, cz, int32_t(pi), -1});
            }
        }
    }
    return tree;
}

namespace {

void paint_leaves(const Octree& tree, uint32_t resolution, bool fill_childless_mixed, VoxelGrid& grid) {
    const int L = tree.max_depth();
    for (int d = 1; d <= L; ++d) {
        uint32_t scale = resolution >> d; // voxels per cell edge
        for (const Cell& c : tree.level(d)) {
            bool paint_full;
            if (c.value == CellValue::Full) {
                paint_full = true;
            } else if (c.value == CellValue::Empty) {
                continue; // grid starts all-empty
            } else if (c.first_child >= 0) {
                continue; // children cover it
            } else if (fill_childless_mixed) {
                paint_full = true;
            } else {
                throw_format("invalid tree: mixed cell without children at depth " + std::to_string(d));
            }
            if (!paint_full) continue;
            for (uint32_t dz = 0; dz < scale; ++dz)
                for (uint32_t dy = 0; dy < scale; ++dy)
                    for (uint32_t dx = 0; dx < scale; ++dx)
                        grid.set(c.x * scale + dx, c.y * scale + dy, c.z * scale + dz, true);
        }
    }
}

} // namespace

VoxelGrid octree_to_voxels(const Octree& tree, uint32_t resolution) {
    if (tree.max_depth() == 0) throw_invalid("cannot expand an empty tree");
    if (resolution < (uint32_t{1} << tree.max_depth()))
        throw_invalid("resolution " + std::to_string(resolution) + " is below the tree's finest level");
    VoxelGrid grid(resolution);
    paint_leaves(tree, resolution, false, grid);
    return grid;
}

VoxelGrid octree_to_voxels_partial(const Octree& tree, uint32_t resolution) {
    if (tree.max_depth() == 0) throw_invalid("cannot expand an empty tree");
    if (resolution < (uint32_t{1} << tree.max_depth()))
        throw_invalid("resolution " + std::to_string(resolution) + " is below the tree's finest level");
    VoxelGrid grid(resolution);
    paint_leaves(tree, resolution, true, grid);
    return grid;
}

TokenSequence linearize(const Octree& tree) {
    TokenSequence seq;
    seq.tokens.reserve(tree.total_cells());
    for (int d = 1; d <= tree.max_depth(); ++d) {
        seq.level_offsets.push_back(seq.tokens.size());
        for (const Cell& c : tree.level(d)) {
            auto ids = spatial_ids(d, c.x, c.y, c.z);
            seq.tokens.push_back({c.value, uint16_t(d), ids[0], ids[1], ids[2]});
        }
    }
    return seq;
}

namespace {

Octree delinearize_impl(const std::vector<CellValue>& values, bool allow_partial) {
    Octree tree;
    size_t pos = 0;
    int depth = 1;
    // Depth-1 cells always exist and are the root's 8 children.
    std::vector<size_t> expected{8};
    while (true) {
        size_t n = expected.back();
        if (allow_partial && pos == values.size() && depth > 1) break;
        if (values.size() < pos + n)
            throw_format("malformed sequence: expected a token at index " + std::to_string(values.size()));
        tree.add_level();
        auto& cells = tree.level(depth);
        cells.reserve(n);
        if (depth == 1) {
            for (int i = 0; i < 8; ++i) {
                CellValue v = values[pos + size_t(i)];
                if (v != CellValue::Empty && v != CellValue::Mixed && v != CellValue::Full)
                    throw_format("malformed sequence: invalid value at index " + std::to_string(pos + size_t(i)));
                uint32_t x = uint32_t(i) & 1, y = (uint32_t(i) >> 1) & 1, z = (uint32_t(i) >> 2) & 1;
                cells.push_back({v, x, y, z, -1, -1});
            }
        } else {
            auto& parents = tree.level(depth - 1);
            size_t k = pos;
            for (size_t pi = 0; pi < parents.size(); ++pi) {
                Cell& p = parents[pi];
                if (p.value != CellValue::Mixed) continue;
                p.first_child = int32_t(cells.size());
                for (int i = 0; i < 8; ++i) {
                    CellValue v = values[k];
                    if (v != CellValue::Empty && v != CellValue::Mixed && v != CellValue::Full)
                        throw_format("malformed sequence: invalid value at index " + std::to_string(k));
                    uint32_t cx = 2 * p.x + (uint32_t(i) & 1);
                    uint32_t cy = 2 * p.y + ((uint32_t(i) >> 1) & 1);
                    uint32_t cz = 2 * p.z + ((uint32_t(i) >> 2) & 1);
                    cells.push_back({v, cx, cy, cz, int32_t(pi), -1});
                    ++k;
                }
            }
        }
        pos += n;
        size_t mixed = 0;
        for (const Cell& c : cells)
            if (c.value == CellValue::Mixed) ++mixed;
        if (mixed == 0) break;
        expected.push_back(mixed * 8);
        ++depth;
    }
    if (pos != values.size())
        throw_format("malformed sequence: unexpected token at index " + std::to_string(pos));
    return tree;
}

} // namespace

Octree delinearize(const std::vector<CellValue>& values) { return delinearize_impl(values, false); }

Octree delinearize_partial(const std::vector<CellValue>& values) { return delinearize_impl(values, true); }

void save_sequence(const TokenSequence& seq, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw_io("cannot open " + path + " for writing");
    f << "#octoseq v1 class=";
    if (seq.class_label)
        f << *seq.class_label;
    else
        f << "none";
    f << "\n";
    for (const Token& t : seq.tokens)
        f << int(t.value) << ' ' << t.depth << ' ' << t.idx << ' ' << t.idy << ' ' << t.idz << "\n";
    if (!f) throw_io("write failed for " + path);
}

TokenSequence load_sequence(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw_io("cannot open " + path);
    std::string header;
    if (!std::getline(f, header)) throw_format(path + ": missing header line");
    const std::string prefix = "#octoseq v1 class=";
    if (header.rfind(prefix, 0) != 0) throw_format(path + ": bad header line");
    std::string cls = header.substr(prefix.size());
    TokenSequence seq;
    if (cls != "none") {
        int label = 0;
        auto [p, ec] = std::from_chars(cls.data(), cls.data() + cls.size(), label);
        if (ec != std::errc() || p != cls.data() + cls.size())
            throw_format(path + ": bad class field '" + cls + "'");
        seq.class_label = label;
    }
    std::string line;
    size_t lineno = 1;
    std::vector<CellValue> values;
    std::vector<std::array<uint32_t, 4>> meta; // depth, idx, idy, idz
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        int v = 0, d = 0;
        long long ix = 0, iy = 0, iz = 0;
        if (!(ls >> v >> d >> ix >> iy >> iz))
            throw_format(path + ":" + std::to_string(lineno) + ": bad token line");
        if (v < 1 || v > 3) throw_format(path + ":" + std::to_string(lineno) + ": value must be 1, 2 or 3");
        if (d < 1 || d > 30) throw_format(path + ":" + std::to_string(lineno) + ": bad depth");
        values.push_back(CellValue(v));
        meta.push_back({uint32_t(d), uint32_t(ix), uint32_t(iy), uint32_t(iz)});
    }
    // Rebuild the tree from values alone; spatial ids and depths are derived,
    // so stored ones must agree or the file is inconsistent.
    Octree tree = delinearize(values);
    TokenSequence derived = linearize(tree);
    derived.class_label = seq.class_label;
    for (size_t i = 0; i < derived.tokens.size(); ++i) {
        const Token& t = derived.tokens[i];
        if (meta[i][0] != t.depth || meta[i][1] != t.idx || meta[i][2] != t.idy || meta[i][3] != t.idz)
            throw_format(path + ": token " + std::to_string(i) + " has inconsistent depth or spatial ids");
    }
    return derived;
}

} // namespace octo
