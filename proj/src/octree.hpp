#pragma once

#include "voxel_grid.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace octo {

enum class CellValue : uint8_t {
    Empty = 1,
    Mixed = 2,
    Full = 3,
};

inline bool is_leaf(CellValue v) { return v != CellValue::Mixed; }

struct Cell {
    CellValue value;
    uint32_t x, y, z;    // cell coordinates at the cell's depth, each in [0, 2^depth)
    int32_t parent;      // index into the previous level, -1 at depth 1
    int32_t first_child; // index of child block start in the next level, -1 for leaves
};

/// Hierarchical cell tree. The root is implicit and always subdivided, so
/// level(1) holds exactly 8 cells. Mixed cells have exactly 8 children laid
/// out contiguously in the next level, ordered by child index 4z+2y+x.
class Octree {
public:
    int max_depth() const noexcept { return int(levels_.size()); }
    const std::vector<Cell>& level(int depth) const { return levels_[size_t(depth) - 1]; }
    std::vector<Cell>& level(int depth) { return levels_[size_t(depth) - 1]; }
    void add_level() { levels_.emplace_back(); }

    size_t total_cells() const;
    std::vector<uint32_t> mixed_counts() const; // mixed cells per depth, index 0 = depth 1
    std::vector<uint32_t> token_counts() const; // cells per depth, index 0 = depth 1

    /// Removes the finest level and clears the child links into it.
    void drop_last_level();

private:
    std::vector<std::vector<Cell>> levels_;
};

struct Token {
    CellValue value;
    uint16_t depth;
    uint32_t idx, idy, idz; // per-axis spatial ids, unique across depths
};

struct TokenSequence {
    std::vector<Token> tokens;
    std::optional<int> class_label;
    std::vector<size_t> level_offsets; // level_offsets[d-1] = index of first depth-d token
    int max_depth() const noexcept { return int(level_offsets.size()); }
    size_t level_begin(int depth) const { return level_offsets[size_t(depth) - 1]; }
    size_t level_end(int depth) const {
        return depth == max_depth() ? tokens.size() : level_offsets[size_t(depth)];
    }
};

/// id(d, i) = 2^d - 2 + i; ids at different depths never collide.
uint32_t axis_spatial_id(int depth, uint32_t i);
std::array<uint32_t, 3> spatial_ids(int depth, uint32_t x, uint32_t y, uint32_t z);

/// Reserved successor id for the final token of a sequence, one past every
/// valid id for depths up to max_depth.
uint32_t end_spatial_id(int max_depth);

Octree build_octree(const VoxelGrid& grid);
VoxelGrid octree_to_voxels(const Octree& tree, uint32_t resolution);

/// Paints like octree_to_voxels but fills mixed cells that lack children
/// (tolerates trees truncated mid-construction).
VoxelGrid octree_to_voxels_partial(const Octree& tree, uint32_t resolution);

TokenSequence linearize(const Octree& tree);
Octree delinearize(const std::vector<CellValue>& values);

/// Like delinearize, but the value stream may stop at any level boundary,
/// leaving mixed cells at the finest parsed level without children. Errors
/// if the stream stops mid-level.
Octree delinearize_partial(const std::vector<CellValue>& values);

/// Line-oriented sequence file: header "#octoseq v1 class=<int|none>", then
/// one token per line as "value depth idx idy idz".
void save_sequence(const TokenSequence& seq, const std::string& path);
TokenSequence load_sequence(const std::string& path);

} // namespace octo
