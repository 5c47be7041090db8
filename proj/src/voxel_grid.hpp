#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

/// Cubic binary occupancy grid. Resolution is a power of two (>= 2) and the
/// occupancy bits are packed x-fastest, then y, then z.
class VoxelGrid {
public:
    VoxelGrid() = default;
    explicit VoxelGrid(uint32_t resolution, bool fill = false);

    uint32_t resolution() const noexcept { return resolution_; }
    int levels() const noexcept { return levels_; }
    uint64_t voxel_count() const noexcept {
        uint64_t r = resolution_;
        return r * r * r;
    }

    bool get(uint32_t x, uint32_t y, uint32_t z) const {
        uint64_t i = index(x, y, z);
        return (bits_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(uint32_t x, uint32_t y, uint32_t z, bool v) {
        uint64_t i = index(x, y, z);
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v)
            bits_[i >> 6] |= mask;
        else
            bits_[i >> 6] &= ~mask;
    }

    bool get_linear(uint64_t i) const { return (bits_[i >> 6] >> (i & 63)) & 1u; }
    void set_linear(uint64_t i, bool v) {
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v)
            bits_[i >> 6] |= mask;
        else
            bits_[i >> 6] &= ~mask;
    }

    uint64_t count_full() const;

    bool operator==(const VoxelGrid& other) const {
        return resolution_ == other.resolution_ && bits_ == other.bits_;
    }
    bool operator!=(const VoxelGrid& other) const { return !(*this == other); }

private:
    uint64_t index(uint32_t x, uint32_t y, uint32_t z) const {
        uint64_t r = resolution_;
        return (uint64_t(z) * r + y) * r + x;
    }

    uint32_t resolution_ = 0;
    int levels_ = 0;
    std::vector<uint64_t> bits_;
};

/// OCTV container: magic "OCTV", version u8 = 1, u32 LE resolution, then
/// ceil(res^3/8) bytes of bit-packed occupancy (x-fastest, bit 0 = first voxel).
void save_octv(const VoxelGrid& grid, const std::string& path);
VoxelGrid load_octv(const std::string& path);

std::vector<uint8_t> octv_bytes(const VoxelGrid& grid);
VoxelGrid grid_from_octv_bytes(const std::vector<uint8_t>& bytes);

} // namespace octo
