#include "voxel_grid.hpp"

#include "error.hpp"

#include <bit>
#include <fstream>

namespace octo {

namespace {

bool is_power_of_two(uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

int log2u(uint32_t v) {
    int l = 0;
    while ((uint32_t{1} << l) < v) ++l;
    return l;
}

} // namespace

VoxelGrid::VoxelGrid(uint32_t resolution, bool fill) {
    if (!is_power_of_two(resolution) || resolution < 2)
        throw_format("voxel grid resolution must be a power of two >= 2, got " + std::to_string(resolution));
    resolution_ = resolution;
    levels_ = log2u(resolution);
    uint64_t n = voxel_count();
    bits_.assign((n + 63) / 64, fill ? ~uint64_t{0} : uint64_t{0});
    if (fill && (n & 63) != 0)
        bits_.back() = (uint64_t{1} << (n & 63)) - 1;
}

uint64_t VoxelGrid::count_full() const {
    uint64_t c = 0;
    for (uint64_t w : bits_) c += std::popcount(w);
    return c;
}

std::vector<uint8_t> octv_bytes(const VoxelGrid& grid) {
    if (grid.resolution() == 0) throw_invalid("cannot serialize an empty grid");
    uint64_t n = grid.voxel_count();
    std::vector<uint8_t> out;
    out.reserve(9 + (n + 7) / 8);
    out.push_back('O');
    out.push_back('C');
    out.push_back('T');
    out.push_back('V');
    out.push_back(1); // version
    uint32_t res = grid.resolution();
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t((res >> (8 * i)) & 0xff));
    uint64_t nbytes = (n + 7) / 8;
    for (uint64_t b = 0; b < nbytes; ++b) {
        uint8_t byte = 0;
        for (int k = 0; k < 8; ++k) {
            uint64_t i = b * 8 + k;
            if (i < n && grid.get_linear(i)) byte |= uint8_t(1u << k);
        }
        out.push_back(byte);
    }
    return out;
}

VoxelGrid grid_from_octv_bytes(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 9 || bytes[0] != 'O' || bytes[1] != 'C' || bytes[2] != 'T' || bytes[3] != 'V')
        throw_format("not an OCTV file (bad magic)");
    if (bytes[4] != 1)
        throw_format("unsupported OCTV version " + std::to_string(bytes[4]));
    uint32_t res = 0;
    for (int i = 0; i < 4; ++i) res |= uint32_t(bytes[5 + i]) << (8 * i);
    if (res == 0 || (res & (res - 1)) != 0 || res < 2)
        throw_format("OCTV resolution must be a power of two >= 2, got " + std::to_string(res));
    VoxelGrid grid(res);
    uint64_t n = grid.voxel_count();
    uint64_t nbytes = (n + 7) / 8;
    if (bytes.size() != 9 + nbytes)
        throw_format("OCTV payload size mismatch: expected " + std::to_string(9 + nbytes) + " bytes, got " +
                     std::to_string(bytes.size()));
    for (uint64_t i = 0; i < n; ++i)
        if ((bytes[9 + (i >> 3)] >> (i & 7)) & 1u) grid.set_linear(i, true);
    return grid;
}

void save_octv(const VoxelGrid& grid, const std::string& path) {
    std::vector<uint8_t> bytes = octv_bytes(grid);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw_io("write failed for " + path);
}

VoxelGrid load_octv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return grid_from_octv_bytes(bytes);
}

} // namespace octo
