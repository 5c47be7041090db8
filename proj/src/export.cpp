#include "export.hpp"

#include "error.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace octo {

void export_obj(const VoxelGrid& grid, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw_io("cannot open " + path + " for writing");
    f << "# voxel cubes, " << grid.resolution() << "^3 grid\n";
    uint64_t base = 0;
    const uint32_t res = grid.resolution();
    static const int corner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    static const int tri[12][3] = {{0, 2, 1}, {0, 3, 2},  // bottom (z-)
                                   {4, 5, 6}, {4, 6, 7},  // top (z+)
                                   {0, 1, 5}, {0, 5, 4},  // y-
                                   {2, 3, 7}, {2, 7, 6},  // y+
                                   {1, 2, 6}, {1, 6, 5},  // x+
                                   {3, 0, 4}, {3, 4, 7}}; // x-
    for (uint32_t z = 0; z < res; ++z)
        for (uint32_t y = 0; y < res; ++y)
            for (uint32_t x = 0; x < res; ++x) {
                if (!grid.get(x, y, z)) continue;
                for (const auto& c : corner)
                    f << "v " << x + uint32_t(c[0]) << ' ' << y + uint32_t(c[1]) << ' ' << z + uint32_t(c[2]) << "\n";
                for (const auto& t : tri)
                    f << "f " << base + uint64_t(t[0]) + 1 << ' ' << base + uint64_t(t[1]) + 1 << ' '
                      << base + uint64_t(t[2]) + 1 << "\n";
                base += 8;
            }
    if (!f) throw_io("write failed for " + path);
}

void export_slices(const VoxelGrid& grid, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_io("cannot create directory " + dir);
    const uint32_t res = grid.resolution();
    for (uint32_t z = 0; z < res; ++z) {
        char name[32];
        std::snprintf(name, sizeof name, "slice_%04u.pgm", z);
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) throw_io("cannot write slice in " + dir);
        f << "P5\n" << res << ' ' << res << "\n255\n";
        for (uint32_t y = 0; y < res; ++y)
            for (uint32_t x = 0; x < res; ++x) f.put(grid.get(x, y, z) ? char(255) : char(0));
        if (!f) throw_io("write failed for slice in " + dir);
    }
}

} // namespace octo
