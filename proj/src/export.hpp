#pragma once

#include "voxel_grid.hpp"

#include <string>

namespace octo {

/// One unit cube (8 vertices, 12 triangles) per full voxel.
void export_obj(const VoxelGrid& grid, const std::string& path);

/// res binary PGM images (P5), z-major, written as slice_%04d.pgm into dir.
/// Full voxels are white.
void export_slices(const VoxelGrid& grid, const std::string& dir);

} // namespace octo
