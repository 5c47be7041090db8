#pragma once

#include "voxel_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

enum class ShapeKind {
    Box = 0,
    Sphere = 1,
    Cylinder = 2,
    Union = 3, // union of 1-3 random primitives
    Mixed = 4, // cycles through the four kinds above
};

ShapeKind shape_kind_from_name(const std::string& name);
std::string shape_kind_name(ShapeKind kind);

enum class LabelMode {
    ByKind,   // class = primitive kind
    PerShape, // class = shape index
};

struct DatasetSpec {
    ShapeKind kind = ShapeKind::Mixed;
    uint32_t resolution = 16;
    int count = 10;
    LabelMode label_mode = LabelMode::ByKind;
    uint64_t seed = 0;
};

struct DatasetItemInfo {
    std::string filename;
    int label;
    std::string parameters; // human-readable primitive description
};

struct GeneratedShape {
    VoxelGrid grid;
    int label;
    std::string parameters;
};

/// Deterministic procedural shape for index i of the spec.
GeneratedShape make_shape(const DatasetSpec& spec, int index);

std::vector<GeneratedShape> make_shapes(const DatasetSpec& spec);

/// Writes shape_%04d.octv files plus manifest.csv (filename,class,parameters).
std::vector<DatasetItemInfo> write_dataset(const DatasetSpec& spec, const std::string& dir);

/// Every *.octv file in the directory, sorted by filename.
std::vector<std::string> list_octv_files(const std::string& dir);

/// Loads grids listed in manifest.csv (with labels) or, absent a manifest,
/// every *.octv with label -1.
struct CorpusItem {
    VoxelGrid grid;
    int label;
};
std::vector<CorpusItem> load_corpus(const std::string& dir);

} // namespace octo
