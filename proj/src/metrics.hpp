#pragma once

#include "voxel_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

class Model;

/// 1 - |A inter B| / |A union B|; two empty grids are at distance 0. Grids of
/// different resolutions are aligned by replicating the coarser one.
double iou_distance(const VoxelGrid& a, const VoxelGrid& b);

/// For each generated shape find its nearest reference (ties to the lowest
/// reference index); COV = 100 * |distinct matched references| / |ref|.
double coverage(const std::vector<VoxelGrid>& gen, const std::vector<VoxelGrid>& ref);

/// Mean over references of the minimum distance to the generated set.
double mmd(const std::vector<VoxelGrid>& gen, const std::vector<VoxelGrid>& ref);

struct MetricsReport {
    double cov_percent = 0.0;
    double mmd_value = 0.0;     // raw mean minimum distance
    double mmd_scaled = 0.0;    // x 10^4, the scale used in reported tables
    size_t gen_count = 0;
    size_t ref_count = 0;
    std::string distance_kind = "voxel-iou";
    uint64_t seed = 0;

    std::string to_text() const;
    std::string to_csv() const;
};

/// Samples multiplier * |ref| shapes from the model and scores them against
/// the reference set.
MetricsReport evaluate_model(Model& model, const std::vector<VoxelGrid>& ref, int multiplier, double temperature,
                             int class_label, uint64_t seed);

} // namespace octo
