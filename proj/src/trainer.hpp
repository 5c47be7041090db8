#pragma once

#include "model.hpp"
#include "octree.hpp"
#include "voxel_grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace octo {

struct AugmentConfig {
    double probability = 0.5;
    int control_points = 2;    // interior control points per axis
    double scale_min = 0.75;   // segment slope range of the warp
    double scale_max = 1.25;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double warmup_fraction = 0.1; // of total steps, learning rate rises linearly from 0
    int epochs = 50;
    int batch_size = 1;
    double alpha = 1.0;                  // depth weight factor
    size_t max_compressed_length = 3400; // shapes with longer latent sequences are dropped
    double temperature = 0.8;            // carried into sampling defaults
    uint64_t seed = 0;
    AugmentConfig augment;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool verbose = false;

    void validate() const;
};

struct TrainItem {
    VoxelGrid grid;
    int label; // class label; callers map -1 to the unconditional slot
};

struct TrainResult {
    size_t steps = 0;
    size_t kept_shapes = 0;
    double final_loss = 0.0;
    double final_bits_per_token = 0.0;
};

/// Monotone piecewise-linear warp per axis: segment slopes drawn uniformly
/// from the scale range and renormalized so [0,res] maps onto [0,res]; each
/// output voxel takes the nearest source voxel.
VoxelGrid augment_grid(const VoxelGrid& grid, uint64_t seed, const AugmentConfig& cfg);

/// Mean over all uncompressed tokens in the dataset of -log2 p(target).
double bits_per_token(Model& model, const std::vector<TrainItem>& items);

/// Adam with linear warmup. Per-epoch bits/token is logged to the metrics CSV
/// ("epoch,step,loss,bits_per_token,lr"); pass an empty path to skip the log.
TrainResult train(Model& model, const std::vector<TrainItem>& items, const TrainConfig& cfg,
                  const std::string& metrics_csv_path);

} // namespace octo
