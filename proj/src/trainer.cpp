#include "trainer.hpp"

#include "error.hpp"
#include "pipeline.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace octo {

void TrainConfig::validate() const {
    if (learning_rate < 0.0) throw_invalid("train: learning rate must be >= 0");
    if (warmup_fraction <= 0.0 || warmup_fraction >= 1.0) throw_invalid("train: warmup fraction must be in (0, 1)");
    if (epochs < 1) throw_invalid("train: epochs must be >= 1");
    if (batch_size < 1) throw_invalid("train: batch size must be >= 1");
    if (alpha <= 0.0) throw_invalid("train: alpha must be > 0");
    if (max_compressed_length < 1) throw_invalid("train: max compressed length must be >= 1");
    if (augment.probability < 0.0 || augment.probability > 1.0) throw_invalid("train: augment probability in [0,1]");
    if (augment.control_points < 0) throw_invalid("train: control points must be >= 0");
    if (augment.scale_min <= 0.0 || augment.scale_max < augment.scale_min)
        throw_invalid("train: bad augment scale range");
}

VoxelGrid augment_grid(const VoxelGrid& grid, uint64_t seed, const AugmentConfig& cfg) {
    const uint32_t res = grid.resolution();
    Rng rng(seed);
    const int segs = cfg.control_points + 1;

    // Source-coordinate map per axis: monotone piecewise linear with uniform
    // breakpoints, slopes ~ U[scale_min, scale_max], renormalized so [0,res]
    // maps onto [0,res].
    auto build_map = [&](std::vector<double>& knots) {
        knots.assign(size_t(segs) + 1, 0.0);
        for (int i = 0; i < segs; ++i)
            knots[size_t(i) + 1] =
                knots[size_t(i)] + rng.uniform(cfg.scale_min, cfg.scale_max) * (double(res) / double(segs));
        double scale = double(res) / knots.back();
        for (double& k : knots) k *= scale;
    };

    std::vector<double> kx, ky, kz;
    build_map(kx);
    build_map(ky);
    build_map(kz);

    auto lookup = [&](const std::vector<double>& knots, uint32_t i) -> uint32_t {
        double t = (double(i) + 0.5) / double(res) * double(segs); // position in segments
        int seg = std::min(segs - 1, int(t));
        double frac = t - double(seg);
        double src = knots[size_t(seg)] + (knots[size_t(seg) + 1] - knots[size_t(seg)]) * frac;
        long v = long(src);
        if (v < 0) v = 0;
        if (v >= long(res)) v = long(res) - 1;
        return uint32_t(v);
    };

    std::vector<uint32_t> mx(res), my(res), mz(res);
    for (uint32_t i = 0; i < res; ++i) {
        mx[i] = lookup(kx, i);
        my[i] = lookup(ky, i);
        mz[i] = lookup(kz, i);
    }

    VoxelGrid out(res);
    for (uint32_t z = 0; z < res; ++z)
        for (uint32_t y = 0; y < res; ++y)
            for (uint32_t x = 0; x < res; ++x)
                if (grid.get(mx[x], my[y], mz[z])) out.set(x, y, z, true);
    return out;
}

namespace {

struct Prepared {
    Octree tree;
    TokenSequence seq;
    GroupLayout layout;
    int label;
};

Prepared prepare(const VoxelGrid& grid, int label, const CompressionScheme& scheme) {
    Prepared p;
    p.tree = build_octree(grid);
    p.seq = linearize(p.tree);
    p.layout = plan_groups(p.tree, scheme);
    p.label = label;
    return p;
}

} // namespace

double bits_per_token(Model& model, const std::vector<TrainItem>& items) {
    if (items.empty()) throw_invalid("bits_per_token: empty dataset");
    double bits = 0.0;
    size_t tokens = 0;
    for (const TrainItem& item : items) {
        Prepared p = prepare(item.grid, item.label, model.scheme());
        Tape tape(false);
        PipelineOutput out = forward_teacher(tape, model, p.tree, p.seq, p.layout, p.label);
        bits += sequence_bits(out, p.seq);
        tokens += p.seq.tokens.size();
    }
    return bits / double(tokens);
}

TrainResult train(Model& model, const std::vector<TrainItem>& items, const TrainConfig& cfg,
                  const std::string& metrics_csv_path) {
    cfg.validate();
    if (items.empty()) throw_invalid("train: empty dataset");
    const CompressionScheme& scheme = model.scheme();
    const size_t position_cap = size_t(model.config().max_positions) - 1;

    // Length filter on the un-augmented shapes.
    std::vector<TrainItem> kept;
    for (const TrainItem& item : items) {
        Prepared p = prepare(item.grid, item.label, scheme);
        size_t latents = p.layout.group_count();
        if (latents > cfg.max_compressed_length || latents > position_cap) continue;
        kept.push_back(item);
    }
    if (kept.empty()) throw_invalid("train: every shape was filtered out by the length limit");

    std::ofstream csv;
    if (!metrics_csv_path.empty()) {
        csv.open(metrics_csv_path);
        if (!csv) throw_io("cannot open " + metrics_csv_path + " for writing");
        csv << "epoch,step,loss,bits_per_token,lr\n";
    }

    Rng rng(cfg.seed);
    std::vector<Param*> params = model.params();
    for (Param* p : params) {
        if (p->adam_m.size() == 0) {
            p->adam_m = Matrix(p->value.rows, p->value.cols);
            p->adam_v = Matrix(p->value.rows, p->value.cols);
        }
    }

    const size_t n = kept.size();
    const size_t steps_per_epoch = (n + size_t(cfg.batch_size) - 1) / size_t(cfg.batch_size);
    const size_t total_steps = steps_per_epoch * size_t(cfg.epochs);
    const size_t warmup_steps = std::max<size_t>(1, size_t(cfg.warmup_fraction * double(total_steps)));

    TrainResult result;
    result.kept_shapes = n;
    size_t step = 0;
    size_t adam_t = 0;
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the run's RNG; deterministic given the seed.
        for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        for (size_t batch_start = 0; batch_start < n; batch_start += size_t(cfg.batch_size)) {
            size_t batch_end = std::min(n, batch_start + size_t(cfg.batch_size));
            double inv_batch = 1.0 / double(batch_end - batch_start);
            model.zero_grads();
            double batch_loss = 0.0;

            for (size_t bi = batch_start; bi < batch_end; ++bi) {
                const TrainItem& item = kept[order[bi]];
                VoxelGrid grid = item.grid;
                if (cfg.augment.probability > 0.0 && rng.uniform01() < cfg.augment.probability)
                    grid = augment_grid(grid, rng.next_u64(), cfg.augment);
                Prepared p = prepare(grid, item.label, scheme);
                if (p.layout.group_count() > position_cap) continue; // augmented shape grew past the cap

                Tape tape(true);
                Rng drop_rng(rng.next_u64());
                PipelineOutput out = forward_teacher(tape, model, p.tree, p.seq, p.layout, p.label, true, &drop_rng);
                Var loss = tape.scale(depth_weighted_loss(tape, out, p.seq, cfg.alpha), inv_batch);
                double lv = loss->value.at(0, 0);
                if (!std::isfinite(lv))
                    throw_runtime("train: non-finite loss at step " + std::to_string(step) +
                                  " (lr=" + std::to_string(cfg.learning_rate) + ")");
                batch_loss += lv;
                tape.backward(loss);
            }

            double lr = cfg.learning_rate;
            if (step < warmup_steps) lr = cfg.learning_rate * double(step + 1) / double(warmup_steps);
            ++adam_t;
            double bc1 = 1.0 - std::pow(cfg.adam_beta1, double(adam_t));
            double bc2 = 1.0 - std::pow(cfg.adam_beta2, double(adam_t));
            for (Param* p : params) {
                for (size_t i = 0; i < p->value.data.size(); ++i) {
                    double g = p->grad.data[i];
                    p->adam_m.data[i] = cfg.adam_beta1 * p->adam_m.data[i] + (1.0 - cfg.adam_beta1) * g;
                    p->adam_v.data[i] = cfg.adam_beta2 * p->adam_v.data[i] + (1.0 - cfg.adam_beta2) * g * g;
                    double mhat = p->adam_m.data[i] / bc1;
                    double vhat = p->adam_v.data[i] / bc2;
                    p->value.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
                }
            }

            result.final_loss = batch_loss;
            bool epoch_end = batch_end == n;
            if (epoch_end) result.final_bits_per_token = bits_per_token(model, kept);
            if (csv.is_open()) {
                csv << epoch << ',' << step << ',' << batch_loss << ',';
                if (epoch_end) csv << result.final_bits_per_token;
                csv << ',' << lr << "\n";
            }
            if (cfg.verbose && epoch_end)
                std::printf("epoch %d step %zu loss %.6f bits/token %.6f lr %.3g\n", epoch, step, batch_loss,
                            result.final_bits_per_token, lr);
            ++step;
        }
    }
    result.steps = step;
    if (csv.is_open() && !csv) throw_io("write failed for " + metrics_csv_path);
    return result;
}

} // namespace octo
