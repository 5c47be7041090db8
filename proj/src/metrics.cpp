#include "metrics.hpp"

#include "error.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "sampler.hpp"

#include <algorithm>
#include <sstream>

namespace octo {

namespace {

// Intersection and union are symmetric, so fine/coarse orientation is free.
void overlap_counts(const VoxelGrid& a, const VoxelGrid& b, uint64_t& inter, uint64_t& uni) {
    const VoxelGrid* fine = &a;
    const VoxelGrid* coarse = &b;
    if (fine->resolution() < coarse->resolution()) std::swap(fine, coarse);
    uint32_t res = fine->resolution();
    uint32_t factor = res / coarse->resolution();
    inter = 0;
    uni = 0;
    for (uint32_t z = 0; z < res; ++z)
        for (uint32_t y = 0; y < res; ++y)
            for (uint32_t x = 0; x < res; ++x) {
                bool va = fine->get(x, y, z);
                bool vb = coarse->get(x / factor, y / factor, z / factor);
                inter += va && vb;
                uni += va || vb;
            }
}

} // namespace

double iou_distance(const VoxelGrid& a, const VoxelGrid& b) {
    if (a.resolution() == 0 || b.resolution() == 0) throw_invalid("iou_distance: empty grid");
    uint32_t ra = a.resolution(), rb = b.resolution();
    if (ra % rb != 0 && rb % ra != 0) throw_invalid("iou_distance: resolutions are not nested");
    uint64_t inter = 0, uni = 0;
    overlap_counts(a, b, inter, uni);
    if (uni == 0) return 0.0; // both empty
    return 1.0 - double(inter) / double(uni);
}

double coverage(const std::vector<VoxelGrid>& gen, const std::vector<VoxelGrid>& ref) {
    if (gen.empty() || ref.empty()) throw_invalid("coverage: empty set");
    std::vector<char> matched(ref.size(), 0);
    for (const VoxelGrid& g : gen) {
        size_t best = 0;
        double best_d = iou_distance(g, ref[0]);
        for (size_t r = 1; r < ref.size(); ++r) {
            double d = iou_distance(g, ref[r]);
            if (d < best_d) {
                best_d = d;
                best = r;
            }
        }
        matched[best] = 1;
    }
    size_t count = 0;
    for (char m : matched) count += size_t(m);
    return 100.0 * double(count) / double(ref.size());
}

double mmd(const std::vector<VoxelGrid>& gen, const std::vector<VoxelGrid>& ref) {
    if (gen.empty() || ref.empty()) throw_invalid("mmd: empty set");
    double total = 0.0;
    for (const VoxelGrid& r : ref) {
        double best = iou_distance(gen[0], r);
        for (size_t g = 1; g < gen.size(); ++g) best = std::min(best, iou_distance(gen[g], r));
        total += best;
    }
    return total / double(ref.size());
}

std::string MetricsReport::to_text() const {
    std::ostringstream os;
    os << "COV: " << cov_percent << " %\n";
    os << "MMD: " << mmd_scaled << " (x1e-4; raw " << mmd_value << ")\n";
    os << "generated: " << gen_count << ", references: " << ref_count << "\n";
    os << "distance: " << distance_kind << ", seed: " << seed << "\n";
    return os.str();
}

std::string MetricsReport::to_csv() const {
    std::ostringstream os;
    os << "cov_percent,mmd_scaled,mmd_raw,gen_count,ref_count,distance,seed\n";
    os << cov_percent << ',' << mmd_scaled << ',' << mmd_value << ',' << gen_count << ',' << ref_count << ','
       << distance_kind << ',' << seed << "\n";
    return os.str();
}

MetricsReport evaluate_model(Model& model, const std::vector<VoxelGrid>& ref, int multiplier, double temperature,
                             int class_label, uint64_t seed) {
    if (ref.empty()) throw_invalid("evaluate_model: empty reference set");
    if (multiplier < 1) throw_invalid("evaluate_model: multiplier must be >= 1");
    std::vector<VoxelGrid> gen;
    gen.reserve(ref.size() * size_t(multiplier));
    Rng seeds(seed);
    for (size_t i = 0; i < ref.size() * size_t(multiplier); ++i) {
        SampleConfig sc;
        sc.temperature = temperature;
        sc.class_label = class_label;
        sc.seed = seeds.next_u64();
        gen.push_back(sample_shape(model, sc).grid);
    }
    MetricsReport rep;
    rep.cov_percent = coverage(gen, ref);
    rep.mmd_value = mmd(gen, ref);
    rep.mmd_scaled = rep.mmd_value * 1e4;
    rep.gen_count = gen.size();
    rep.ref_count = ref.size();
    rep.seed = seed;
    return rep;
}

} // namespace octo
