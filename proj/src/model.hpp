#pragma once

#include "embedding.hpp"
#include "scheme.hpp"
#include "tensor.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace octo {

class Rng;

struct ModelConfig {
    int layers = 2;
    int heads = 4;
    int width = 64;
    int ff_width = 256;
    int max_positions = 2048;
    int class_count = 5; // last label is the unconditional slot
    std::string scheme_text = "0/1,0/1,0/2,0/4";
    int max_depth = 4;
    double dropout = 0.0;

    void validate() const;
    CompressionScheme scheme() const { return CompressionScheme::parse(scheme_text); }
    int unconditional_label() const { return class_count - 1; }
    bool operator==(const ModelConfig& o) const;
};

/// Per-depth compression/decompression weights for one scheme entry (a, b):
/// sibling convolutions (kernel/stride 8) for each collapse step, the
/// ancestor-run convolution (kernel/stride b), their transposed counterparts,
/// and the strictly lower-triangular block-mixing maps.
struct WiredLevel {
    SchemeEntry entry;
    Var enc_root;               // (b*D) x D
    Var dec_root;               // D x (b*D)
    Var root_block = nullptr;   // (pairs(b)*D) x D, absent when b == 1
    std::vector<Var> enc_sib;   // a entries, each (8D) x D; step t compresses depth l-t into l-t-1
    std::vector<Var> dec_expand; // a entries, each D x (8D)
    std::vector<Var> block;     // a entries, each (28*D) x D
};

struct WiredTransformerLayer {
    Var ln1_g, ln1_b;
    Var qkv_w, qkv_b;
    Var proj_w, proj_b;
    Var ln2_g, ln2_b;
    Var ff1_w, ff1_b;
    Var ff2_w, ff2_b;
};

struct WiredModel {
    const ModelConfig* cfg;
    WiredEmbeddings emb;
    std::vector<WiredLevel> levels; // index 0 = depth 1
    Var latent_pos;                 // max_positions x D
    std::vector<WiredTransformerLayer> layers;
    Var final_ln_g, final_ln_b;
    Var out_w; // D x 3
    Var out_b; // 1 x 3

    const WiredLevel& level(int depth) const { return levels[size_t(depth) - 1]; }
};

/// Number of (target, source) pairs in a strictly lower-triangular block of
/// size m, and the row-block offset of pair (j, k) inside the packed matrix.
inline size_t block_pair_count(int m) { return size_t(m) * size_t(m - 1) / 2; }
inline size_t block_pair_index(int j, int k) { return size_t(j) * size_t(j - 1) / 2 + size_t(k); }

class Model {
public:
    Model(ModelConfig cfg, uint64_t seed);

    const ModelConfig& config() const noexcept { return cfg_; }
    const CompressionScheme& scheme() const noexcept { return scheme_; }

    std::vector<Param*> params();
    Param& param(const std::string& name);
    bool has_param(const std::string& name) const { return by_name_.count(name) != 0; }
    void zero_grads();

    /// Lifts every parameter onto the tape exactly once.
    WiredModel wire(Tape& tape);

    /// Checkpoint container: magic OCTM, u16 version, config block, named
    /// f64 parameter records, trailing checksum.
    void save_checkpoint(const std::string& path) const;
    static Model load_checkpoint(const std::string& path);
    static Model load_checkpoint(const std::string& path, const ModelConfig& expected);

private:
    Param& add_param(const std::string& name, size_t rows, size_t cols, double sigma, Rng& rng);
    Param& add_const_param(const std::string& name, size_t rows, size_t cols, double fill);

    ModelConfig cfg_;
    CompressionScheme scheme_;
    std::vector<std::unique_ptr<Param>> params_;
    std::map<std::string, Param*> by_name_;
};

} // namespace octo
