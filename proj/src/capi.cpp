#include "octoformer/octoformer.h"

#include "config_file.hpp"
#include "datasets.hpp"
#include "error.hpp"
#include "export.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "octree.hpp"
#include "sampler.hpp"
#include "stats.hpp"
#include "trainer.hpp"
#include "voxel_grid.hpp"

#include <cstring>
#include <string>

using namespace octo;

struct octf_grid {
    VoxelGrid grid;
};
struct octf_sequence {
    TokenSequence seq;
};
struct octf_model {
    Model model;
};

namespace {

thread_local std::string t_last_error;

octf_status status_of(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::InvalidArgument: return OCTF_ERR_INVALID_ARGUMENT;
        case ErrorKind::Format: return OCTF_ERR_FORMAT;
        case ErrorKind::Io: return OCTF_ERR_IO;
        case ErrorKind::Runtime: return OCTF_ERR_RUNTIME;
    }
    return OCTF_ERR_RUNTIME;
}

template <typename Fn>
octf_status guarded(Fn&& fn) {
    try {
        fn();
        return OCTF_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return OCTF_ERR_RUNTIME;
    } catch (...) {
        t_last_error = "unknown error";
        return OCTF_ERR_RUNTIME;
    }
}

octf_status require(bool cond, const char* msg) {
    if (cond) return OCTF_OK;
    t_last_error = msg;
    return OCTF_ERR_INVALID_ARGUMENT;
}

octf_status fill_string(const std::string& s, char* buf, size_t buf_len, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (!buf) return OCTF_OK;
    if (buf_len < s.size() + 1) {
        t_last_error = "buffer too small";
        return OCTF_ERR_INVALID_ARGUMENT;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return OCTF_OK;
}

std::vector<TrainItem> corpus_items(const char* dir, int unconditional_label) {
    std::vector<TrainItem> items;
    for (CorpusItem& c : load_corpus(dir))
        items.push_back({std::move(c.grid), c.label < 0 ? unconditional_label : c.label});
    return items;
}

} // namespace

extern "C" {

const char* octf_last_error(void) { return t_last_error.c_str(); }

octf_status octf_grid_create(uint32_t resolution, octf_grid** out) {
    if (octf_status s = require(out != nullptr, "out must not be NULL")) return s;
    return guarded([&] { *out = new octf_grid{VoxelGrid(resolution)}; });
}

octf_status octf_grid_load(const char* path, octf_grid** out) {
    if (octf_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&] { *out = new octf_grid{load_octv(path)}; });
}

octf_status octf_grid_save(const octf_grid* grid, const char* path) {
    if (octf_status s = require(grid && path, "grid and path must not be NULL")) return s;
    return guarded([&] { save_octv(grid->grid, path); });
}

octf_status octf_grid_resolution(const octf_grid* grid, uint32_t* out) {
    if (octf_status s = require(grid && out, "grid and out must not be NULL")) return s;
    *out = grid->grid.resolution();
    return OCTF_OK;
}

octf_status octf_grid_get(const octf_grid* grid, uint32_t x, uint32_t y, uint32_t z, int* out) {
    if (octf_status s = require(grid && out, "grid and out must not be NULL")) return s;
    uint32_t r = grid->grid.resolution();
    if (octf_status s = require(x < r && y < r && z < r, "voxel coordinate out of range")) return s;
    *out = grid->grid.get(x, y, z) ? 1 : 0;
    return OCTF_OK;
}

octf_status octf_grid_set(octf_grid* grid, uint32_t x, uint32_t y, uint32_t z, int value) {
    if (octf_status s = require(grid != nullptr, "grid must not be NULL")) return s;
    uint32_t r = grid->grid.resolution();
    if (octf_status s = require(x < r && y < r && z < r, "voxel coordinate out of range")) return s;
    grid->grid.set(x, y, z, value != 0);
    return OCTF_OK;
}

octf_status octf_grid_count_full(const octf_grid* grid, uint64_t* out) {
    if (octf_status s = require(grid && out, "grid and out must not be NULL")) return s;
    *out = grid->grid.count_full();
    return OCTF_OK;
}

void octf_grid_free(octf_grid* grid) { delete grid; }

octf_status octf_sequence_from_grid(const octf_grid* grid, octf_sequence** out) {
    if (octf_status s = require(grid && out, "grid and out must not be NULL")) return s;
    return guarded([&] { *out = new octf_sequence{linearize(build_octree(grid->grid))}; });
}

octf_status octf_sequence_to_grid(const octf_sequence* seq, uint32_t resolution, octf_grid** out) {
    if (octf_status s = require(seq && out, "seq and out must not be NULL")) return s;
    return guarded([&] {
        std::vector<CellValue> values;
        values.reserve(seq->seq.tokens.size());
        for (const Token& t : seq->seq.tokens) values.push_back(t.value);
        Octree tree = delinearize(values);
        uint32_t res = resolution == 0 ? (uint32_t{1} << tree.max_depth()) : resolution;
        *out = new octf_grid{octree_to_voxels(tree, res)};
    });
}

octf_status octf_sequence_load(const char* path, octf_sequence** out) {
    if (octf_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&] { *out = new octf_sequence{load_sequence(path)}; });
}

octf_status octf_sequence_save(const octf_sequence* seq, const char* path) {
    if (octf_status s = require(seq && path, "seq and path must not be NULL")) return s;
    return guarded([&] { save_sequence(seq->seq, path); });
}

octf_status octf_sequence_length(const octf_sequence* seq, size_t* out) {
    if (octf_status s = require(seq && out, "seq and out must not be NULL")) return s;
    *out = seq->seq.tokens.size();
    return OCTF_OK;
}

octf_status octf_sequence_token(const octf_sequence* seq, size_t index, int* value, int* depth, uint32_t* idx,
                                uint32_t* idy, uint32_t* idz) {
    if (octf_status s = require(seq != nullptr, "seq must not be NULL")) return s;
    if (octf_status s = require(index < seq->seq.tokens.size(), "token index out of range")) return s;
    const Token& t = seq->seq.tokens[index];
    if (value) *value = int(t.value);
    if (depth) *depth = int(t.depth);
    if (idx) *idx = t.idx;
    if (idy) *idy = t.idy;
    if (idz) *idz = t.idz;
    return OCTF_OK;
}

octf_status octf_sequence_class(const octf_sequence* seq, int* out) {
    if (octf_status s = require(seq && out, "seq and out must not be NULL")) return s;
    *out = seq->seq.class_label ? *seq->seq.class_label : -1;
    return OCTF_OK;
}

octf_status octf_sequence_set_class(octf_sequence* seq, int label) {
    if (octf_status s = require(seq != nullptr, "seq must not be NULL")) return s;
    if (label < 0)
        seq->seq.class_label.reset();
    else
        seq->seq.class_label = label;
    return OCTF_OK;
}

void octf_sequence_free(octf_sequence* seq) { delete seq; }

octf_status octf_model_create(const char* config_json, uint64_t seed, octf_model** out) {
    if (octf_status s = require(config_json && out, "config and out must not be NULL")) return s;
    return guarded([&] {
        FullConfig cfg = parse_config_json(config_json);
        *out = new octf_model{Model(cfg.model, seed)};
    });
}

octf_status octf_model_load(const char* path, octf_model** out) {
    if (octf_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&] { *out = new octf_model{Model::load_checkpoint(path)}; });
}

octf_status octf_model_save(const octf_model* model, const char* path) {
    if (octf_status s = require(model && path, "model and path must not be NULL")) return s;
    return guarded([&] { model->model.save_checkpoint(path); });
}

octf_status octf_model_config(const octf_model* model, char* buf, size_t buf_len, size_t* needed) {
    if (octf_status s = require(model != nullptr, "model must not be NULL")) return s;
    FullConfig cfg;
    cfg.model = model->model.config();
    return fill_string(config_to_json(cfg), buf, buf_len, needed);
}

void octf_model_free(octf_model* model) { delete model; }

octf_status octf_train(octf_model* model, const char* corpus_dir, const char* config_json,
                       const char* metrics_csv) {
    if (octf_status s = require(model && corpus_dir, "model and corpus_dir must not be NULL")) return s;
    return guarded([&] {
        FullConfig cfg;
        cfg.model = model->model.config();
        if (config_json && *config_json) {
            FullConfig parsed = parse_config_json(config_json);
            cfg.train = parsed.train;
        }
        auto items = corpus_items(corpus_dir, model->model.config().unconditional_label());
        train(model->model, items, cfg.train, metrics_csv ? metrics_csv : "");
    });
}

octf_status octf_bits_per_token(octf_model* model, const char* corpus_dir, double* out) {
    if (octf_status s = require(model && corpus_dir && out, "model, corpus_dir, out must not be NULL")) return s;
    return guarded([&] {
        auto items = corpus_items(corpus_dir, model->model.config().unconditional_label());
        *out = bits_per_token(model->model, items);
    });
}

octf_status octf_sample(octf_model* model, double temperature, int max_depth, int class_label, uint64_t seed,
                        octf_sequence** out_seq, octf_grid** out_grid) {
    if (octf_status s = require(model != nullptr, "model must not be NULL")) return s;
    return guarded([&] {
        SampleConfig sc;
        sc.temperature = temperature;
        sc.max_depth = max_depth;
        sc.class_label = class_label;
        sc.seed = seed;
        SampleResult r = sample_shape(model->model, sc);
        if (out_seq) *out_seq = new octf_sequence{std::move(r.seq)};
        if (out_grid) *out_grid = new octf_grid{std::move(r.grid)};
    });
}

octf_status octf_superresolve(octf_model* model, const octf_sequence* prefix, int target_depth, double temperature,
                              uint64_t seed, octf_sequence** out_seq, octf_grid** out_grid) {
    if (octf_status s = require(model && prefix, "model and prefix must not be NULL")) return s;
    return guarded([&] {
        SampleConfig sc;
        sc.temperature = temperature;
        sc.seed = seed;
        SampleResult r = superresolve(model->model, prefix->seq, target_depth, sc);
        if (out_seq) *out_seq = new octf_sequence{std::move(r.seq)};
        if (out_grid) *out_grid = new octf_grid{std::move(r.grid)};
    });
}

octf_status octf_evaluate(octf_model* model, const char* ref_dir, int multiplier, double temperature,
                          int class_label, uint64_t seed, octf_metrics* out) {
    if (octf_status s = require(model && ref_dir && out, "model, ref_dir, out must not be NULL")) return s;
    return guarded([&] {
        std::vector<VoxelGrid> ref;
        for (CorpusItem& c : load_corpus(ref_dir)) ref.push_back(std::move(c.grid));
        MetricsReport rep = evaluate_model(model->model, ref, multiplier, temperature, class_label, seed);
        out->cov_percent = rep.cov_percent;
        out->mmd_scaled = rep.mmd_scaled;
        out->mmd_raw = rep.mmd_value;
        out->gen_count = rep.gen_count;
        out->ref_count = rep.ref_count;
    });
}

octf_status octf_make_dataset(const char* kind, uint32_t resolution, int count, int per_shape_labels, uint64_t seed,
                              const char* out_dir) {
    if (octf_status s = require(kind && out_dir, "kind and out_dir must not be NULL")) return s;
    return guarded([&] {
        DatasetSpec spec;
        spec.kind = shape_kind_from_name(kind);
        spec.resolution = resolution;
        spec.count = count;
        spec.label_mode = per_shape_labels ? LabelMode::PerShape : LabelMode::ByKind;
        spec.seed = seed;
        write_dataset(spec, out_dir);
    });
}

octf_status octf_corpus_stats(const char* corpus_dir, const char* scheme, char* buf, size_t buf_len,
                              size_t* needed) {
    if (octf_status s = require(corpus_dir && scheme, "corpus_dir and scheme must not be NULL")) return s;
    std::string table;
    octf_status st = guarded([&] {
        CompressionScheme sc = CompressionScheme::parse(scheme);
        table = format_stats_table(corpus_stats(corpus_dir, sc), sc);
    });
    if (st != OCTF_OK) return st;
    return fill_string(table, buf, buf_len, needed);
}

octf_status octf_export_obj(const octf_grid* grid, const char* path) {
    if (octf_status s = require(grid && path, "grid and path must not be NULL")) return s;
    return guarded([&] { export_obj(grid->grid, path); });
}

octf_status octf_export_slices(const octf_grid* grid, const char* dir) {
    if (octf_status s = require(grid && dir, "grid and dir must not be NULL")) return s;
    return guarded([&] { export_slices(grid->grid, dir); });
}

} // extern "C"
