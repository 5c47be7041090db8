// Command-line front end for the octoformer shared library.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 runtime failure.

#include <octoformer/octoformer.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

int exit_code_for(octf_status s) {
    switch (s) {
        case OCTF_OK: return 0;
        case OCTF_ERR_INVALID_ARGUMENT: return 1;
        case OCTF_ERR_FORMAT: return 2;
        case OCTF_ERR_IO: return 2;
        case OCTF_ERR_RUNTIME: return 3;
    }
    return 3;
}

[[noreturn]] void fail(octf_status s) {
    std::fprintf(stderr, "error: %s\n", octf_last_error());
    std::exit(exit_code_for(s));
}

void check(octf_status s) {
    if (s != OCTF_OK) fail(s);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        std::fprintf(stderr, "error: cannot open %s\n", path.c_str());
        std::exit(2);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct GridPtr {
    octf_grid* p = nullptr;
    ~GridPtr() { octf_grid_free(p); }
};
struct SeqPtr {
    octf_sequence* p = nullptr;
    ~SeqPtr() { octf_sequence_free(p); }
};
struct ModelPtr {
    octf_model* p = nullptr;
    ~ModelPtr() { octf_model_free(p); }
};

void maybe_export(octf_grid* grid, const std::string& obj_path, const std::string& slices_dir) {
    if (!obj_path.empty()) check(octf_export_obj(grid, obj_path.c_str()));
    if (!slices_dir.empty()) check(octf_export_slices(grid, slices_dir.c_str()));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"octoformer: autoregressive octree shape model"};
    app.require_subcommand(1);

    // encode
    auto* enc = app.add_subcommand("encode", "voxel grid (OCTV) -> token sequence file");
    std::string enc_in, enc_out;
    int enc_class = -1;
    enc->add_option("input", enc_in, "input .octv file")->required();
    enc->add_option("--out", enc_out, "output sequence file")->required();
    enc->add_option("--class", enc_class, "class label stored in the header");

    // decode
    auto* dec = app.add_subcommand("decode", "token sequence file -> voxel grid (OCTV)");
    std::string dec_in, dec_out, dec_obj, dec_slices;
    uint32_t dec_res = 0;
    dec->add_option("input", dec_in, "input sequence file")->required();
    dec->add_option("--out", dec_out, "output .octv file")->required();
    dec->add_option("--resolution", dec_res, "output resolution (default: tree resolution)");
    dec->add_option("--obj", dec_obj, "also export an OBJ mesh");
    dec->add_option("--slices", dec_slices, "also export PGM slices into this directory");

    // stats
    auto* sta = app.add_subcommand("stats", "per-resolution token/latent statistics of a corpus");
    std::string sta_dir, sta_scheme = "0/1,0/1,0/2,0/4,0/8,1/4";
    sta->add_option("corpus", sta_dir, "directory of .octv files")->required();
    sta->add_option("--scheme", sta_scheme, "compression scheme a/b[,a/b...]");

    // make-dataset
    auto* mk = app.add_subcommand("make-dataset", "write a procedural shape corpus");
    std::string mk_kind = "mixed", mk_out;
    uint32_t mk_res = 16;
    int mk_count = 10;
    uint64_t mk_seed = 0;
    bool mk_per_shape = false;
    mk->add_option("--kind", mk_kind, "box|sphere|cylinder|union|mixed");
    mk->add_option("--resolution", mk_res, "grid resolution (power of two)");
    mk->add_option("--count", mk_count, "number of shapes");
    mk->add_option("--seed", mk_seed, "generator seed");
    mk->add_flag("--per-shape-labels", mk_per_shape, "label shapes 0..count-1 instead of by kind");
    mk->add_option("--out", mk_out, "output directory")->required();

    // train
    auto* tr = app.add_subcommand("train", "train a model on a corpus");
    std::string tr_data, tr_config, tr_ckpt_in, tr_out, tr_metrics;
    uint64_t tr_seed = 0;
    tr->add_option("--data", tr_data, "corpus directory")->required();
    tr->add_option("--config", tr_config, "JSON config file (model + train sections)");
    tr->add_option("--checkpoint", tr_ckpt_in, "continue from this checkpoint");
    tr->add_option("--out", tr_out, "output checkpoint path")->required();
    tr->add_option("--metrics", tr_metrics, "metrics CSV path");
    tr->add_option("--seed", tr_seed, "parameter init seed");

    // sample
    auto* sa = app.add_subcommand("sample", "generate shapes from a trained model");
    std::string sa_ckpt, sa_out, sa_seq_out, sa_obj, sa_slices;
    double sa_temp = 0.8;
    int sa_class = -1, sa_depth = 0, sa_count = 1;
    uint64_t sa_seed = 0;
    sa->add_option("--checkpoint", sa_ckpt, "model checkpoint")->required();
    sa->add_option("--temperature", sa_temp, "softmax temperature (0 = argmax)");
    sa->add_option("--class", sa_class, "class label (-1 = unconditional)");
    sa->add_option("--max-depth", sa_depth, "octree level cap (0 = model max)");
    sa->add_option("--seed", sa_seed, "sampling seed");
    sa->add_option("--count", sa_count, "number of shapes");
    sa->add_option("--out", sa_out, "output .octv path (numbered when count > 1)")->required();
    sa->add_option("--seq-out", sa_seq_out, "also write the token sequence file");
    sa->add_option("--obj", sa_obj, "also export an OBJ mesh");
    sa->add_option("--slices", sa_slices, "also export PGM slices into this directory");

    // upres
    auto* up = app.add_subcommand("upres", "continue a truncated sequence to a finer level");
    std::string up_ckpt, up_in, up_out, up_seq_out;
    double up_temp = 0.8;
    int up_depth = 0;
    uint64_t up_seed = 0;
    up->add_option("--checkpoint", up_ckpt, "model checkpoint")->required();
    up->add_option("input", up_in, "prefix sequence file (whole levels)")->required();
    up->add_option("--max-depth", up_depth, "target octree level")->required();
    up->add_option("--temperature", up_temp, "softmax temperature (0 = argmax)");
    up->add_option("--seed", up_seed, "sampling seed");
    up->add_option("--out", up_out, "output .octv path")->required();
    up->add_option("--seq-out", up_seq_out, "also write the completed sequence");

    // eval
    auto* ev = app.add_subcommand("eval", "COV/MMD of model samples against a reference corpus");
    std::string ev_ckpt, ev_ref, ev_out;
    int ev_mult = 5, ev_class = -1;
    double ev_temp = 0.8;
    uint64_t ev_seed = 0;
    ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    ev->add_option("--ref", ev_ref, "reference corpus directory")->required();
    ev->add_option("--multiplier", ev_mult, "samples per reference shape");
    ev->add_option("--temperature", ev_temp, "sampling temperature");
    ev->add_option("--class", ev_class, "class label (-1 = unconditional)");
    ev->add_option("--seed", ev_seed, "sampling seed");
    ev->add_option("--out", ev_out, "write the report CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage errors exit 1, --help exits 0
    }

    if (*enc) {
        GridPtr g;
        check(octf_grid_load(enc_in.c_str(), &g.p));
        SeqPtr s;
        check(octf_sequence_from_grid(g.p, &s.p));
        if (enc_class >= 0) check(octf_sequence_set_class(s.p, enc_class));
        check(octf_sequence_save(s.p, enc_out.c_str()));
        size_t n = 0;
        check(octf_sequence_length(s.p, &n));
        std::printf("encoded %zu tokens -> %s\n", n, enc_out.c_str());
    } else if (*dec) {
        SeqPtr s;
        check(octf_sequence_load(dec_in.c_str(), &s.p));
        GridPtr g;
        check(octf_sequence_to_grid(s.p, dec_res, &g.p));
        check(octf_grid_save(g.p, dec_out.c_str()));
        maybe_export(g.p, dec_obj, dec_slices);
        uint32_t res = 0;
        check(octf_grid_resolution(g.p, &res));
        std::printf("decoded %u^3 grid -> %s\n", res, dec_out.c_str());
    } else if (*sta) {
        size_t needed = 0;
        check(octf_corpus_stats(sta_dir.c_str(), sta_scheme.c_str(), nullptr, 0, &needed));
        std::vector<char> buf(needed);
        check(octf_corpus_stats(sta_dir.c_str(), sta_scheme.c_str(), buf.data(), buf.size(), nullptr));
        std::fputs(buf.data(), stdout);
    } else if (*mk) {
        check(octf_make_dataset(mk_kind.c_str(), mk_res, mk_count, mk_per_shape ? 1 : 0, mk_seed, mk_out.c_str()));
        std::printf("wrote %d shapes to %s\n", mk_count, mk_out.c_str());
    } else if (*tr) {
        std::string config_text = tr_config.empty() ? std::string("{}") : read_file(tr_config);
        ModelPtr m;
        if (!tr_ckpt_in.empty())
            check(octf_model_load(tr_ckpt_in.c_str(), &m.p));
        else
            check(octf_model_create(config_text.c_str(), tr_seed, &m.p));
        check(octf_train(m.p, tr_data.c_str(), config_text.c_str(), tr_metrics.empty() ? nullptr : tr_metrics.c_str()));
        check(octf_model_save(m.p, tr_out.c_str()));
        double bits = 0.0;
        check(octf_bits_per_token(m.p, tr_data.c_str(), &bits));
        std::printf("final bits/token %.6f, checkpoint -> %s\n", bits, tr_out.c_str());
    } else if (*sa) {
        ModelPtr m;
        check(octf_model_load(sa_ckpt.c_str(), &m.p));
        for (int i = 0; i < sa_count; ++i) {
            SeqPtr s;
            GridPtr g;
            check(octf_sample(m.p, sa_temp, sa_depth, sa_class, sa_seed + uint64_t(i), &s.p, &g.p));
            std::string out = sa_out;
            if (sa_count > 1) {
                char suffix[16];
                std::snprintf(suffix, sizeof suffix, ".%03d", i);
                size_t dot = out.rfind(".octv");
                if (dot != std::string::npos)
                    out.insert(dot, suffix);
                else
                    out += suffix;
            }
            check(octf_grid_save(g.p, out.c_str()));
            if (!sa_seq_out.empty() && i == 0) check(octf_sequence_save(s.p, sa_seq_out.c_str()));
            if (i == 0) maybe_export(g.p, sa_obj, sa_slices);
            size_t n = 0;
            check(octf_sequence_length(s.p, &n));
            std::printf("sampled %zu tokens -> %s\n", n, out.c_str());
        }
    } else if (*up) {
        ModelPtr m;
        check(octf_model_load(up_ckpt.c_str(), &m.p));
        SeqPtr prefix;
        check(octf_sequence_load(up_in.c_str(), &prefix.p));
        SeqPtr s;
        GridPtr g;
        check(octf_superresolve(m.p, prefix.p, up_depth, up_temp, up_seed, &s.p, &g.p));
        check(octf_grid_save(g.p, up_out.c_str()));
        if (!up_seq_out.empty()) check(octf_sequence_save(s.p, up_seq_out.c_str()));
        uint32_t res = 0;
        check(octf_grid_resolution(g.p, &res));
        std::printf("superresolved to %u^3 -> %s\n", res, up_out.c_str());
    } else if (*ev) {
        ModelPtr m;
        check(octf_model_load(ev_ckpt.c_str(), &m.p));
        octf_metrics mtr{};
        check(octf_evaluate(m.p, ev_ref.c_str(), ev_mult, ev_temp, ev_class, ev_seed, &mtr));
        std::printf("COV: %.2f %%\nMMD: %.2f (x1e-4; raw %.6f)\ngenerated: %llu, references: %llu\n",
                    mtr.cov_percent, mtr.mmd_scaled, mtr.mmd_raw, (unsigned long long)mtr.gen_count,
                    (unsigned long long)mtr.ref_count);
        if (!ev_out.empty()) {
            std::ofstream f(ev_out);
            if (!f) {
                std::fprintf(stderr, "error: cannot open %s\n", ev_out.c_str());
                return 2;
            }
            f << "cov_percent,mmd_scaled,mmd_raw,gen_count,ref_count,distance,seed\n";
            f << mtr.cov_percent << ',' << mtr.mmd_scaled << ',' << mtr.mmd_raw << ',' << mtr.gen_count << ','
              << mtr.ref_count << ",voxel-iou," << ev_seed << "\n";
        }
    }
    return 0;
}
