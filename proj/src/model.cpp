#include "model.hpp"

#include "error.hpp"
#include "rng.hpp"

#include <cstring>
#include <fstream>

namespace octo {

void ModelConfig::validate() const {
    if (layers < 1) throw_invalid("config: layers must be >= 1");
    if (heads < 1 || width % heads != 0) throw_invalid("config: width must be divisible by heads");
    if (width < 2) throw_invalid("config: width too small");
    if (ff_width < 1) throw_invalid("config: ff_width must be >= 1");
    if (max_positions < 2) throw_invalid("config: max_positions must be >= 2");
    if (class_count < 1) throw_invalid("config: class_count must be >= 1");
    if (max_depth < 1 || max_depth > 16) throw_invalid("config: max_depth out of range");
    if (dropout < 0.0 || dropout >= 1.0) throw_invalid("config: dropout must be in [0, 1)");
    CompressionScheme::parse(scheme_text); // throws on malformed schemes
}

bool ModelConfig::operator==(const ModelConfig& o) const {
    return layers == o.layers && heads == o.heads && width == o.width && ff_width == o.ff_width &&
           max_positions == o.max_positions && class_count == o.class_count && scheme_text == o.scheme_text &&
           max_depth == o.max_depth && dropout == o.dropout;
}

namespace {
constexpr double kInitSigma = 0.02;
}

Param& Model::add_param(const std::string& name, size_t rows, size_t cols, double sigma, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal(0.0, sigma);
    params_.push_back(std::make_unique<Param>(name, std::move(m)));
    by_name_[name] = params_.back().get();
    return *params_.back();
}

Param& Model::add_const_param(const std::string& name, size_t rows, size_t cols, double fill) {
    Matrix m(rows, cols);
    std::fill(m.data.begin(), m.data.end(), fill);
    params_.push_back(std::make_unique<Param>(name, std::move(m)));
    by_name_[name] = params_.back().get();
    return *params_.back();
}

Model::Model(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)), scheme_(CompressionScheme::parse(cfg_.scheme_text)) {
    cfg_.validate();
    Rng rng(seed);
    const size_t d = size_t(cfg_.width);
    const size_t pos_rows = size_t(end_spatial_id(cfg_.max_depth)) + 1;

    add_param("embed.value", 4, d, kInitSigma, rng);
    add_param("embed.pos_x", pos_rows, d, kInitSigma, rng);
    add_param("embed.pos_y", pos_rows, d, kInitSigma, rng);
    add_param("embed.pos_z", pos_rows, d, kInitSigma, rng);
    add_param("embed.class", size_t(cfg_.class_count), d, kInitSigma, rng);

    for (int depth = 1; depth <= cfg_.max_depth; ++depth) {
        SchemeEntry e = scheme_.entry_for_depth(depth);
        std::string base = "l" + std::to_string(depth);
        size_t b = size_t(e.group_size);
        add_param("enc." + base + ".root", b * d, d, kInitSigma, rng);
        add_param("dec." + base + ".root", d, b * d, kInitSigma, rng);
        if (e.group_size > 1)
            add_param("dec." + base + ".rootblock", block_pair_count(e.group_size) * d, d, kInitSigma, rng);
        for (int t = 0; t < e.collapse_depth; ++t) {
            std::string st = std::to_string(t);
            add_param("enc." + base + ".sib" + st, 8 * d, d, kInitSigma, rng);
            add_param("dec." + base + ".expand" + st, d, 8 * d, kInitSigma, rng);
            add_param("dec." + base + ".block" + st, block_pair_count(8) * d, d, kInitSigma, rng);
        }
    }

    add_param("trans.pos", size_t(cfg_.max_positions), d, kInitSigma, rng);
    for (int l = 0; l < cfg_.layers; ++l) {
        std::string base = "trans.l" + std::to_string(l);
        add_const_param(base + ".ln1.g", 1, d, 1.0);
        add_const_param(base + ".ln1.b", 1, d, 0.0);
        add_param(base + ".qkv.w", d, 3 * d, kInitSigma, rng);
        add_const_param(base + ".qkv.b", 1, 3 * d, 0.0);
        add_param(base + ".proj.w", d, d, kInitSigma, rng);
        add_const_param(base + ".proj.b", 1, d, 0.0);
        add_const_param(base + ".ln2.g", 1, d, 1.0);
        add_const_param(base + ".ln2.b", 1, d, 0.0);
        add_param(base + ".ff1.w", d, size_t(cfg_.ff_width), kInitSigma, rng);
        add_const_param(base + ".ff1.b", 1, size_t(cfg_.ff_width), 0.0);
        add_param(base + ".ff2.w", size_t(cfg_.ff_width), d, kInitSigma, rng);
        add_const_param(base + ".ff2.b", 1, d, 0.0);
    }
    add_const_param("trans.final.g", 1, d, 1.0);
    add_const_param("trans.final.b", 1, d, 0.0);

    add_param("out.w", d, 3, kInitSigma, rng);
    add_const_param("out.b", 1, 3, 0.0);
}

std::vector<Param*> Model::params() {
    std::vector<Param*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

Param& Model::param(const std::string& name) {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw_invalid("unknown parameter '" + name + "'");
    return *it->second;
}

void Model::zero_grads() {
    for (auto& p : params_) p->zero_grad();
}

WiredModel Model::wire(Tape& tape) {
    WiredModel w;
    w.cfg = &cfg_;
    w.emb.value = tape.param(param("embed.value"));
    w.emb.pos_x = tape.param(param("embed.pos_x"));
    w.emb.pos_y = tape.param(param("embed.pos_y"));
    w.emb.pos_z = tape.param(param("embed.pos_z"));
    w.emb.cls = tape.param(param("embed.class"));
    w.emb.max_depth = cfg_.max_depth;

    for (int depth = 1; depth <= cfg_.max_depth; ++depth) {
        WiredLevel lv;
        lv.entry = scheme_.entry_for_depth(depth);
        std::string base = "l" + std::to_string(depth);
        lv.enc_root = tape.param(param("enc." + base + ".root"));
        lv.dec_root = tape.param(param("dec." + base + ".root"));
        if (lv.entry.group_size > 1) lv.root_block = tape.param(param("dec." + base + ".rootblock"));
        for (int t = 0; t < lv.entry.collapse_depth; ++t) {
            std::string st = std::to_string(t);
            lv.enc_sib.push_back(tape.param(param("enc." + base + ".sib" + st)));
            lv.dec_expand.push_back(tape.param(param("dec." + base + ".expand" + st)));
            lv.block.push_back(tape.param(param("dec." + base + ".block" + st)));
        }
        w.levels.push_back(std::move(lv));
    }

    w.latent_pos = tape.param(param("trans.pos"));
    for (int l = 0; l < cfg_.layers; ++l) {
        std::string base = "trans.l" + std::to_string(l);
        WiredTransformerLayer layer;
        layer.ln1_g = tape.param(param(base + ".ln1.g"));
        layer.ln1_b = tape.param(param(base + ".ln1.b"));
        layer.qkv_w = tape.param(param(base + ".qkv.w"));
        layer.qkv_b = tape.param(param(base + ".qkv.b"));
        layer.proj_w = tape.param(param(base + ".proj.w"));
        layer.proj_b = tape.param(param(base + ".proj.b"));
        layer.ln2_g = tape.param(param(base + ".ln2.g"));
        layer.ln2_b = tape.param(param(base + ".ln2.b"));
        layer.ff1_w = tape.param(param(base + ".ff1.w"));
        layer.ff1_b = tape.param(param(base + ".ff1.b"));
        layer.ff2_w = tape.param(param(base + ".ff2.w"));
        layer.ff2_b = tape.param(param(base + ".ff2.b"));
        w.layers.push_back(layer);
    }
    w.final_ln_g = tape.param(param("trans.final.g"));
    w.final_ln_b = tape.param(param("trans.final.b"));
    w.out_w = tape.param(param("out.w"));
    w.out_b = tape.param(param("out.b"));
    return w;
}

namespace {

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    for (int i = 0; i < 2; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}
void put_f64(std::vector<uint8_t>& b, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(b, bits);
}
void put_str(std::vector<uint8_t>& b, const std::string& s) {
    put_u32(b, uint32_t(s.size()));
    b.insert(b.end(), s.begin(), s.end());
}

struct Reader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;
    explicit Reader(const std::vector<uint8_t>& bytes) : b(bytes) {}
    void need(size_t n) {
        if (pos + n > b.size()) throw_format("checkpoint truncated");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= uint16_t(b[pos + size_t(i)]) << (8 * i);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(b[pos + size_t(i)]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[pos + size_t(i)]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(b.data() + pos), n);
        pos += n;
        return s;
    }
};

uint64_t fnv1a(const uint8_t* data, size_t n) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr uint16_t kCheckpointVersion = 1;

} // namespace

void Model::save_checkpoint(const std::string& path) const {
    std::vector<uint8_t> b;
    b.push_back('O');
    b.push_back('C');
    b.push_back('T');
    b.push_back('M');
    put_u16(b, kCheckpointVersion);
    put_u32(b, uint32_t(cfg_.layers));
    put_u32(b, uint32_t(cfg_.heads));
    put_u32(b, uint32_t(cfg_.width));
    put_u32(b, uint32_t(cfg_.ff_width));
    put_u32(b, uint32_t(cfg_.max_positions));
    put_u32(b, uint32_t(cfg_.class_count));
    put_u32(b, uint32_t(cfg_.max_depth));
    put_f64(b, cfg_.dropout);
    put_str(b, cfg_.scheme_text);
    put_u32(b, uint32_t(params_.size()));
    for (const auto& p : params_) {
        put_str(b, p->name);
        put_u32(b, 2);
        put_u64(b, p->value.rows);
        put_u64(b, p->value.cols);
        for (double v : p->value.data) put_f64(b, v);
    }
    put_u64(b, fnv1a(b.data(), b.size()));

    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
    if (!f) throw_io("write failed for " + path);
}

Model Model::load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 14 || bytes[0] != 'O' || bytes[1] != 'C' || bytes[2] != 'T' || bytes[3] != 'M')
        throw_format(path + ": not a model checkpoint (bad magic)");
    uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= uint64_t(bytes[bytes.size() - 8 + size_t(i)]) << (8 * i);
    if (fnv1a(bytes.data(), bytes.size() - 8) != stored)
        throw_format(path + ": checksum mismatch (file corrupt or truncated)");

    Reader r(bytes);
    r.pos = 4;
    uint16_t version = r.u16();
    if (version != kCheckpointVersion)
        throw_format(path + ": unsupported checkpoint version " + std::to_string(version));
    ModelConfig cfg;
    cfg.layers = int(r.u32());
    cfg.heads = int(r.u32());
    cfg.width = int(r.u32());
    cfg.ff_width = int(r.u32());
    cfg.max_positions = int(r.u32());
    cfg.class_count = int(r.u32());
    cfg.max_depth = int(r.u32());
    cfg.dropout = r.f64();
    cfg.scheme_text = r.str();

    Model model(cfg, 0);
    uint32_t count = r.u32();
    if (count != model.params_.size())
        throw_format(path + ": parameter count mismatch");
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        uint32_t ndims = r.u32();
        if (ndims != 2) throw_format(path + ": parameter '" + name + "' has unsupported rank");
        uint64_t rows = r.u64();
        uint64_t cols = r.u64();
        auto it = model.by_name_.find(name);
        if (it == model.by_name_.end()) throw_format(path + ": unknown parameter '" + name + "'");
        Param& p = *it->second;
        if (p.value.rows != rows || p.value.cols != cols)
            throw_format(path + ": shape mismatch for '" + name + "'");
        for (size_t k = 0; k < p.value.data.size(); ++k) p.value.data[k] = r.f64();
    }
    return model;
}

Model Model::load_checkpoint(const std::string& path, const ModelConfig& expected) {
    Model m = load_checkpoint(path);
    if (!(m.config() == expected))
        throw_format(path + ": checkpoint configuration does not match the requested one");
    return m;
}

} // namespace octo
