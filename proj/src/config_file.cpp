#include "config_file.hpp"

#include "error.hpp"

#include <json.hpp>

#include <fstream>

using nlohmann::json;

namespace octo {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw_format("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

FullConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw_format(std::string("config: ") + e.what());
    }
    FullConfig cfg;
    check_keys(j, {"model", "train"}, "top level");
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m,
                   {"layers", "heads", "width", "ff_width", "max_positions", "class_count", "scheme", "max_depth",
                    "dropout"},
                   "model");
        read(m, "layers", cfg.model.layers);
        read(m, "heads", cfg.model.heads);
        read(m, "width", cfg.model.width);
        read(m, "ff_width", cfg.model.ff_width);
        read(m, "max_positions", cfg.model.max_positions);
        read(m, "class_count", cfg.model.class_count);
        read(m, "scheme", cfg.model.scheme_text);
        read(m, "max_depth", cfg.model.max_depth);
        read(m, "dropout", cfg.model.dropout);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t,
                   {"learning_rate", "warmup_fraction", "epochs", "batch_size", "alpha", "max_compressed_length",
                    "temperature", "seed", "augment", "adam", "verbose"},
                   "train");
        read(t, "learning_rate", cfg.train.learning_rate);
        read(t, "warmup_fraction", cfg.train.warmup_fraction);
        read(t, "epochs", cfg.train.epochs);
        read(t, "batch_size", cfg.train.batch_size);
        read(t, "alpha", cfg.train.alpha);
        read(t, "max_compressed_length", cfg.train.max_compressed_length);
        read(t, "temperature", cfg.train.temperature);
        read(t, "seed", cfg.train.seed);
        read(t, "verbose", cfg.train.verbose);
        if (t.contains("augment")) {
            const json& a = t.at("augment");
            check_keys(a, {"probability", "control_points", "scale_min", "scale_max"}, "train.augment");
            read(a, "probability", cfg.train.augment.probability);
            read(a, "control_points", cfg.train.augment.control_points);
            read(a, "scale_min", cfg.train.augment.scale_min);
            read(a, "scale_max", cfg.train.augment.scale_max);
        }
        if (t.contains("adam")) {
            const json& a = t.at("adam");
            check_keys(a, {"beta1", "beta2", "epsilon"}, "train.adam");
            read(a, "beta1", cfg.train.adam_beta1);
            read(a, "beta2", cfg.train.adam_beta2);
            read(a, "epsilon", cfg.train.adam_eps);
        }
    }
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

FullConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw_io("cannot open config file " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config_json(text);
}

std::string config_to_json(const FullConfig& cfg) {
    json j;
    j["model"] = {{"layers", cfg.model.layers},
                  {"heads", cfg.model.heads},
                  {"width", cfg.model.width},
                  {"ff_width", cfg.model.ff_width},
                  {"max_positions", cfg.model.max_positions},
                  {"class_count", cfg.model.class_count},
                  {"scheme", cfg.model.scheme_text},
                  {"max_depth", cfg.model.max_depth},
                  {"dropout", cfg.model.dropout}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"warmup_fraction", cfg.train.warmup_fraction},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"alpha", cfg.train.alpha},
                  {"max_compressed_length", cfg.train.max_compressed_length},
                  {"temperature", cfg.train.temperature},
                  {"seed", cfg.train.seed},
                  {"augment",
                   {{"probability", cfg.train.augment.probability},
                    {"control_points", cfg.train.augment.control_points},
                    {"scale_min", cfg.train.augment.scale_min},
                    {"scale_max", cfg.train.augment.scale_max}}},
                  {"adam",
                   {{"beta1", cfg.train.adam_beta1},
                    {"beta2", cfg.train.adam_beta2},
                    {"epsilon", cfg.train.adam_eps}}}};
    return j.dump(2);
}

} // namespace octo
