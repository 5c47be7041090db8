#include "datasets.hpp"

#include "error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace octo {

ShapeKind shape_kind_from_name(const std::string& name) {
    if (name == "box") return ShapeKind::Box;
    if (name == "sphere") return ShapeKind::Sphere;
    if (name == "cylinder") return ShapeKind::Cylinder;
    if (name == "union") return ShapeKind::Union;
    if (name == "mixed") return ShapeKind::Mixed;
    throw_invalid("unknown shape kind '" + name + "' (box|sphere|cylinder|union|mixed)");
}

std::string shape_kind_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Box: return "box";
        case ShapeKind::Sphere: return "sphere";
        case ShapeKind::Cylinder: return "cylinder";
        case ShapeKind::Union: return "union";
        case ShapeKind::Mixed: return "mixed";
    }
    return "?";
}

namespace {

struct Primitive {
    int type; // 0 box, 1 sphere, 2 cylinder
    double p[7];

    bool contains(double x, double y, double z) const {
        switch (type) {
            case 0:
                return x >= p[0] && x <= p[3] && y >= p[1] && y <= p[4] && z >= p[2] && z <= p[5];
            case 1: {
                double dx = x - p[0], dy = y - p[1], dz = z - p[2];
                return dx * dx + dy * dy + dz * dz <= p[3] * p[3];
            }
            default: {
                // cylinder along axis p[6]; p[0],p[1] center the two cross
                // dimensions, p[3] radius, p[4]..p[5] the axis span
                int axis = int(p[6]);
                double c[3] = {x, y, z};
                if (c[axis] < p[4] || c[axis] > p[5]) return false;
                double du = c[(axis + 1) % 3] - p[0];
                double dv = c[(axis + 2) % 3] - p[1];
                return du * du + dv * dv <= p[3] * p[3];
            }
        }
    }

    std::string describe() const {
        char buf[160];
        if (type == 0)
            std::snprintf(buf, sizeof buf, "box[%.2f %.2f %.2f; %.2f %.2f %.2f]", p[0], p[1], p[2], p[3], p[4], p[5]);
        else if (type == 1)
            std::snprintf(buf, sizeof buf, "sphere[c=%.2f %.2f %.2f r=%.2f]", p[0], p[1], p[2], p[3]);
        else
            std::snprintf(buf, sizeof buf, "cyl[axis=%d c=%.2f %.2f r=%.2f span=%.2f..%.2f]", int(p[6]), p[0], p[1],
                          p[3], p[4], p[5]);
        return buf;
    }
};

Primitive random_box(Rng& rng, double res) {
    Primitive pr{};
    pr.type = 0;
    for (int a = 0; a < 3; ++a) {
        double lo = rng.uniform(0.0, res * 0.55);
        double len = rng.uniform(res * 0.25, res * 0.45);
        pr.p[a] = lo;
        pr.p[a + 3] = std::min(res - 1.0, lo + len);
    }
    return pr;
}

Primitive random_sphere(Rng& rng, double res) {
    Primitive pr{};
    pr.type = 1;
    pr.p[3] = rng.uniform(res * 0.15, res * 0.3);
    for (int a = 0; a < 3; ++a) pr.p[a] = rng.uniform(pr.p[3], res - pr.p[3]);
    return pr;
}

Primitive random_cylinder(Rng& rng, double res) {
    Primitive pr{};
    pr.type = 2;
    pr.p[6] = double(rng.below(3));
    pr.p[3] = rng.uniform(res * 0.12, res * 0.25);
    pr.p[0] = rng.uniform(pr.p[3], res - pr.p[3]);
    pr.p[1] = rng.uniform(pr.p[3], res - pr.p[3]);
    double lo = rng.uniform(0.0, res * 0.4);
    pr.p[4] = lo;
    pr.p[5] = std::min(res - 1.0, lo + rng.uniform(res * 0.35, res * 0.7));
    return pr;
}

Primitive random_primitive(Rng& rng, double res, int type) {
    if (type == 0) return random_box(rng, res);
    if (type == 1) return random_sphere(rng, res);
    return random_cylinder(rng, res);
}

} // namespace

GeneratedShape make_shape(const DatasetSpec& spec, int index) {
    if (spec.count < 1) throw_invalid("dataset count must be >= 1");
    if (index < 0 || index >= spec.count) throw_invalid("shape index out of range");
    // Independent stream per shape so corpora are stable under count changes.
    Rng rng(spec.seed * 0x9e3779b97f4a7c15ull + uint64_t(index) + 1);
    ShapeKind kind = spec.kind;
    if (kind == ShapeKind::Mixed) kind = ShapeKind(index % 4);

    double res = double(spec.resolution);
    std::vector<Primitive> prims;
    if (kind == ShapeKind::Union) {
        int k = 1 + int(rng.below(3));
        for (int i = 0; i < k; ++i) prims.push_back(random_primitive(rng, res, int(rng.below(3))));
    } else {
        prims.push_back(random_primitive(rng, res, int(kind)));
    }

    GeneratedShape out{VoxelGrid(spec.resolution), 0, ""};
    for (uint32_t z = 0; z < spec.resolution; ++z)
        for (uint32_t y = 0; y < spec.resolution; ++y)
            for (uint32_t x = 0; x < spec.resolution; ++x) {
                double cx = double(x) + 0.5, cy = double(y) + 0.5, cz = double(z) + 0.5;
                for (const Primitive& pr : prims)
                    if (pr.contains(cx, cy, cz)) {
                        out.grid.set(x, y, z, true);
                        break;
                    }
            }

    out.label = spec.label_mode == LabelMode::PerShape ? index : int(kind);
    std::ostringstream desc;
    desc << shape_kind_name(kind);
    for (const Primitive& pr : prims) desc << ' ' << pr.describe();
    out.parameters = desc.str();
    return out;
}

std::vector<GeneratedShape> make_shapes(const DatasetSpec& spec) {
    std::vector<GeneratedShape> out;
    out.reserve(size_t(spec.count));
    for (int i = 0; i < spec.count; ++i) out.push_back(make_shape(spec, i));
    return out;
}

std::vector<DatasetItemInfo> write_dataset(const DatasetSpec& spec, const std::string& dir) {
    if (spec.count < 1) throw_invalid("dataset count must be >= 1");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw_io("cannot create directory " + dir);
    std::vector<DatasetItemInfo> infos;
    std::ofstream manifest(fs::path(dir) / "manifest.csv");
    if (!manifest) throw_io("cannot write manifest in " + dir);
    manifest << "filename,class,parameters\n";
    for (int i = 0; i < spec.count; ++i) {
        GeneratedShape s = make_shape(spec, i);
        char name[32];
        std::snprintf(name, sizeof name, "shape_%04d.octv", i);
        save_octv(s.grid, (fs::path(dir) / name).string());
        manifest << name << ',' << s.label << ",\"" << s.parameters << "\"\n";
        infos.push_back({name, s.label, s.parameters});
    }
    if (!manifest) throw_io("write failed for manifest in " + dir);
    return infos;
}

std::vector<std::string> list_octv_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw_io(dir + " is not a directory");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".octv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<CorpusItem> load_corpus(const std::string& dir) {
    std::vector<CorpusItem> items;
    fs::path manifest = fs::path(dir) / "manifest.csv";
    if (fs::exists(manifest)) {
        std::ifstream f(manifest);
        if (!f) throw_io("cannot open " + manifest.string());
        std::string line;
        std::getline(f, line); // header
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            size_t c1 = line.find(',');
            size_t c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw_format(manifest.string() + ": bad row '" + line + "'");
            std::string fname = line.substr(0, c1);
            int label = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
            items.push_back({load_octv((fs::path(dir) / fname).string()), label});
        }
        if (items.empty()) throw_format(manifest.string() + ": no entries");
        return items;
    }
    for (const std::string& f : list_octv_files(dir)) items.push_back({load_octv(f), -1});
    if (items.empty()) throw_io("no .octv files in " + dir);
    return items;
}

} // namespace octo
