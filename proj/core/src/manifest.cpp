#include "tempogan/manifest.hpp"

#include "tempogan/field_io.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace tempogan {

using nlohmann::json;
namespace fs = std::filesystem;

std::string DatasetManifest::resolve(const std::string& rel) const {
    if (root.empty()) return rel;
    return (fs::path(root) / rel).string();
}

std::vector<const SimEntry*> DatasetManifest::split_sims(const std::string& split) const {
    std::vector<const SimEntry*> out;
    for (const auto& s : sims)
        if (s.split == split) out.push_back(&s);
    return out;
}

std::vector<int> DatasetManifest::triplet_centers(const SimEntry& sim) {
    std::vector<int> centers;
    for (std::size_t i = 0; i + 2 < sim.frames.size(); ++i)
        if (sim.frames[i].index + 1 == sim.frames[i + 1].index &&
            sim.frames[i + 1].index + 1 == sim.frames[i + 2].index)
            centers.push_back(int(i + 1)); // position in frames[], not the frame index
    return centers;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    json j;
    j["version"] = m.version;
    j["scale"] = m.scale;
    j["seed"] = m.seed;
    j["hi_shape"] = m.hi_shape;
    j["stats"] = {{"mean_density_lo", m.mean_density_lo},
                  {"max_density_lo", m.max_density_lo},
                  {"frames_total", m.frames_total}};
    j["sims"] = json::array();
    for (const auto& s : m.sims) {
        json js;
        js["id"] = s.id;
        js["split"] = s.split;
        js["frames"] = json::array();
        for (const auto& f : s.frames)
            js["frames"].push_back({{"index", f.index},
                                    {"x_density", f.x_density},
                                    {"x_velocity", f.x_velocity},
                                    {"y_density", f.y_density},
                                    {"y_velocity", f.y_velocity}});
        j["sims"].push_back(std::move(js));
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("manifest: cannot open for write: " + path);
    os << j.dump(1) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest: parse error in " + path + ": " + e.what());
    }
    DatasetManifest m;
    m.version = j.at("version").get<int>();
    if (m.version != 1) throw std::runtime_error("manifest: unsupported version in " + path);
    m.scale = j.at("scale").get<int>();
    m.seed = j.at("seed").get<uint64_t>();
    m.hi_shape = j.at("hi_shape").get<std::vector<int>>();
    const auto& stats = j.at("stats");
    m.mean_density_lo = stats.at("mean_density_lo").get<double>();
    m.max_density_lo = stats.at("max_density_lo").get<double>();
    m.frames_total = stats.at("frames_total").get<int>();
    for (const auto& js : j.at("sims")) {
        SimEntry s;
        s.id = js.at("id").get<int>();
        s.split = js.at("split").get<std::string>();
        for (const auto& jf : js.at("frames")) {
            FrameEntry f;
            f.index = jf.at("index").get<int>();
            f.x_density = jf.at("x_density").get<std::string>();
            f.x_velocity = jf.at("x_velocity").get<std::string>();
            f.y_density = jf.at("y_density").get<std::string>();
            f.y_velocity = jf.at("y_velocity").get<std::string>();
            s.frames.push_back(std::move(f));
        }
        m.sims.push_back(std::move(s));
    }
    m.root = fs::path(path).parent_path().string();
    return m;
}

void validate_manifest(const DatasetManifest& m) {
    for (const auto& s : m.sims) {
        int prev = -1;
        for (const auto& f : s.frames) {
            if (f.index <= prev)
                throw std::runtime_error("manifest: frame indices not strictly increasing in sim " +
                                         std::to_string(s.id));
            prev = f.index;
            for (const std::string* rel :
                 {&f.x_density, &f.x_velocity, &f.y_density, &f.y_velocity}) {
                const std::string path = m.resolve(*rel);
                GridField g = read_tgf(path); // throws if missing or malformed
                const bool is_y = rel == &f.y_density || rel == &f.y_velocity;
                for (int a = 0; a < g.dim(); ++a) {
                    const int expect = is_y ? m.hi_shape[size_t(a)] : m.hi_shape[size_t(a)] / m.scale;
                    if (g.shape(a) != expect)
                        throw std::runtime_error("manifest: unexpected shape in " + path);
                }
            }
        }
    }
}

} // namespace tempogan
