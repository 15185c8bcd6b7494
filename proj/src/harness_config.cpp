#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "tface/harness.hpp"

namespace tface::harness {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& origin, const std::string& key,
                    const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw IoError(origin + ": bad numeric value '" + value + "' for " + key);
    }
}

long parse_int(const std::string& origin, const std::string& key,
               const std::string& value) {
    try {
        size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw IoError(origin + ": bad integer value '" + value + "' for " + key);
    }
}

std::vector<double> parse_list(const std::string& origin, const std::string& key,
                               const std::string& value) {
    std::vector<double> out;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(origin, key, item));
    }
    if (out.empty()) throw IoError(origin + ": empty list for " + key);
    return out;
}

ensemble::PosePartition parse_ranges(const std::string& origin,
                                     const std::string& value) {
    ensemble::PosePartition p;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw IoError(origin + ": range '" + item + "' must be min:max");
        const double lo = parse_double(origin, "ranges", trim(item.substr(0, colon)));
        const double hi = parse_double(origin, "ranges", trim(item.substr(colon + 1)));
        if (hi < lo) throw IoError(origin + ": range '" + item + "' is inverted");
        p.ranges.push_back({lo, hi});
    }
    if (p.ranges.empty()) throw IoError(origin + ": no pose ranges given");
    return p;
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);

        if (line.front() == '[') {
            if (line.back() != ']') throw IoError(where + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw IoError(where + ": empty key or value");

        if (section == "segment") {
            if (key == "t_low")
                cfg.segment.t_low = value == "auto"
                                        ? std::optional<double>{}
                                        : std::optional<double>{
                                              parse_double(where, key, value)};
            else if (key == "t_high")
                cfg.segment.t_high = value == "inf"
                                         ? std::numeric_limits<double>::infinity()
                                         : parse_double(where, key, value);
            else if (key == "elem_area_fraction")
                cfg.segment.elem_area_fraction = parse_double(where, key, value);
            else
                throw IoError(where + ": unknown segment key '" + key + "'");
        } else if (section == "enhance") {
            if (key == "k")
                cfg.diffusion.k = parse_double(where, key, value);
            else if (key == "step")
                cfg.diffusion.step = parse_double(where, key, value);
            else if (key == "iterations")
                cfg.diffusion.iterations =
                    static_cast<int>(parse_int(where, key, value));
            else if (key == "conductance") {
                if (value == "paper")
                    cfg.diffusion.conductance = enhance::Conductance::paper;
                else if (value == "perona_malik")
                    cfg.diffusion.conductance = enhance::Conductance::perona_malik;
                else
                    throw IoError(where + ": conductance must be paper|perona_malik");
            } else if (key == "conductance_update") {
                if (value == "frozen")
                    cfg.diffusion.update = enhance::ConductanceUpdate::frozen;
                else if (value == "per_step")
                    cfg.diffusion.update = enhance::ConductanceUpdate::per_step;
                else
                    throw IoError(where +
                                  ": conductance_update must be frozen|per_step");
            } else
                throw IoError(where + ": unknown enhance key '" + key + "'");
        } else if (section == "vesselness") {
            if (key == "scales")
                cfg.vesselness.scales = parse_list(where, key, value);
            else if (key == "beta")
                cfg.vesselness.beta = parse_double(where, key, value);
            else if (key == "c")
                cfg.vesselness.c = value == "auto"
                                       ? std::optional<double>{}
                                       : std::optional<double>{
                                             parse_double(where, key, value)};
            else
                throw IoError(where + ": unknown vesselness key '" + key + "'");
        } else if (section == "ensemble") {
            if (key == "ranges")
                cfg.ensemble.partition = parse_ranges(where, value);
            else if (key == "clusters_per_range")
                cfg.ensemble.clusters_per_range =
                    static_cast<int>(parse_int(where, key, value));
            else if (key == "variance_keep")
                cfg.ensemble.variance_keep = parse_double(where, key, value);
            else if (key == "seed")
                cfg.ensemble.seed = static_cast<uint64_t>(parse_int(where, key, value));
            else if (key == "parallel_fits")
                cfg.ensemble.parallel_fits = parse_int(where, key, value) != 0;
            else
                throw IoError(where + ": unknown ensemble key '" + key + "'");
        } else if (section == "fit") {
            if (key == "tol")
                cfg.fit.tol = parse_double(where, key, value);
            else if (key == "max_iter")
                cfg.fit.max_iter = static_cast<int>(parse_int(where, key, value));
            else
                throw IoError(where + ": unknown fit key '" + key + "'");
        } else if (section == "protocol") {
            if (key == "enroll_seed")
                cfg.enroll_seed = static_cast<uint64_t>(parse_int(where, key, value));
            else
                throw IoError(where + ": unknown protocol key '" + key + "'");
        } else if (section == "io") {
            if (key == "mesh")
                cfg.mesh_path = value == "builtin" ? "" : value;
            else
                throw IoError(where + ": unknown io key '" + key + "'");
        } else {
            throw IoError(where + ": unknown section '" + section + "'");
        }
    }

    // validate ranges that the modules cannot check until use
    if (cfg.segment.elem_area_fraction <= 0.0)
        throw IoError(origin + ": elem_area_fraction must be positive");
    if (cfg.diffusion.k <= 0.0 || cfg.diffusion.step <= 0.0 ||
        cfg.diffusion.step > 0.25 || cfg.diffusion.iterations < 0)
        throw IoError(origin + ": invalid enhance parameters");
    if (cfg.vesselness.beta <= 0.0 || (cfg.vesselness.c && *cfg.vesselness.c <= 0.0))
        throw IoError(origin + ": invalid vesselness parameters");
    for (double s : cfg.vesselness.scales)
        if (s <= 0.0) throw IoError(origin + ": vesselness scales must be positive");
    if (cfg.ensemble.clusters_per_range < 1 || cfg.ensemble.variance_keep <= 0.0 ||
        cfg.ensemble.variance_keep > 1.0)
        throw IoError(origin + ": invalid ensemble parameters");
    if (cfg.fit.tol <= 0.0 || cfg.fit.max_iter < 1)
        throw IoError(origin + ": invalid fit parameters");
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open manifest");
    const fs::path base = fs::path(path).parent_path();

    DatasetManifest mf;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        ManifestEntry e;
        std::string yaw_tok;
        if (!(ls >> e.subject_id >> yaw_tok >> e.image_path))
            throw IoError(path + ":" + std::to_string(lineno) +
                          ": expected <subject> <yaw> <image> [landmarks [session]]");
        e.yaw = parse_double(path + ":" + std::to_string(lineno), "yaw", yaw_tok);
        ls >> e.landmark_path >> e.session;

        auto resolve = [&](std::string& p) {
            if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
        };
        resolve(e.image_path);
        resolve(e.landmark_path);
        mf.entries.push_back(std::move(e));
    }
    if (mf.entries.empty()) throw IoError(path + ": manifest lists no entries");
    return mf;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    const fs::path base = fs::path(path).parent_path();
    char buf[64];
    for (const auto& e : manifest.entries) {
        auto rel = [&](const std::string& p) {
            const fs::path fp(p);
            return fp.is_absolute() ? fs::relative(fp, base).string() : p;
        };
        std::snprintf(buf, sizeof(buf), "%.10g", e.yaw);
        out << e.subject_id << " " << buf << " " << rel(e.image_path);
        if (!e.landmark_path.empty()) out << " " << rel(e.landmark_path);
        if (!e.session.empty()) out << " " << e.session;
        out << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
}

geom::ShapeInstance load_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open landmark file");
    size_t n = 0;
    in >> n;
    if (!in || n == 0 || n > 100000) throw IoError(path + ": bad landmark count");
    geom::ShapeInstance s(n);
    for (size_t i = 0; i < n; ++i) {
        in >> s[i].x >> s[i].y;
        if (!in) throw IoError(path + ": truncated landmark list");
    }
    return s;
}

void save_landmarks(const std::string& path, const geom::ShapeInstance& shape) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << shape.size() << "\n";
    char buf[96];
    for (const auto& p : shape) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    if (!out) throw IoError(path + ": write failed");
}

const geom::Mesh& resolve_mesh(const PipelineConfig& config) {
    if (config.mesh_path.empty()) return geom::default_face_mesh();
    static std::map<std::string, geom::Mesh> cache;
    auto it = cache.find(config.mesh_path);
    if (it == cache.end())
        it = cache.emplace(config.mesh_path, geom::load_mesh(config.mesh_path)).first;
    return it->second;
}

}  // namespace tface::harness
