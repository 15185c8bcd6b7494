#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tface/harness.hpp"
#include "tface/io.hpp"

namespace tface::harness {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Uniform in [0, 1) from the engine's raw 64-bit output; keeps the stream
/// independent of library distribution implementations.
inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_double(rng);
}

/// Box-Muller standard normal (pairwise, spare cached).
class Gauss {
public:
    explicit Gauss(std::mt19937_64& rng) : rng_(rng) {}
    double operator()() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        const double u1 = 1.0 - unit_double(rng_);  // (0, 1]
        const double u2 = unit_double(rng_);
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

private:
    std::mt19937_64& rng_;
    bool have_ = false;
    double spare_ = 0.0;
};

std::mt19937_64 seeded(uint64_t seed, uint32_t tag, uint32_t a, uint32_t b = 0) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      tag, a, b};
    return std::mt19937_64(seq);
}

struct Box {
    double xmin, xmax, ymin, ymax;
    double w() const { return xmax - xmin; }
    double h() const { return ymax - ymin; }
};

Box shape_box(const geom::ShapeInstance& s) {
    Box b{s[0].x, s[0].x, s[0].y, s[0].y};
    for (const auto& p : s) {
        b.xmin = std::min(b.xmin, p.x);
        b.xmax = std::max(b.xmax, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

void add_blob(ImageGrid& img, double cx, double cy, double sigma, double amp) {
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double dx = x - cx, dy = y - cy;
            img.at(x, y) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
}

/// Distance from p to the segment a-b.
double segment_distance(double px, double py, double ax, double ay, double bx,
                        double by) {
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void stamp_ridge(ImageGrid& field, double ax, double ay, double bx, double by,
                 double sigma, double amp) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - 4 * sigma)));
    const int x1 = std::min(field.width() - 1,
                            static_cast<int>(std::ceil(std::max(ax, bx) + 4 * sigma)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - 4 * sigma)));
    const int y1 = std::min(field.height() - 1,
                            static_cast<int>(std::ceil(std::max(ay, by) + 4 * sigma)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d = segment_distance(x, y, ax, ay, bx, by);
            const double v = amp * std::exp(-d * d / (2.0 * sigma * sigma));
            field.at(x, y) = std::max(field.at(x, y), v);
        }
}

/// Per-subject canonical texture in the mesh asset frame: smooth warm base,
/// appearance-group blobs, a small subject tweak, and the subject's bright
/// ridge network (max-stamped so crossings stay ridge-like).
ImageGrid subject_texture(const geom::Mesh& mesh, const SynthSpec& spec,
                          int subject, int group) {
    int fw = 0, fh = 0;
    aam::canonical_frame_size(mesh, fw, fh);
    const Box bb = shape_box(mesh.vertices);

    ImageGrid tex(fw, fh);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            tex.at(x, y) = 0.55 + 0.10 * ((y - bb.ymin) / bb.h() - 0.5);

    auto grng = seeded(spec.seed, 'G', static_cast<uint32_t>(group));
    for (int i = 0; i < 5; ++i) {
        const double cx = uniform(grng, bb.xmin + 0.1 * bb.w(), bb.xmax - 0.1 * bb.w());
        const double cy = uniform(grng, bb.ymin + 0.1 * bb.h(), bb.ymax - 0.1 * bb.h());
        const double sigma = uniform(grng, 10.0, 20.0);
        const double amp = (unit_double(grng) < 0.5 ? -1.0 : 1.0) *
                           uniform(grng, 0.06, 0.12);
        add_blob(tex, cx, cy, sigma, amp);
    }

    auto srng = seeded(spec.seed, 'S', static_cast<uint32_t>(subject));
    for (int i = 0; i < 2; ++i) {
        const double cx = uniform(srng, bb.xmin + 0.1 * bb.w(), bb.xmax - 0.1 * bb.w());
        const double cy = uniform(srng, bb.ymin + 0.1 * bb.h(), bb.ymax - 0.1 * bb.h());
        const double sigma = uniform(srng, 8.0, 14.0);
        const double amp = (unit_double(srng) < 0.5 ? -1.0 : 1.0) *
                           uniform(srng, 0.015, 0.025);
        add_blob(tex, cx, cy, sigma, amp);
    }

    ImageGrid ridges(fw, fh);
    for (int i = 0; i < spec.ridges_per_subject; ++i) {
        const double ax = uniform(srng, bb.xmin + 0.15 * bb.w(), bb.xmax - 0.15 * bb.w());
        const double ay = uniform(srng, bb.ymin + 0.15 * bb.h(), bb.ymax - 0.15 * bb.h());
        const double angle = uniform(srng, 0.0, kPi);
        const double len = uniform(srng, 18.0, 42.0);
        const double sigma = uniform(srng, spec.ridge_sigma_min, spec.ridge_sigma_max);
        stamp_ridge(ridges, ax, ay, ax + len * std::cos(angle),
                    ay + len * std::sin(angle), sigma, spec.ridge_amp);
    }
    for (size_t i = 0; i < tex.size(); ++i)
        tex[i] = std::clamp(tex[i] + ridges[i], 0.02, 0.98);
    return tex;
}

}  // namespace

std::vector<SynthImage> synthesize_faces(const geom::Mesh& mesh,
                                         const SynthSpec& spec) {
    mesh.validate();
    if (spec.subjects < 1) throw ParameterError("synthesize_faces: subjects < 1");
    if (spec.yaws.empty()) throw ParameterError("synthesize_faces: no yaw angles");
    for (double y : spec.yaws)
        if (!(y >= 0.0 && y <= 90.0))
            throw ParameterError("synthesize_faces: yaw outside [0, 90]");
    if (spec.width < 32 || spec.height < 32)
        throw ParameterError("synthesize_faces: canvas too small");
    if (spec.ridge_sigma_min <= 0.0 || spec.ridge_sigma_max < spec.ridge_sigma_min)
        throw ParameterError("synthesize_faces: bad ridge sigma range");
    if (spec.noise < 0.0 || spec.ridges_per_subject < 0)
        throw ParameterError("synthesize_faces: negative noise or ridge count");
    if (spec.yaw_compression < 0.0 || spec.yaw_compression >= 1.0)
        throw ParameterError("synthesize_faces: yaw_compression must lie in [0, 1)");

    const Box bb = shape_box(mesh.vertices);
    std::vector<SynthImage> out;
    out.reserve(static_cast<size_t>(spec.subjects) * spec.yaws.size());
    char buf[64];

    for (int s = 0; s < spec.subjects; ++s) {
        const int group = spec.appearance_groups > 0 ? s % spec.appearance_groups : s;
        const ImageGrid tex = subject_texture(mesh, spec, s, group);

        // subject layout: per-axis scale about the asset centre + vertex jitter
        auto srng = seeded(spec.seed, 'L', static_cast<uint32_t>(s));
        const double sx = uniform(srng, 0.94, 1.06);
        const double sy = uniform(srng, 0.94, 1.06);
        const double cx0 = 0.5 * (bb.xmin + bb.xmax);
        const double cy0 = 0.5 * (bb.ymin + bb.ymax);
        geom::ShapeInstance base(mesh.vertices.size());
        for (size_t v = 0; v < base.size(); ++v) {
            base[v].x = cx0 + sx * (mesh.vertices[v].x - cx0) +
                        uniform(srng, -spec.shape_jitter, spec.shape_jitter);
            base[v].y = cy0 + sy * (mesh.vertices[v].y - cy0) +
                        uniform(srng, -spec.shape_jitter, spec.shape_jitter);
        }

        for (size_t yi = 0; yi < spec.yaws.size(); ++yi) {
            const double yaw = spec.yaws[yi];
            auto irng = seeded(spec.seed, 'I', static_cast<uint32_t>(s),
                               static_cast<uint32_t>(yi));

            // expression: smooth vertical displacement bands (mouth, brows)
            geom::ShapeInstance shape = base;
            const Box sb = shape_box(base);
            const double mouth_amp = uniform(irng, -spec.expression_jitter,
                                             spec.expression_jitter);
            const double brow_amp = uniform(irng, -spec.expression_jitter,
                                            spec.expression_jitter);
            const double y_mouth = sb.ymin + 0.78 * sb.h();
            const double y_brow = sb.ymin + 0.30 * sb.h();
            const double r_mouth = 0.10 * sb.h();
            const double r_brow = 0.08 * sb.h();
            for (auto& p : shape) {
                const double dm = (p.y - y_mouth) / r_mouth;
                const double db = (p.y - y_brow) / r_brow;
                p.y += mouth_amp * std::exp(-dm * dm) + brow_amp * std::exp(-db * db);
            }

            // yaw: horizontal compression toward the face axis
            const double f =
                1.0 - spec.yaw_compression * std::pow(yaw / 90.0, 1.15);
            double axis = 0.0;
            for (const auto& p : shape) axis += p.x;
            axis /= static_cast<double>(shape.size());
            for (auto& p : shape) p.x = axis + f * (p.x - axis);

            // centre the face on the canvas (integer shift keeps files tidy)
            const Box fb = shape_box(shape);
            const double tx = std::round(0.5 * (spec.width - 1) - 0.5 * (fb.xmin + fb.xmax));
            const double ty = std::round(0.5 * (spec.height - 1) - 0.5 * (fb.ymin + fb.ymax));
            for (auto& p : shape) {
                p.x += tx;
                p.y += ty;
            }

            const auto warp = geom::build_warp(mesh, shape, mesh.vertices);
            ImageGrid img = geom::warp_image(tex, warp, spec.width, spec.height);
            const BinaryMask inside =
                geom::rasterize_interior(mesh, shape, spec.width, spec.height);
            for (size_t i = 0; i < img.size(); ++i)
                if (!inside[i]) img[i] = spec.background;

            if (spec.noise > 0.0) {
                Gauss gauss(irng);
                for (size_t i = 0; i < img.size(); ++i) img[i] += spec.noise * gauss();
            }

            SynthImage si;
            std::snprintf(buf, sizeof(buf), "s%02d", s + 1);
            si.subject_id = buf;
            std::snprintf(buf, sizeof(buf), "s%02d_v%zu_y%03d", s + 1, yi,
                          static_cast<int>(std::lround(yaw * 10.0)));
            si.image_id = buf;
            si.yaw = yaw;
            si.image = std::move(img);
            si.landmarks = std::move(shape);
            out.push_back(std::move(si));
        }
    }
    return out;
}

void generate_synthetic_dataset(const geom::Mesh& mesh, const SynthSpec& spec,
                                const std::string& out_dir) {
    const fs::path root(out_dir);
    fs::create_directories(root / "images");
    fs::create_directories(root / "landmarks");

    DatasetManifest mf;
    for (auto& si : synthesize_faces(mesh, spec)) {
        const std::string img_rel = "images/" + si.image_id + ".tfr";
        const std::string lmk_rel = "landmarks/" + si.image_id + ".lmk";
        io::write_tfr((root / img_rel).string(), si.image);
        save_landmarks((root / lmk_rel).string(), si.landmarks);
        ManifestEntry e;
        e.subject_id = si.subject_id;
        e.yaw = si.yaw;
        e.image_path = img_rel;
        e.landmark_path = lmk_rel;
        mf.entries.push_back(std::move(e));
    }
    save_manifest((root / "manifest.txt").string(), mf);
}

namespace {

std::string trim_synth(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

SynthSpec parse_synth_spec(const std::string& text, const std::string& origin) {
    SynthSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim_synth(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(where + ": expected key = value");
        const std::string key = trim_synth(line.substr(0, eq));
        const std::string value = trim_synth(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw IoError(where + ": empty key or value");

        auto num = [&]() {
            try {
                size_t pos = 0;
                const double v = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(value);
                return v;
            } catch (const std::exception&) {
                throw IoError(where + ": bad numeric value '" + value + "'");
            }
        };

        if (key == "subjects")
            spec.subjects = static_cast<int>(num());
        else if (key == "yaws") {
            spec.yaws.clear();
            std::istringstream ys(value);
            std::string item;
            while (std::getline(ys, item, ',')) {
                item = trim_synth(item);
                if (item.empty()) continue;
                try {
                    spec.yaws.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw IoError(where + ": bad yaw '" + item + "'");
                }
            }
            if (spec.yaws.empty()) throw IoError(where + ": empty yaw list");
        } else if (key == "seed")
            spec.seed = static_cast<uint64_t>(num());
        else if (key == "appearance_groups")
            spec.appearance_groups = static_cast<int>(num());
        else if (key == "width")
            spec.width = static_cast<int>(num());
        else if (key == "height")
            spec.height = static_cast<int>(num());
        else if (key == "noise")
            spec.noise = num();
        else if (key == "ridges_per_subject")
            spec.ridges_per_subject = static_cast<int>(num());
        else if (key == "ridge_sigma_min")
            spec.ridge_sigma_min = num();
        else if (key == "ridge_sigma_max")
            spec.ridge_sigma_max = num();
        else if (key == "ridge_amp")
            spec.ridge_amp = num();
        else if (key == "shape_jitter")
            spec.shape_jitter = num();
        else if (key == "expression_jitter")
            spec.expression_jitter = num();
        else if (key == "yaw_compression")
            spec.yaw_compression = num();
        else if (key == "background")
            spec.background = num();
        else
            throw IoError(where + ": unknown key '" + key + "'");
    }

    // semantic validation mirrors synthesize_faces so bad files fail at load
    if (spec.subjects < 1) throw IoError(origin + ": subjects must be >= 1");
    if (spec.yaws.empty()) throw IoError(origin + ": no yaw angles");
    for (double y : spec.yaws)
        if (!(y >= 0.0 && y <= 90.0))
            throw IoError(origin + ": yaw outside [0, 90]");
    if (spec.width < 32 || spec.height < 32)
        throw IoError(origin + ": canvas too small");
    if (spec.ridge_sigma_min <= 0.0 || spec.ridge_sigma_max < spec.ridge_sigma_min)
        throw IoError(origin + ": bad ridge sigma range");
    if (spec.noise < 0.0 || spec.ridges_per_subject < 0)
        throw IoError(origin + ": negative noise or ridge count");
    if (spec.yaw_compression < 0.0 || spec.yaw_compression >= 1.0)
        throw IoError(origin + ": yaw_compression must lie in [0, 1)");
    return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open spec");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_synth_spec(ss.str(), path);
}

}  // namespace tface::harness
