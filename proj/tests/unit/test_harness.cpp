#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "tface/errors.hpp"
#include "tface/harness.hpp"

using namespace tface;
using namespace tface::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

size_t line_count(const std::string& text) {
    return size_t(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("empty config text yields the documented defaults") {
    PipelineConfig c = parse_config("");
    CHECK_FALSE(c.segment.t_low.has_value());  // auto -> Otsu
    CHECK(std::isinf(c.segment.t_high));
    CHECK(c.segment.elem_area_fraction == doctest::Approx(0.06));
    CHECK(c.diffusion.k == doctest::Approx(20.0));
    CHECK(c.diffusion.step == doctest::Approx(0.2));
    CHECK(c.diffusion.iterations == 20);
    CHECK(c.diffusion.conductance == enhance::Conductance::paper);
    CHECK(c.diffusion.update == enhance::ConductanceUpdate::frozen);
    CHECK(c.vesselness.scales == std::vector<double>{3.0, 4.0, 5.0});
    CHECK(c.vesselness.beta == doctest::Approx(0.5));
    CHECK_FALSE(c.vesselness.c.has_value());
    CHECK(c.ensemble.clusters_per_range == 6);
    CHECK(c.ensemble.variance_keep == doctest::Approx(0.95));
    CHECK(c.ensemble.seed == 1);
    CHECK(c.ensemble.parallel_fits);
    CHECK(c.fit.tol == doctest::Approx(1e-6));
    CHECK(c.fit.max_iter == 50);
    CHECK(c.enroll_seed == 1);
    CHECK(c.mesh_path.empty());
}

TEST_CASE("every config key can be overridden") {
    const std::string text = R"(# full override
[segment]
t_low = 0.25
t_high = 0.9
elem_area_fraction = 0.04

[enhance]
k = 15
step = 0.25
iterations = 8
conductance = perona_malik
conductance_update = per_step

[vesselness]
scales = 2, 3.5
beta = 0.4
c = 0.12

[ensemble]
ranges = 0:30, 30:90
clusters_per_range = 3
variance_keep = 0.9
seed = 42
parallel_fits = 0

[fit]
tol = 1e-5
max_iter = 25

[protocol]
enroll_seed = 9

[io]
mesh = some/mesh.txt
)";
    PipelineConfig c = parse_config(text, "override.cfg");
    REQUIRE(c.segment.t_low.has_value());
    CHECK(*c.segment.t_low == doctest::Approx(0.25));
    CHECK(c.segment.t_high == doctest::Approx(0.9));
    CHECK(c.segment.elem_area_fraction == doctest::Approx(0.04));
    CHECK(c.diffusion.k == doctest::Approx(15.0));
    CHECK(c.diffusion.step == doctest::Approx(0.25));
    CHECK(c.diffusion.iterations == 8);
    CHECK(c.diffusion.conductance == enhance::Conductance::perona_malik);
    CHECK(c.diffusion.update == enhance::ConductanceUpdate::per_step);
    CHECK(c.vesselness.scales == std::vector<double>{2.0, 3.5});
    CHECK(c.vesselness.beta == doctest::Approx(0.4));
    REQUIRE(c.vesselness.c.has_value());
    CHECK(*c.vesselness.c == doctest::Approx(0.12));
    REQUIRE(c.ensemble.partition.ranges.size() == 2);
    CHECK(c.ensemble.partition.ranges[1].yaw_min == doctest::Approx(30.0));
    CHECK(c.ensemble.partition.ranges[1].yaw_max == doctest::Approx(90.0));
    CHECK(c.ensemble.clusters_per_range == 3);
    CHECK(c.ensemble.variance_keep == doctest::Approx(0.9));
    CHECK(c.ensemble.seed == 42);
    CHECK_FALSE(c.ensemble.parallel_fits);
    CHECK(c.fit.tol == doctest::Approx(1e-5));
    CHECK(c.fit.max_iter == 25);
    CHECK(c.enroll_seed == 9);
    CHECK(c.mesh_path == "some/mesh.txt");

    // "auto" / "inf" / "builtin" special values round back to defaults
    PipelineConfig d = parse_config(
        "[segment]\nt_low = auto\nt_high = inf\n[vesselness]\nc = auto\n"
        "[io]\nmesh = builtin\n");
    CHECK_FALSE(d.segment.t_low.has_value());
    CHECK(std::isinf(d.segment.t_high));
    CHECK_FALSE(d.vesselness.c.has_value());
    CHECK(d.mesh_path.empty());
}

TEST_CASE("config parser rejects unknown keys, sections, and bad values") {
    CHECK_THROWS_AS(parse_config("[segment]\nfoo = 1\n"), IoError);
    CHECK_THROWS_AS(parse_config("[nosuch]\nk = 1\n"), IoError);
    CHECK_THROWS_AS(parse_config("[enhance]\nk = soft\n"), IoError);
    CHECK_THROWS_AS(parse_config("[enhance]\nconductance = wrong\n"), IoError);
    CHECK_THROWS_AS(parse_config("k = 1\n"), IoError);  // key before any section
    CHECK_THROWS_AS(parse_config("[enhance]\nstep = 0.3\n"), IoError);  // unstable
    CHECK_THROWS_AS(parse_config("[ensemble]\nranges = 50:10\n"), IoError);
    CHECK_THROWS_AS(parse_config("[fit]\nmax_iter = 0\n"), IoError);
    CHECK_THROWS_AS(load_config("/no/such/file.cfg"), IoError);

    // the error message names the origin and line
    try {
        parse_config("[segment]\n\nbad_key = 1\n", "my.cfg");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("my.cfg:3") != std::string::npos);
    }
}

TEST_CASE("manifest round trip resolves paths against its directory") {
    auto dir = fresh_dir("tface_manifest_rt");
    {
        std::ofstream out(dir / "manifest.txt", std::ios::binary);
        out << "# demo dataset\n";
        out << "s01 0 images/a.tfr landmarks/a.lmk sess1\n";
        out << "s01 22.5 images/b.tfr landmarks/b.lmk\n";
        out << "s02 90 images/c.tfr\n";
    }
    DatasetManifest m = load_manifest((dir / "manifest.txt").string());
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[0].subject_id == "s01");
    CHECK(m.entries[0].yaw == doctest::Approx(0.0));
    CHECK(m.entries[0].image_path == (dir / "images/a.tfr").string());
    CHECK(m.entries[0].landmark_path == (dir / "landmarks/a.lmk").string());
    CHECK(m.entries[0].session == "sess1");
    CHECK(m.entries[1].yaw == doctest::Approx(22.5));
    CHECK(m.entries[1].session.empty());
    CHECK(m.entries[2].landmark_path.empty());

    // save -> load round trip: absolute paths are relativized on save
    save_manifest((dir / "copy.txt").string(), m);
    DatasetManifest back = load_manifest((dir / "copy.txt").string());
    REQUIRE(back.entries.size() == m.entries.size());
    for (size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(back.entries[i].subject_id == m.entries[i].subject_id);
        CHECK(back.entries[i].yaw == m.entries[i].yaw);
        CHECK(back.entries[i].image_path == m.entries[i].image_path);
        CHECK(back.entries[i].landmark_path == m.entries[i].landmark_path);
        CHECK(back.entries[i].session == m.entries[i].session);
    }

    CHECK_THROWS_AS(load_manifest((dir / "nothere.txt").string()), IoError);
    {
        std::ofstream out(dir / "bad.txt", std::ios::binary);
        out << "s01 notanumber img.tfr\n";
    }
    CHECK_THROWS_AS(load_manifest((dir / "bad.txt").string()), IoError);
}

TEST_CASE("landmark files round trip exactly") {
    auto dir = fresh_dir("tface_lmk_rt");
    geom::ShapeInstance s = {{1.5, 2.25}, {0.1 + 0.2, -3.0}, {1e-17, 42.0}};
    const auto path = (dir / "pts.lmk").string();
    save_landmarks(path, s);
    geom::ShapeInstance back = load_landmarks(path);
    REQUIRE(back.size() == s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(back[i].x == s[i].x);  // %.17g -> bit-exact doubles
        CHECK(back[i].y == s[i].y);
    }
    CHECK_THROWS_AS(load_landmarks((dir / "none.lmk").string()), IoError);
}

TEST_CASE("synthesis is deterministic and shaped by the spec") {
    const geom::Mesh& mesh = geom::default_face_mesh();
    SynthSpec spec;
    spec.subjects = 3;
    spec.yaws = {0.0, 45.0, 90.0};
    spec.seed = 77;

    auto a = synthesize_faces(mesh, spec);
    auto b = synthesize_faces(mesh, spec);
    REQUIRE(a.size() == 9);  // subjects x yaws
    REQUIRE(b.size() == a.size());

    std::set<std::string> ids;
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].subject_id == b[i].subject_id);
        CHECK(a[i].yaw == b[i].yaw);
        CHECK(a[i].image_id == b[i].image_id);
        ids.insert(a[i].image_id);
        REQUIRE(a[i].image.size() == b[i].image.size());
        for (size_t p = 0; p < a[i].image.size(); ++p)
            CHECK(a[i].image[p] == b[i].image[p]);  // bit identical
        REQUIRE(a[i].landmarks.size() == b[i].landmarks.size());
        CHECK(a[i].landmarks.size() == size_t(mesh.vertex_count()));
        for (size_t v = 0; v < a[i].landmarks.size(); ++v) {
            CHECK(a[i].landmarks[v].x == b[i].landmarks[v].x);
            CHECK(a[i].landmarks[v].y == b[i].landmarks[v].y);
        }
    }
    CHECK(ids.size() == a.size());  // image ids are unique

    // a different seed changes the pixels
    SynthSpec other = spec;
    other.seed = 78;
    auto c = synthesize_faces(mesh, other);
    bool differs = false;
    for (size_t p = 0; p < a[0].image.size() && !differs; ++p)
        differs = a[0].image[p] != c[0].image[p];
    CHECK(differs);
}

TEST_CASE("yaw compresses the landmark bounding box monotonically") {
    const geom::Mesh& mesh = geom::default_face_mesh();
    SynthSpec spec;
    spec.subjects = 2;
    spec.yaws = {0.0, 30.0, 60.0, 90.0};
    spec.seed = 5;
    auto faces = synthesize_faces(mesh, spec);

    auto bbox_width = [](const geom::ShapeInstance& s) {
        double lo = s[0].x, hi = s[0].x;
        for (const auto& p : s) {
            lo = std::min(lo, p.x);
            hi = std::max(hi, p.x);
        }
        return hi - lo;
    };

    for (int subj = 0; subj < 2; ++subj) {
        std::vector<double> widths;
        for (const auto& f : faces)
            if (f.subject_id == (subj == 0 ? "s01" : "s02")) widths.push_back(bbox_width(f.landmarks));
        REQUIRE(widths.size() == 4);
        for (size_t i = 1; i < widths.size(); ++i) CHECK(widths[i] < widths[i - 1]);
        // at 90 degrees nearly the configured fraction is gone
        CHECK(widths.back() < (1.0 - spec.yaw_compression + 0.08) * widths.front());
    }
}

TEST_CASE("synth spec parser applies overrides and validates") {
    SynthSpec d = parse_synth_spec("");
    CHECK(d.subjects == 10);
    CHECK(d.yaws == std::vector<double>{0.0, 22.5, 45.0, 67.5, 90.0});

    SynthSpec s = parse_synth_spec(
        "subjects = 4\nyaws = 0, 30, 60\nseed = 3\nappearance_groups = 2\n"
        "width = 120\nheight = 140\nnoise = 0.01\nridges_per_subject = 5\n"
        "ridge_amp = 0.2\nyaw_compression = 0.3\n");
    CHECK(s.subjects == 4);
    CHECK(s.yaws == std::vector<double>{0.0, 30.0, 60.0});
    CHECK(s.appearance_groups == 2);
    CHECK(s.width == 120);
    CHECK(s.height == 140);
    CHECK(s.ridge_amp == doctest::Approx(0.2));
    CHECK(s.yaw_compression == doctest::Approx(0.3));

    CHECK_THROWS_AS(parse_synth_spec("no_such_key = 1\n"), IoError);
    CHECK_THROWS_AS(parse_synth_spec("subjects = 0\n"), IoError);
    CHECK_THROWS_AS(parse_synth_spec("yaw_compression = 1.0\n"), IoError);
    CHECK_THROWS_AS(parse_synth_spec("yaws = 0, 95\n"), IoError);
}

TEST_CASE("roc_points hand case") {
    std::vector<double> intra = {0.9, 0.7};
    std::vector<double> inter = {0.8, 0.1};
    auto roc = roc_points(intra, inter);
    REQUIRE(roc.size() == 5);  // sentinel + 4 unique scores

    // descending thresholds
    for (size_t i = 1; i < roc.size(); ++i)
        CHECK(roc[i].threshold < roc[i - 1].threshold);

    CHECK(roc[0].threshold == doctest::Approx(1.9));  // max + 1 sentinel
    CHECK(roc[0].tar == 0.0);
    CHECK(roc[0].far == 0.0);
    CHECK(roc[1].threshold == doctest::Approx(0.9));
    CHECK(roc[1].tar == doctest::Approx(0.5));
    CHECK(roc[1].far == doctest::Approx(0.0));
    CHECK(roc[2].threshold == doctest::Approx(0.8));
    CHECK(roc[2].tar == doctest::Approx(0.5));
    CHECK(roc[2].far == doctest::Approx(0.5));
    CHECK(roc[3].threshold == doctest::Approx(0.7));
    CHECK(roc[3].tar == doctest::Approx(1.0));
    CHECK(roc[3].far == doctest::Approx(0.5));
    CHECK(roc[4].threshold == doctest::Approx(0.1));
    CHECK(roc[4].tar == doctest::Approx(1.0));
    CHECK(roc[4].far == doctest::Approx(1.0));

    CHECK(roc_points({}, inter).empty());
    CHECK(roc_points(intra, {}).empty());
}

TEST_CASE("protocol + report on a small synthetic dataset") {
    const geom::Mesh& mesh = geom::default_face_mesh();
    auto dir = fresh_dir("tface_protocol_rt");

    SynthSpec spec;
    spec.subjects = 3;
    spec.yaws = {0.0, 45.0, 90.0};
    spec.seed = 11;
    generate_synthetic_dataset(mesh, spec, dir.string());
    CHECK(fs::exists(dir / "manifest.txt"));
    CHECK(fs::exists(dir / "images"));
    CHECK(fs::exists(dir / "landmarks"));

    DatasetManifest manifest = load_manifest((dir / "manifest.txt").string());
    REQUIRE(manifest.entries.size() == 9);

    PipelineConfig cfg = parse_config("[ensemble]\nclusters_per_range = 1\n");
    EvalReport rep = run_protocol(mesh, manifest, cfg);

    // 3 gallery subjects enrolled, the other 6 images probe
    CHECK(rep.probes_total == 6);
    CHECK(rep.probes_excluded == 0);
    CHECK(rep.gallery_excluded == 0);
    CHECK(rep.failures.empty());
    REQUIRE(rep.cmc.size() == 3);
    for (size_t r = 1; r < rep.cmc.size(); ++r)
        CHECK(rep.cmc[r] >= rep.cmc[r - 1]);  // cumulative
    CHECK(rep.cmc.back() == doctest::Approx(1.0));
    CHECK(rep.scores.size() == 18);  // probes x gallery
    CHECK(rep.intra.size() == 6);
    CHECK(rep.inter.size() == 12);
    CHECK(rep.mean_intra > rep.mean_inter);  // identity signal present
    CHECK(rep.rank1() >= 0.5);

    REQUIRE(rep.bands.size() == 3);
    size_t band_probes = 0;
    for (const auto& b : rep.bands) band_probes += b.probes;
    CHECK(band_probes == rep.probes_total);

    // report writing: the documented files, byte-deterministic
    auto out1 = fresh_dir("tface_report_a");
    auto out2 = fresh_dir("tface_report_b");
    write_report(out1.string(), rep);
    write_report(out2.string(), rep);
    for (const char* name :
         {"scores.csv", "cmc.csv", "roc.csv", "roc_yaw_0_30.csv",
          "roc_yaw_30_60.csv", "roc_yaw_60_90.csv", "intra.txt", "inter.txt",
          "summary.txt"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(out1 / name));
        CHECK(file_bytes(out1 / name) == file_bytes(out2 / name));
    }
    // scores.csv = header + one line per (probe, gallery) pair
    CHECK(line_count(file_bytes(out1 / "scores.csv")) == 1 + rep.scores.size());
    CHECK(line_count(file_bytes(out1 / "cmc.csv")) == 1 + rep.cmc.size());
}

TEST_CASE("resolve_mesh caches and falls back to the built-in layout") {
    PipelineConfig cfg;
    const geom::Mesh& builtin = resolve_mesh(cfg);
    CHECK(&builtin == &geom::default_face_mesh());

    auto dir = fresh_dir("tface_mesh_rt");
    const auto path = (dir / "custom.mesh").string();
    geom::save_mesh(path, geom::default_face_mesh());
    cfg.mesh_path = path;
    const geom::Mesh& custom = resolve_mesh(cfg);
    CHECK(custom.vertex_count() == 58);
    CHECK(&resolve_mesh(cfg) == &custom);  // cached per path

    cfg.mesh_path = (dir / "missing.mesh").string();
    CHECK_THROWS_AS(resolve_mesh(cfg), IoError);
}

}  // TEST_SUITE
