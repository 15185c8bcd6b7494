#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tface/harness.hpp"
#include "tface/io.hpp"
#include "tface/kernels.hpp"
#include "tface/matching.hpp"

namespace fs = std::filesystem;
using namespace tface;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Preprocessed {
    ImageGrid raw_segmented;
    BinaryMask fg_mask;
    ImageGrid enhanced;
};

Preprocessed preprocess(const std::string& image_path,
                        const harness::PipelineConfig& cfg) {
    const ImageGrid raw = io::read_image(image_path);
    auto seg = segment::segment_face(raw, cfg.segment);
    Preprocessed out;
    out.enhanced = enhance::enhance_detail(seg.segmented, cfg.diffusion);
    out.raw_segmented = std::move(seg.segmented);
    out.fg_mask = std::move(seg.mask);
    return out;
}

std::vector<ensemble::TrainSample> samples_from_manifest(
    const geom::Mesh& mesh, const harness::DatasetManifest& manifest,
    const harness::PipelineConfig& cfg) {
    std::vector<ensemble::TrainSample> samples;
    for (const auto& e : manifest.entries) {
        if (e.landmark_path.empty())
            throw AnnotationError("entry '" + e.image_path + "' has no landmark file");
        auto landmarks = harness::load_landmarks(e.landmark_path);
        if (static_cast<int>(landmarks.size()) != mesh.vertex_count())
            throw AnnotationError("'" + e.landmark_path + "' has " +
                                  std::to_string(landmarks.size()) +
                                  " landmarks, mesh expects " +
                                  std::to_string(mesh.vertex_count()));
        try {
            auto pre = preprocess(e.image_path, cfg);
            samples.push_back({e.subject_id, e.yaw, std::move(pre.raw_segmented),
                               std::move(pre.enhanced), std::move(landmarks)});
        } catch (const Error& err) {
            std::cerr << "tface: skipping '" << e.image_path << "': " << err.what()
                      << "\n";
        }
    }
    return samples;
}

harness::PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? harness::PipelineConfig{} : harness::load_config(path);
}

int run(int argc, char** argv) {
    CLI::App app{"thermal-face signature pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tface 1.0.0");

    std::string isa = "auto";
    app.add_option("--isa", isa, "kernel backend: auto|scalar|avx2")
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

    // --- synth ---------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_spec, synth_out, synth_mesh;
    synth->add_option("spec", synth_spec, "synthesis spec (key = value lines)")
        ->required();
    synth->add_option("-o,--out", synth_out, "output dataset directory")->required();
    synth->add_option("--mesh", synth_mesh, "mesh file (default: built-in layout)");

    // --- train ---------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train an ensemble from a manifest");
    std::string train_manifest, train_config, train_out;
    train->add_option("manifest", train_manifest, "dataset manifest")->required();
    train->add_option("config", train_config, "pipeline config")->required();
    train->add_option("-o,--out", train_out, "output ensemble directory")->required();

    // --- fit -----------------------------------------------------------------
    auto* fit = app.add_subcommand("fit", "fit an image, report the chosen member");
    std::string fit_dir, fit_image, fit_config, fit_out;
    fit->add_option("ensemble", fit_dir, "ensemble directory")->required();
    fit->add_option("image", fit_image, "input image (.tfr or .pgm)")->required();
    fit->add_option("-c,--config", fit_config, "pipeline config");
    fit->add_option("-o,--out", fit_out, "write fitted landmarks here");

    // --- extract ---------------------------------------------------------------
    auto* extract =
        app.add_subcommand("extract", "write the pose-normalized signature");
    std::string ex_dir, ex_image, ex_config, ex_out;
    extract->add_option("ensemble", ex_dir, "ensemble directory")->required();
    extract->add_option("image", ex_image, "input image (.tfr or .pgm)")->required();
    extract->add_option("-c,--config", ex_config, "pipeline config");
    extract->add_option("-o,--out", ex_out, "output signature (.tfr)")->required();

    // --- match -----------------------------------------------------------------
    auto* match_cmd =
        app.add_subcommand("match", "rank gallery images against a probe");
    std::string m_dir, m_probe, m_gallery, m_config;
    match_cmd->add_option("ensemble", m_dir, "ensemble directory")->required();
    match_cmd->add_option("probe", m_probe, "probe image")->required();
    match_cmd->add_option("gallery", m_gallery, "directory of gallery images")
        ->required();
    match_cmd->add_option("-c,--config", m_config, "pipeline config");

    // --- evaluate ----------------------------------------------------------------
    auto* eval = app.add_subcommand("evaluate", "run the recognition protocol");
    std::string ev_manifest, ev_config, ev_out;
    eval->add_option("manifest", ev_manifest, "dataset manifest")->required();
    eval->add_option("config", ev_config, "pipeline config")->required();
    eval->add_option("-o,--out", ev_out, "report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (isa == "scalar") kernels::force_level(kernels::IsaLevel::scalar);
    if (isa == "avx2") kernels::force_level(kernels::IsaLevel::avx2);

    if (*synth) {
        const auto spec = harness::load_synth_spec(synth_spec);
        const geom::Mesh mesh =
            synth_mesh.empty() ? geom::default_face_mesh() : geom::load_mesh(synth_mesh);
        harness::generate_synthetic_dataset(mesh, spec, synth_out);
        std::cout << "wrote " << spec.subjects * spec.yaws.size() << " images to "
                  << synth_out << "\n";
        return 0;
    }

    if (*train) {
        const auto cfg = harness::load_config(train_config);
        const geom::Mesh& mesh = harness::resolve_mesh(cfg);
        const auto manifest = harness::load_manifest(train_manifest);
        const auto samples = samples_from_manifest(mesh, manifest, cfg);
        const auto ens = ensemble::train_ensemble(mesh, samples, cfg.ensemble);
        ensemble::save_ensemble(train_out, ens);
        std::cout << "trained " << ens.members.size() << " members into " << train_out
                  << "\n";
        return 0;
    }

    if (*fit) {
        const auto cfg = config_or_default(fit_config);
        const auto ens = ensemble::load_ensemble(fit_dir);
        const auto pre = preprocess(fit_image, cfg);
        const auto sel = ensemble::select_and_fit(ens, pre.enhanced, pre.fg_mask, cfg.fit);
        std::cout << "member " << sel.range_idx << " " << sel.cluster_idx << "\n"
                  << "error " << g17(sel.fit.final_error) << "\n"
                  << "converged " << (sel.fit.converged ? 1 : 0) << "\n"
                  << "iterations " << sel.fit.iterations << "\n";
        if (!fit_out.empty()) {
            const auto shape =
                ens.members[sel.member_idx].model.shape_from_params(sel.fit.p);
            harness::save_landmarks(fit_out, shape);
        }
        return 0;
    }

    if (*extract) {
        const auto cfg = config_or_default(ex_config);
        const auto ens = ensemble::load_ensemble(ex_dir);
        const auto pre = preprocess(ex_image, cfg);
        const auto sel = ensemble::select_and_fit(ens, pre.enhanced, pre.fg_mask, cfg.fit);
        const auto& model = ens.members[sel.member_idx].model;
        const auto sig = vessel::extract_signature(pre.raw_segmented, sel.fit, model,
                                                   cfg.vesselness);
        io::write_tfr(ex_out, sig);
        std::cout << "member " << sel.range_idx << " " << sel.cluster_idx
                  << " signature " << sig.width() << "x" << sig.height() << " -> "
                  << ex_out << "\n";
        return 0;
    }

    if (*match_cmd) {
        const auto cfg = config_or_default(m_config);
        const auto ens = ensemble::load_ensemble(m_dir);
        const auto probe = preprocess(m_probe, cfg);
        const auto probe_sel =
            ensemble::select_and_fit(ens, probe.enhanced, probe.fg_mask, cfg.fit);

        if (!fs::is_directory(m_gallery))
            throw IoError(m_gallery + ": not a directory");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(m_gallery)) {
            if (!entry.is_regular_file()) continue;
            const auto ext = entry.path().extension().string();
            if (ext == ".tfr" || ext == ".pgm") files.push_back(entry.path());
        }
        if (files.empty()) throw IoError(m_gallery + ": no .tfr/.pgm gallery images");
        std::sort(files.begin(), files.end());

        std::vector<match::ScorePair> scores;
        for (const auto& f : files) {
            const auto gal = preprocess(f.string(), cfg);
            const auto gal_sel =
                ensemble::select_and_fit(ens, gal.enhanced, gal.fg_mask, cfg.fit);
            const auto pair = ensemble::normalize_pair(ens, probe.raw_segmented,
                                                       probe_sel, gal.raw_segmented,
                                                       gal_sel, cfg.vesselness);
            scores.push_back(
                {f.stem().string(), match::ncc(pair.sig_a, pair.sig_b, pair.mask)});
        }
        for (const auto& s : match::rank_scores(std::move(scores)))
            std::cout << s.gallery_id << " " << g17(s.rho) << "\n";
        return 0;
    }

    if (*eval) {
        const auto cfg = harness::load_config(ev_config);
        const geom::Mesh& mesh = harness::resolve_mesh(cfg);
        const auto manifest = harness::load_manifest(ev_manifest);
        const auto report = harness::run_protocol(mesh, manifest, cfg);
        harness::write_report(ev_out, report);
        std::cout << "probes " << report.probes_total << " (excluded "
                  << report.probes_excluded << ")\n"
                  << "rank1 " << g17(report.rank1()) << "\n"
                  << "mean_intra " << g17(report.mean_intra) << "\n"
                  << "mean_inter " << g17(report.mean_inter) << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IoError& e) {
        std::cerr << "tface: " << e.what() << "\n";
        return 2;
    } catch (const AnnotationError& e) {
        std::cerr << "tface: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "tface: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "tface: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "tface: " << e.what() << "\n";
        return 3;
    }
}
