#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tface/ensemble.hpp"

namespace tface::harness {

// ---------------------------------------------------------------------------
// Pipeline configuration: "[module]" sections of key = value lines,
// '#' comments. Unknown keys are rejected. See configs/default.cfg.
// ---------------------------------------------------------------------------

struct PipelineConfig {
    segment::SegmentParams segment;
    enhance::DiffusionParams diffusion;
    vessel::VesselnessParams vesselness;
    ensemble::EnsembleConfig ensemble;
    aam::FitParams fit;
    uint64_t enroll_seed = 1;
    std::string mesh_path;  ///< empty -> built-in 58-vertex layout
};

PipelineConfig parse_config(const std::string& text,
                            const std::string& origin = "<memory>");
PipelineConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Dataset manifest: one entry per line,
//   <subject_id> <yaw_deg> <image_path> [landmark_path [session]]
// '#' comments; paths are resolved relative to the manifest's directory.
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string subject_id;
    double yaw = 0.0;
    std::string image_path;
    std::string landmark_path;  ///< may be empty
    std::string session;        ///< optional tag
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const DatasetManifest& manifest);

/// Landmark file: first line the point count, then "x y" per line.
geom::ShapeInstance load_landmarks(const std::string& path);
void save_landmarks(const std::string& path, const geom::ShapeInstance& shape);

// ---------------------------------------------------------------------------
// Synthetic thermal-face datasets (ground-truth generator).
//
// Faces are textured canonical rasters (smooth warm base + per-subject bright
// ridge networks) warped onto per-subject jittered landmark layouts; yaw is a
// horizontal compression toward the face axis applied consistently to
// landmarks and texture. Fixed seed -> bit-identical dataset.
// ---------------------------------------------------------------------------

struct SynthSpec {
    int subjects = 10;
    std::vector<double> yaws = {0.0, 22.5, 45.0, 67.5, 90.0};
    uint64_t seed = 7;
    int appearance_groups = 0;  ///< 0 -> every subject its own group
    int width = 160;
    int height = 180;
    double noise = 0.005;
    int ridges_per_subject = 8;
    double ridge_sigma_min = 2.2;   ///< ridge cross-section std-dev (px)
    double ridge_sigma_max = 3.4;
    double ridge_amp = 0.14;
    double shape_jitter = 1.0;      ///< per-subject landmark jitter (px)
    double expression_jitter = 0.8; ///< per-image mouth/brow displacement (px)
    double yaw_compression = 0.45;  ///< width fraction lost at 90 degrees
    double background = 0.08;
};

SynthSpec parse_synth_spec(const std::string& text,
                           const std::string& origin = "<memory>");
SynthSpec load_synth_spec(const std::string& path);

struct SynthImage {
    std::string subject_id;
    double yaw = 0.0;
    ImageGrid image;
    geom::ShapeInstance landmarks;
    std::string image_id;  ///< unique per image, used as file stem
};

/// In-memory generation; output is fully determined by the SynthSpec fields.
std::vector<SynthImage> synthesize_faces(const geom::Mesh& mesh, const SynthSpec& spec);

/// Writes images/ (TFR1), landmarks/ and manifest.txt under out_dir.
void generate_synthetic_dataset(const geom::Mesh& mesh, const SynthSpec& spec,
                                const std::string& out_dir);

// ---------------------------------------------------------------------------
// Recognition protocol: train on the manifest, enroll one seeded image per
// subject, probe with the rest, score every probe against every gallery
// entry via pairwise mid-pose normalization + masked NCC.
// ---------------------------------------------------------------------------

struct ScoreRecord {
    std::string probe_id;
    std::string probe_subject;
    std::string gallery_subject;
    double rho = 0.0;
    double dyaw = 0.0;  ///< |probe yaw - gallery yaw|
};

struct RocPoint {
    double threshold = 0.0;
    double far = 0.0;  ///< false accept rate (inter >= threshold)
    double tar = 0.0;  ///< true accept rate (intra >= threshold)
};

struct YawBand {
    double lo = 0.0, hi = 0.0;  ///< (lo, hi], first band closed at 0
    size_t probes = 0;          ///< probes whose true-match dyaw falls here
    size_t rank1_hits = 0;
    std::vector<double> intra, inter;
    std::vector<RocPoint> roc;
};

struct EvalReport {
    size_t probes_total = 0;
    size_t probes_excluded = 0;    ///< pipeline failures, counted not scored
    size_t gallery_excluded = 0;
    std::vector<std::string> failures;
    std::vector<double> cmc;       ///< cmc[0] = rank-1, denominator = total
    std::vector<RocPoint> roc;
    std::vector<double> intra, inter;
    double mean_intra = 0.0, mean_inter = 0.0;
    std::vector<ScoreRecord> scores;
    std::vector<YawBand> bands;    ///< [0,30], (30,60], (60,90]
    double rank1() const { return cmc.empty() ? 0.0 : cmc.front(); }
};

EvalReport run_protocol(const geom::Mesh& mesh, const DatasetManifest& manifest,
                        const PipelineConfig& config);

/// Writes scores.csv, cmc.csv, roc.csv, per-band ROC CSVs, intra/inter score
/// lists and summary.txt. Output is byte-deterministic for a fixed report.
void write_report(const std::string& dir, const EvalReport& report);

/// ROC curve points over descending thresholds (unique scores + sentinels).
std::vector<RocPoint> roc_points(const std::vector<double>& intra,
                                 const std::vector<double>& inter);

const geom::Mesh& resolve_mesh(const PipelineConfig& config);

}  // namespace tface::harness
