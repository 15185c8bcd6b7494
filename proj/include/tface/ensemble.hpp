#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tface/aam.hpp"
#include "tface/enhance.hpp"
#include "tface/segment.hpp"
#include "tface/vesselness.hpp"

namespace tface::ensemble {

/// Yaw interval in degrees, inclusive on both ends (ranges overlap by design).
struct PoseRange {
    double yaw_min = 0.0;
    double yaw_max = 0.0;
    double center() const { return 0.5 * (yaw_min + yaw_max); }
};

struct PosePartition {
    std::vector<PoseRange> ranges;

    /// Three half-overlapping ranges covering 0-90 degrees.
    static PosePartition default_partition() {
        return {{{0.0, 45.0}, {22.5, 67.5}, {45.0, 90.0}}};
    }
};

/// Per-range sample index lists. A sample joins every range whose interval
/// contains its yaw. Yaw outside [0, 90] -> AnnotationError.
std::vector<std::vector<int>> partition_by_pose(const PosePartition& partition,
                                                const std::vector<double>& yaws);

/// Seeded k-means++ (Lloyd iterations, deterministic tie-breaks) followed by
/// a per-person majority vote so every image of one subject lands in the same
/// cluster. Returns one label per sample. k must not exceed the sample count.
std::vector<int> cluster_appearances(const std::vector<Eigen::VectorXd>& features,
                                     const std::vector<std::string>& subject_ids,
                                     int k, uint64_t seed);

struct TrainSample {
    std::string subject_id;
    double yaw = 0.0;
    ImageGrid raw_segmented;  ///< clustering + signatures
    ImageGrid enhanced;       ///< model training + fitting
    geom::ShapeInstance landmarks;
};

struct EnsembleConfig {
    PosePartition partition = PosePartition::default_partition();
    int clusters_per_range = 6;
    double variance_keep = 0.95;
    uint64_t seed = 1;
    bool parallel_fits = true;  ///< fit members concurrently in select_and_fit
};

struct Member {
    int range_idx = 0;
    int cluster_idx = 0;
    aam::AamModel model;
};

struct Ensemble {
    PosePartition partition;
    int clusters_per_range = 0;
    bool parallel_fits = true;
    std::vector<Member> members;  ///< range-major, cluster ascending

    /// Per training sample: the member indices whose training set contained
    /// it (one per range the sample's yaw falls in). Training-time metadata;
    /// empty after load_ensemble.
    std::vector<std::vector<int>> training_cells;

    const Member* find(int range_idx, int cluster_idx) const;
};

/// Pose partition -> per-range appearance clustering -> one model per
/// (range, cluster) cell. Every cell needs >= 2 samples (TrainingError names
/// the cell otherwise). Fixed seed + fixed inputs give a bit-identical result.
Ensemble train_ensemble(const geom::Mesh& mesh,
                        const std::vector<TrainSample>& samples,
                        const EnsembleConfig& config);

struct Selection {
    int member_idx = -1;
    int range_idx = -1;
    int cluster_idx = -1;
    aam::FitResult fit;
    std::vector<double> all_errors;  ///< per member; +inf where the fit failed
};

/// Fits every member from its own segmentation-derived seed and keeps the
/// minimal final error (ties -> lowest member index). All members failing ->
/// SelectionError.
Selection select_and_fit(const Ensemble& ensemble, const ImageGrid& enhanced,
                         const BinaryMask& fg_mask,
                         const aam::FitParams& params = {});

/// Range whose center lies nearest the mean of the two selections' range
/// centers (ties -> lower index).
int target_range_for(const Ensemble& ensemble, const Selection& a,
                     const Selection& b);

/// Member index used to re-warp sel's image within target_range: the cell of
/// sel's own cluster when present, else sel's minimal-error member there.
int target_member_for(const Ensemble& ensemble, const Selection& sel,
                      int target_range);

/// Mid-pose paired signatures living in the shared canonical frame.
struct NormalizedPair {
    ImageGrid sig_a, sig_b;
    BinaryMask mask;  ///< intersection of the two targets' signature masks
    int target_range = -1;
};

/// Target range = the one whose center is nearest the mean of the two chosen
/// ranges' centers (ties -> lower index). Each image is re-warped to the
/// target-range model of its own cluster; if that cell is absent, the
/// minimal-error member within the target range substitutes.
NormalizedPair normalize_pair(const Ensemble& ensemble,
                              const ImageGrid& raw_segmented_a, const Selection& sel_a,
                              const ImageGrid& raw_segmented_b, const Selection& sel_b,
                              const vessel::VesselnessParams& vparams = {});

/// Full-pipeline convenience overload: segment -> enhance -> select_and_fit
/// on both raw images, then the pairwise normalization above.
NormalizedPair normalize_pair(const Ensemble& ensemble, const ImageGrid& raw_a,
                              const ImageGrid& raw_b,
                              const segment::SegmentParams& sparams = {},
                              const enhance::DiffusionParams& dparams = {},
                              const vessel::VesselnessParams& vparams = {},
                              const aam::FitParams& fparams = {});

/// Directory layout: <dir>/ensemble.manifest with lines
/// "i j yaw_min yaw_max member_<i>_<j>.aam1" plus one AAM1 file per member.
void save_ensemble(const std::string& dir, const Ensemble& ensemble);
Ensemble load_ensemble(const std::string& dir);

}  // namespace tface::ensemble
