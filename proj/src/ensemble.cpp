#include "tface/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace tface::ensemble {

namespace fs = std::filesystem;

std::vector<std::vector<int>> partition_by_pose(const PosePartition& partition,
                                                const std::vector<double>& yaws) {
    if (partition.ranges.empty())
        throw ParameterError("partition_by_pose: no ranges");
    for (size_t i = 0; i < yaws.size(); ++i)
        if (!(yaws[i] >= 0.0 && yaws[i] <= 90.0))
            throw AnnotationError("partition_by_pose: yaw " + std::to_string(yaws[i]) +
                                  " of sample " + std::to_string(i) +
                                  " outside [0, 90]");
    std::vector<std::vector<int>> out(partition.ranges.size());
    for (size_t r = 0; r < partition.ranges.size(); ++r)
        for (size_t i = 0; i < yaws.size(); ++i)
            if (yaws[i] >= partition.ranges[r].yaw_min &&
                yaws[i] <= partition.ranges[r].yaw_max)
                out[r].push_back(static_cast<int>(i));
    return out;
}

namespace {

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Plain Lloyd k-means with k-means++ seeding; all tie-breaks deterministic.
std::vector<int> kmeans(const std::vector<Eigen::VectorXd>& pts, int k,
                        uint64_t seed) {
    const int n = static_cast<int>(pts.size());
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);
    centers.push_back(pts[rng() % n]);

    std::vector<double> d2(n, 0.0);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers)
                best = std::min(best, (pts[i] - c).squaredNorm());
            d2[i] = best;
            total += best;
        }
        int pick = 0;
        if (total > 0.0) {
            const double r = unit_double(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<int>(rng() % n);
        }
        centers.push_back(pts[pick]);
    }

    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (pts[i] - centers[0]).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d = (pts[i] - centers[c]).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        // recompute centers; resurrect an empty cluster with the sample
        // farthest from its assigned center (lowest index on ties)
        std::vector<int> counts(k, 0);
        std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(pts[0].size()));
        for (int i = 0; i < n; ++i) {
            sums[labels[i]] += pts[i];
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers[c] = sums[c] / counts[c];
                continue;
            }
            int far_i = 0;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                const double d = (pts[i] - centers[labels[i]]).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            centers[c] = pts[far_i];
            labels[far_i] = c;
            changed = true;
        }
        if (!changed && iter > 0) break;
    }
    return labels;
}

}  // namespace

std::vector<int> cluster_appearances(const std::vector<Eigen::VectorXd>& features,
                                     const std::vector<std::string>& subject_ids,
                                     int k, uint64_t seed) {
    if (features.empty()) throw ParameterError("cluster_appearances: no samples");
    if (features.size() != subject_ids.size())
        throw ParameterError("cluster_appearances: ids and features must pair up");
    if (k < 1) throw ParameterError("cluster_appearances: k must be >= 1");
    if (static_cast<size_t>(k) > features.size())
        throw ParameterError("cluster_appearances: k exceeds sample count");
    if (k == 1) return std::vector<int>(features.size(), 0);

    std::vector<int> labels = kmeans(features, k, seed);

    // person-level assignment: majority vote, ties to the lowest label
    std::map<std::string, std::vector<int>> votes;
    for (size_t i = 0; i < labels.size(); ++i)
        votes[subject_ids[i]].push_back(labels[i]);
    std::map<std::string, int> person_label;
    for (const auto& [id, v] : votes) {
        std::vector<int> count(k, 0);
        for (int l : v) ++count[l];
        person_label[id] =
            static_cast<int>(std::max_element(count.begin(), count.end()) -
                             count.begin());
    }
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = person_label[subject_ids[i]];
    return labels;
}

Ensemble train_ensemble(const geom::Mesh& mesh,
                        const std::vector<TrainSample>& samples,
                        const EnsembleConfig& config) {
    if (samples.empty()) throw ParameterError("train_ensemble: no samples");
    if (config.clusters_per_range < 1)
        throw ParameterError("train_ensemble: clusters_per_range must be >= 1");
    if (config.variance_keep <= 0.0 || config.variance_keep > 1.0)
        throw ParameterError("train_ensemble: variance_keep must lie in (0, 1]");
    for (const auto& s : samples)
        if (static_cast<int>(s.landmarks.size()) != mesh.vertex_count())
            throw AnnotationError("train_ensemble: sample '" + s.subject_id +
                                  "' has wrong landmark count");

    std::vector<double> yaws(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) yaws[i] = samples[i].yaw;
    const auto by_range = partition_by_pose(config.partition, yaws);

    Ensemble ens;
    ens.partition = config.partition;
    ens.clusters_per_range = config.clusters_per_range;
    ens.parallel_fits = config.parallel_fits;
    ens.training_cells.assign(samples.size(), {});

    int fw = 0, fh = 0;
    aam::canonical_frame_size(mesh, fw, fh);

    for (size_t r = 0; r < by_range.size(); ++r) {
        const auto& idx = by_range[r];
        if (static_cast<int>(idx.size()) < 2 * config.clusters_per_range)
            throw TrainingError("train_ensemble: range " + std::to_string(r) +
                                " has " + std::to_string(idx.size()) +
                                " samples, cannot populate " +
                                std::to_string(config.clusters_per_range) +
                                " clusters with >= 2 each");

        // shared reference shape for this range's appearance features
        std::vector<geom::ShapeInstance> range_shapes;
        range_shapes.reserve(idx.size());
        for (int i : idx) range_shapes.push_back(samples[i].landmarks);
        const aam::ShapeModel ref =
            aam::train_shape_model(mesh, range_shapes, config.variance_keep);
        const BinaryMask mask = geom::rasterize_interior(mesh, ref.mean_shape, fw, fh);
        std::vector<size_t> mask_idx;
        for (size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) mask_idx.push_back(i);

        std::vector<Eigen::VectorXd> feats;
        std::vector<std::string> ids;
        feats.reserve(idx.size());
        for (int i : idx) {
            const auto warp =
                geom::build_warp(mesh, ref.mean_shape, samples[i].landmarks);
            const ImageGrid canon =
                geom::warp_image(samples[i].raw_segmented, warp, fw, fh);
            Eigen::VectorXd v(mask_idx.size());
            for (size_t m = 0; m < mask_idx.size(); ++m) v[m] = canon[mask_idx[m]];
            const double mean = v.mean();
            v.array() -= mean;
            const double sd = std::sqrt(v.squaredNorm() / v.size());
            if (sd > 0.0) v /= sd;
            feats.push_back(std::move(v));
            ids.push_back(samples[i].subject_id);
        }

        const std::vector<int> labels = cluster_appearances(
            feats, ids, config.clusters_per_range, config.seed + r);

        const int base = static_cast<int>(r) * config.clusters_per_range;
        for (size_t s = 0; s < idx.size(); ++s)
            ens.training_cells[idx[s]].push_back(base + labels[s]);

        for (int c = 0; c < config.clusters_per_range; ++c) {
            std::vector<ImageGrid> imgs;
            std::vector<geom::ShapeInstance> shapes;
            for (size_t s = 0; s < idx.size(); ++s)
                if (labels[s] == c) {
                    imgs.push_back(samples[idx[s]].enhanced);
                    shapes.push_back(samples[idx[s]].landmarks);
                }
            if (imgs.size() < 2)
                throw TrainingError("train_ensemble: cell (range " +
                                    std::to_string(r) + ", cluster " +
                                    std::to_string(c) + ") has " +
                                    std::to_string(imgs.size()) +
                                    " samples (need >= 2)");
            Member m;
            m.range_idx = static_cast<int>(r);
            m.cluster_idx = c;
            m.model = aam::train_aam(mesh, imgs, shapes, config.variance_keep);
            ens.members.push_back(std::move(m));
        }
    }
    return ens;
}

const Member* Ensemble::find(int range_idx, int cluster_idx) const {
    for (const auto& m : members)
        if (m.range_idx == range_idx && m.cluster_idx == cluster_idx) return &m;
    return nullptr;
}

Selection select_and_fit(const Ensemble& ensemble, const ImageGrid& enhanced,
                         const BinaryMask& fg_mask, const aam::FitParams& params) {
    if (ensemble.members.empty()) throw ParameterError("select_and_fit: empty ensemble");
    if (fg_mask.count() == 0)
        throw ParameterError("select_and_fit: empty foreground mask");

    const size_t n = ensemble.members.size();
    std::vector<aam::FitResult> fits(n);
    std::vector<double> errors(n, std::numeric_limits<double>::infinity());

    auto run_one = [&](size_t m) {
        const aam::AamModel& model = ensemble.members[m].model;
        try {
            const auto seed = aam::seed_from_mask(model, fg_mask);
            fits[m] = aam::fit(model, enhanced, seed, params);
            errors[m] = fits[m].final_error;
        } catch (const Error&) {
            // failed member: error stays +inf
        }
    };

    if (ensemble.parallel_fits && n > 1) {
        std::vector<std::future<void>> tasks;
        tasks.reserve(n);
        for (size_t m = 0; m < n; ++m)
            tasks.push_back(std::async(std::launch::async, run_one, m));
        for (auto& t : tasks) t.get();
    } else {
        for (size_t m = 0; m < n; ++m) run_one(m);
    }

    // deterministic reduction: strict minimum, lowest index on ties
    size_t best = n;
    for (size_t m = 0; m < n; ++m)
        if (std::isfinite(errors[m]) && (best == n || errors[m] < errors[best]))
            best = m;
    if (best == n)
        throw SelectionError("select_and_fit: every ensemble member failed to fit");

    Selection sel;
    sel.member_idx = static_cast<int>(best);
    sel.range_idx = ensemble.members[best].range_idx;
    sel.cluster_idx = ensemble.members[best].cluster_idx;
    sel.fit = fits[best];
    sel.all_errors = std::move(errors);
    return sel;
}

int target_range_for(const Ensemble& ensemble, const Selection& a,
                     const Selection& b) {
    const double mid = 0.5 * (ensemble.partition.ranges[a.range_idx].center() +
                              ensemble.partition.ranges[b.range_idx].center());
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < ensemble.partition.ranges.size(); ++r) {
        const double d = std::abs(ensemble.partition.ranges[r].center() - mid);
        if (d < best_d) {  // strict: ties keep the lower index
            best_d = d;
            best = static_cast<int>(r);
        }
    }
    return best;
}

int target_member_for(const Ensemble& ensemble, const Selection& sel,
                      int target_range) {
    for (size_t i = 0; i < ensemble.members.size(); ++i)
        if (ensemble.members[i].range_idx == target_range &&
            ensemble.members[i].cluster_idx == sel.cluster_idx)
            return static_cast<int>(i);
    // fallback: minimal-error member within the target range
    int best = -1;
    double best_e = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ensemble.members.size(); ++i) {
        if (ensemble.members[i].range_idx != target_range) continue;
        if (sel.all_errors[i] < best_e) {
            best_e = sel.all_errors[i];
            best = static_cast<int>(i);
        }
    }
    if (best < 0)
        throw SelectionError("target_member_for: no member in target range " +
                             std::to_string(target_range));
    return best;
}

NormalizedPair normalize_pair(const Ensemble& ensemble,
                              const ImageGrid& raw_segmented_a, const Selection& sel_a,
                              const ImageGrid& raw_segmented_b, const Selection& sel_b,
                              const vessel::VesselnessParams& vparams) {
    NormalizedPair out;
    out.target_range = target_range_for(ensemble, sel_a, sel_b);

    const Member& ma =
        ensemble.members[target_member_for(ensemble, sel_a, out.target_range)];
    const Member& mb =
        ensemble.members[target_member_for(ensemble, sel_b, out.target_range)];

    const auto shape_a =
        ensemble.members[sel_a.member_idx].model.shape_from_params(sel_a.fit.p);
    const auto shape_b =
        ensemble.members[sel_b.member_idx].model.shape_from_params(sel_b.fit.p);

    out.sig_a = vessel::extract_signature(raw_segmented_a, shape_a, ma.model, vparams);
    out.sig_b = vessel::extract_signature(raw_segmented_b, shape_b, mb.model, vparams);

    const BinaryMask ia = vessel::signature_mask(ma.model, vparams);
    const BinaryMask ib = vessel::signature_mask(mb.model, vparams);
    out.mask = BinaryMask(ia.width(), ia.height());
    for (size_t i = 0; i < out.mask.size(); ++i) out.mask[i] = ia[i] && ib[i];
    return out;
}

NormalizedPair normalize_pair(const Ensemble& ensemble, const ImageGrid& raw_a,
                              const ImageGrid& raw_b,
                              const segment::SegmentParams& sparams,
                              const enhance::DiffusionParams& dparams,
                              const vessel::VesselnessParams& vparams,
                              const aam::FitParams& fparams) {
    const auto seg_a = segment::segment_face(raw_a, sparams);
    const auto seg_b = segment::segment_face(raw_b, sparams);
    const ImageGrid enh_a = enhance::enhance_detail(seg_a.segmented, dparams);
    const ImageGrid enh_b = enhance::enhance_detail(seg_b.segmented, dparams);
    const Selection sel_a = select_and_fit(ensemble, enh_a, seg_a.mask, fparams);
    const Selection sel_b = select_and_fit(ensemble, enh_b, seg_b.mask, fparams);
    return normalize_pair(ensemble, seg_a.segmented, sel_a, seg_b.segmented, sel_b,
                          vparams);
}

void save_ensemble(const std::string& dir, const Ensemble& ensemble) {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "ensemble.manifest");
    if (!out) throw IoError(dir + ": cannot write ensemble manifest");
    char line[256];
    for (const auto& m : ensemble.members) {
        std::snprintf(line, sizeof(line), "member_%d_%d.aam1", m.range_idx,
                      m.cluster_idx);
        const std::string fname = line;
        const auto& range = ensemble.partition.ranges[m.range_idx];
        std::snprintf(line, sizeof(line), "%d %d %.10g %.10g %s\n", m.range_idx,
                      m.cluster_idx, range.yaw_min, range.yaw_max, fname.c_str());
        out << line;
        aam::save_aam((fs::path(dir) / fname).string(), m.model);
    }
    if (!out) throw IoError(dir + ": manifest write failed");
}

Ensemble load_ensemble(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "ensemble.manifest");
    if (!in) throw IoError(dir + ": cannot open ensemble manifest");

    Ensemble ens;
    std::map<int, PoseRange> ranges;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int r = 0, c = 0;
        double y0 = 0.0, y1 = 0.0;
        std::string fname;
        if (!(ls >> r >> c >> y0 >> y1 >> fname))
            throw IoError(dir + ": malformed ensemble manifest line: " + line);
        Member m;
        m.range_idx = r;
        m.cluster_idx = c;
        m.model = aam::load_aam((fs::path(dir) / fname).string());
        ens.members.push_back(std::move(m));
        ranges[r] = {y0, y1};
        ens.clusters_per_range = std::max(ens.clusters_per_range, c + 1);
    }
    if (ens.members.empty()) throw IoError(dir + ": ensemble manifest lists no members");
    int expect = 0;
    for (const auto& [r, range] : ranges) {
        if (r != expect++)
            throw IoError(dir + ": ensemble manifest has non-contiguous range ids");
        ens.partition.ranges.push_back(range);
    }
    return ens;
}

}  // namespace tface::ensemble
