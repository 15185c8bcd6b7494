#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <random>

#include "tface/harness.hpp"
#include "tface/io.hpp"
#include "tface/matching.hpp"

namespace tface::harness {

namespace fs = std::filesystem;

std::vector<RocPoint> roc_points(const std::vector<double>& intra,
                                 const std::vector<double>& inter) {
    if (intra.empty() || inter.empty()) return {};
    std::vector<double> gi(intra), ge(inter);
    std::sort(gi.begin(), gi.end(), std::greater<>());
    std::sort(ge.begin(), ge.end(), std::greater<>());

    std::vector<double> thresholds;
    thresholds.reserve(gi.size() + ge.size());
    thresholds.insert(thresholds.end(), gi.begin(), gi.end());
    thresholds.insert(thresholds.end(), ge.begin(), ge.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());

    std::vector<RocPoint> pts;
    pts.reserve(thresholds.size() + 1);
    pts.push_back({thresholds.front() + 1.0, 0.0, 0.0});
    size_t ci = 0, ce = 0;
    for (double t : thresholds) {
        while (ci < gi.size() && gi[ci] >= t) ++ci;
        while (ce < ge.size() && ge[ce] >= t) ++ce;
        pts.push_back({t, static_cast<double>(ce) / ge.size(),
                       static_cast<double>(ci) / gi.size()});
    }
    return pts;
}

namespace {

struct Item {
    const ManifestEntry* entry = nullptr;
    std::string image_id;
    ImageGrid raw_segmented;
    BinaryMask fg_mask;
    ImageGrid enhanced;
    geom::ShapeInstance landmarks;
    bool preprocessed = false;
    ensemble::Selection sel;
    geom::ShapeInstance fitted_shape;
    bool fitted = false;
};

int band_of(double dyaw) { return dyaw <= 30.0 ? 0 : (dyaw <= 60.0 ? 1 : 2); }

}  // namespace

EvalReport run_protocol(const geom::Mesh& mesh, const DatasetManifest& manifest,
                        const PipelineConfig& config) {
    EvalReport report;
    report.bands.resize(3);
    const double band_edges[4] = {0.0, 30.0, 60.0, 90.0};
    for (int b = 0; b < 3; ++b) {
        report.bands[b].lo = band_edges[b];
        report.bands[b].hi = band_edges[b + 1];
    }

    // ---- load + preprocess every entry -------------------------------------
    std::vector<Item> items(manifest.entries.size());
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        if (e.landmark_path.empty())
            throw AnnotationError("run_protocol: entry '" + e.image_path +
                                  "' has no landmark file (training needs one)");
        Item& it = items[i];
        it.entry = &e;
        it.image_id = fs::path(e.image_path).stem().string();
        it.landmarks = load_landmarks(e.landmark_path);
        if (static_cast<int>(it.landmarks.size()) != mesh.vertex_count())
            throw AnnotationError("run_protocol: '" + e.landmark_path + "' has " +
                                  std::to_string(it.landmarks.size()) +
                                  " landmarks, mesh expects " +
                                  std::to_string(mesh.vertex_count()));
        const ImageGrid raw = io::read_image(e.image_path);
        try {
            auto seg = segment::segment_face(raw, config.segment);
            it.enhanced = enhance::enhance_detail(seg.segmented, config.diffusion);
            it.raw_segmented = std::move(seg.segmented);
            it.fg_mask = std::move(seg.mask);
            it.preprocessed = true;
        } catch (const Error& err) {
            report.failures.push_back(it.image_id + ": " + err.what());
        }
    }

    // ---- train on everything that survived preprocessing -------------------
    std::vector<ensemble::TrainSample> samples;
    for (const Item& it : items)
        if (it.preprocessed)
            samples.push_back({it.entry->subject_id, it.entry->yaw, it.raw_segmented,
                               it.enhanced, it.landmarks});
    const ensemble::Ensemble ens =
        ensemble::train_ensemble(mesh, samples, config.ensemble);

    // ---- seeded enrollment: one gallery image per subject -------------------
    std::map<std::string, std::vector<int>> by_subject;  // usable entries only
    for (size_t i = 0; i < items.size(); ++i)
        if (items[i].preprocessed)
            by_subject[items[i].entry->subject_id].push_back(static_cast<int>(i));

    std::mt19937_64 enroll_rng(config.enroll_seed);
    std::map<std::string, int> gallery_of;  // subject -> item index
    for (const auto& [subject, idx] : by_subject)
        gallery_of[subject] = idx[enroll_rng() % idx.size()];

    std::vector<int> gallery_items, probe_items;
    for (size_t i = 0; i < items.size(); ++i) {
        const auto g = gallery_of.find(items[i].entry->subject_id);
        if (g != gallery_of.end() && g->second == static_cast<int>(i))
            gallery_items.push_back(static_cast<int>(i));
        else
            probe_items.push_back(static_cast<int>(i));
    }
    report.probes_total = probe_items.size();

    // ---- fit whatever will be compared --------------------------------------
    auto fit_item = [&](Item& it) {
        if (!it.preprocessed) return;
        try {
            it.sel = ensemble::select_and_fit(ens, it.enhanced, it.fg_mask, config.fit);
            it.fitted_shape =
                ens.members[it.sel.member_idx].model.shape_from_params(it.sel.fit.p);
            it.fitted = true;
        } catch (const Error& err) {
            report.failures.push_back(it.image_id + ": " + err.what());
        }
    };
    for (int gi : gallery_items) fit_item(items[gi]);

    std::vector<int> gallery;  // usable gallery, sorted by subject id already
    for (int gi : gallery_items) {
        if (items[gi].fitted)
            gallery.push_back(gi);
        else
            ++report.gallery_excluded;
    }
    std::sort(gallery.begin(), gallery.end(), [&](int a, int b) {
        return items[a].entry->subject_id < items[b].entry->subject_id;
    });
    std::map<std::string, int> gallery_by_subject;
    for (int gi : gallery) gallery_by_subject[items[gi].entry->subject_id] = gi;

    for (int pi : probe_items) fit_item(items[pi]);

    // ---- pairwise scoring with per-(item, member) signature caching ---------
    std::map<std::pair<int, int>, ImageGrid> sig_cache;
    auto signature_for = [&](int item_idx, int member_idx) -> const ImageGrid& {
        const auto key = std::make_pair(item_idx, member_idx);
        auto it = sig_cache.find(key);
        if (it == sig_cache.end()) {
            const Item& im = items[item_idx];
            it = sig_cache
                     .emplace(key, vessel::extract_signature(
                                       im.raw_segmented, im.fitted_shape,
                                       ens.members[member_idx].model,
                                       config.vesselness))
                     .first;
        }
        return it->second;
    };
    std::map<int, BinaryMask> member_mask;
    auto member_mask_for = [&](int m) -> const BinaryMask& {
        auto it = member_mask.find(m);
        if (it == member_mask.end())
            it = member_mask
                     .emplace(m, vessel::signature_mask(ens.members[m].model,
                                                        config.vesselness))
                     .first;
        return it->second;
    };
    std::map<std::pair<int, int>, BinaryMask> mask_cache;
    auto mask_for = [&](int ma, int mb) -> const BinaryMask& {
        const auto key = std::make_pair(std::min(ma, mb), std::max(ma, mb));
        auto it = mask_cache.find(key);
        if (it == mask_cache.end()) {
            const BinaryMask& a = member_mask_for(key.first);
            const BinaryMask& b = member_mask_for(key.second);
            BinaryMask m(a.width(), a.height());
            for (size_t i = 0; i < m.size(); ++i) m[i] = a[i] && b[i];
            it = mask_cache.emplace(key, std::move(m)).first;
        }
        return it->second;
    };

    size_t rank_hist_len = gallery.size();
    std::vector<size_t> rank_hits(rank_hist_len, 0);

    for (int pi : probe_items) {
        Item& probe = items[pi];
        const std::string& subject = probe.entry->subject_id;
        const auto truth = gallery_by_subject.find(subject);
        if (!probe.fitted || truth == gallery_by_subject.end() || gallery.empty()) {
            ++report.probes_excluded;
            if (probe.fitted && truth == gallery_by_subject.end())
                report.failures.push_back(probe.image_id +
                                          ": subject has no usable gallery entry");
            continue;
        }

        std::vector<match::ScorePair> pairs;
        pairs.reserve(gallery.size());
        for (int gi : gallery) {
            const Item& gal = items[gi];
            const int tr = ensemble::target_range_for(ens, probe.sel, gal.sel);
            const int mp = ensemble::target_member_for(ens, probe.sel, tr);
            const int mg = ensemble::target_member_for(ens, gal.sel, tr);
            double rho = -1.0;
            try {
                rho = match::ncc(signature_for(pi, mp), signature_for(gi, mg),
                                 mask_for(mp, mg));
            } catch (const Error& err) {
                report.failures.push_back(probe.image_id + " vs " + gal.image_id +
                                          ": " + err.what());
            }
            const double dyaw = std::abs(probe.entry->yaw - gal.entry->yaw);
            report.scores.push_back(
                {probe.image_id, subject, gal.entry->subject_id, rho, dyaw});
            pairs.push_back({gal.entry->subject_id, rho});
            if (gal.entry->subject_id == subject) {
                report.intra.push_back(rho);
                report.bands[band_of(dyaw)].intra.push_back(rho);
            } else {
                report.inter.push_back(rho);
                report.bands[band_of(dyaw)].inter.push_back(rho);
            }
        }

        const auto ranked = match::rank_scores(pairs);
        size_t rank = 0;
        for (size_t r = 0; r < ranked.size(); ++r)
            if (ranked[r].gallery_id == subject) {
                rank = r + 1;
                break;
            }
        if (rank > 0) ++rank_hits[rank - 1];

        const double true_dyaw =
            std::abs(probe.entry->yaw - items[truth->second].entry->yaw);
        YawBand& band = report.bands[band_of(true_dyaw)];
        ++band.probes;
        if (rank == 1) ++band.rank1_hits;
    }

    // ---- aggregate ----------------------------------------------------------
    report.cmc.assign(rank_hist_len, 0.0);
    size_t cum = 0;
    for (size_t r = 0; r < rank_hist_len; ++r) {
        cum += rank_hits[r];
        report.cmc[r] = report.probes_total
                            ? static_cast<double>(cum) / report.probes_total
                            : 0.0;
    }
    report.roc = roc_points(report.intra, report.inter);
    for (auto& band : report.bands) band.roc = roc_points(band.intra, band.inter);

    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    report.mean_intra = mean(report.intra);
    report.mean_inter = mean(report.inter);
    return report;
}

}  // namespace tface::harness
