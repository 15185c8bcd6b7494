#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tface/harness.hpp"

namespace tface::harness {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string g10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);  // binary: byte-stable line ends
    if (!out) throw IoError(p.string() + ": cannot open for writing");
    return out;
}

void write_roc(const fs::path& p, const std::vector<RocPoint>& roc) {
    auto out = open_out(p);
    out << "threshold,far,tar\n";
    for (const auto& pt : roc)
        out << g17(pt.threshold) << "," << g17(pt.far) << "," << g17(pt.tar) << "\n";
    if (!out) throw IoError(p.string() + ": write failed");
}

void write_list(const fs::path& p, const std::vector<double>& v) {
    auto out = open_out(p);
    for (double x : v) out << g17(x) << "\n";
    if (!out) throw IoError(p.string() + ": write failed");
}

}  // namespace

void write_report(const std::string& dir, const EvalReport& report) {
    const fs::path root(dir);
    fs::create_directories(root);

    {
        auto out = open_out(root / "scores.csv");
        out << "probe_id,probe_subject,gallery_subject,rho,dyaw\n";
        for (const auto& s : report.scores)
            out << s.probe_id << "," << s.probe_subject << "," << s.gallery_subject
                << "," << g17(s.rho) << "," << g10(s.dyaw) << "\n";
        if (!out) throw IoError(dir + "/scores.csv: write failed");
    }
    {
        auto out = open_out(root / "cmc.csv");
        out << "rank,rate\n";
        for (size_t r = 0; r < report.cmc.size(); ++r)
            out << (r + 1) << "," << g17(report.cmc[r]) << "\n";
        if (!out) throw IoError(dir + "/cmc.csv: write failed");
    }
    write_roc(root / "roc.csv", report.roc);
    for (const auto& band : report.bands) {
        char name[64];
        std::snprintf(name, sizeof(name), "roc_yaw_%g_%g.csv", band.lo, band.hi);
        write_roc(root / name, band.roc);
    }
    write_list(root / "intra.txt", report.intra);
    write_list(root / "inter.txt", report.inter);

    {
        auto out = open_out(root / "summary.txt");
        out << "probes_total " << report.probes_total << "\n";
        out << "probes_excluded " << report.probes_excluded << "\n";
        out << "gallery_excluded " << report.gallery_excluded << "\n";
        out << "rank1 " << g17(report.rank1()) << "\n";
        out << "mean_intra " << g17(report.mean_intra) << "\n";
        out << "mean_inter " << g17(report.mean_inter) << "\n";
        for (const auto& band : report.bands) {
            double mi = 0.0, me = 0.0;
            for (double x : band.intra) mi += x;
            for (double x : band.inter) me += x;
            if (!band.intra.empty()) mi /= static_cast<double>(band.intra.size());
            if (!band.inter.empty()) me /= static_cast<double>(band.inter.size());
            out << "band " << g10(band.lo) << " " << g10(band.hi) << " probes "
                << band.probes << " rank1_hits " << band.rank1_hits << " mean_intra "
                << g17(mi) << " mean_inter " << g17(me) << "\n";
        }
        for (const auto& f : report.failures) out << "failure " << f << "\n";
        if (!out) throw IoError(dir + "/summary.txt: write failed");
    }
}

}  // namespace tface::harness
