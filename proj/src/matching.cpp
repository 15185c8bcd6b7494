#include "tface/matching.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tface/kernels.hpp"

namespace tface::match {

namespace {

double ncc_from_moments(const kernels::Moments2& m, size_t n) {
    const double dn = static_cast<double>(n);
    const double cov = m.dot_ab - m.sum_a * m.sum_b / dn;
    const double var_a = m.dot_aa - m.sum_a * m.sum_a / dn;
    const double var_b = m.dot_bb - m.sum_b * m.sum_b / dn;
    if (var_a <= 0.0 || var_b <= 0.0)
        throw UndefinedScoreError("ncc: constant input has no defined correlation");
    return cov / std::sqrt(var_a * var_b);
}

}  // namespace

double ncc(const ImageGrid& a, const ImageGrid& b) {
    if (a.empty()) throw ParameterError("ncc: empty input");
    if (!a.same_size(b)) throw ParameterError("ncc: size mismatch");
    if (a.size() < 2) throw ParameterError("ncc: need at least 2 samples");
    return ncc_from_moments(kernels::moments2(a.data(), b.data(), a.size()), a.size());
}

double ncc(const ImageGrid& a, const ImageGrid& b, const BinaryMask& mask) {
    if (a.empty()) throw ParameterError("ncc: empty input");
    if (!a.same_size(b)) throw ParameterError("ncc: size mismatch");
    if (mask.width() != a.width() || mask.height() != a.height())
        throw ParameterError("ncc: mask size mismatch");
    std::vector<double> ca, cb;
    ca.reserve(mask.size());
    cb.reserve(mask.size());
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) {
            ca.push_back(a[i]);
            cb.push_back(b[i]);
        }
    if (ca.size() < 2) throw ParameterError("ncc: mask selects fewer than 2 pixels");
    return ncc_from_moments(kernels::moments2(ca.data(), cb.data(), ca.size()),
                            ca.size());
}

std::vector<ScorePair> rank_scores(std::vector<ScorePair> scores) {
    if (scores.empty()) throw ParameterError("rank_scores: empty gallery");
    std::stable_sort(scores.begin(), scores.end(),
                     [](const ScorePair& x, const ScorePair& y) {
                         if (x.rho != y.rho) return x.rho > y.rho;
                         return x.gallery_id < y.gallery_id;
                     });
    return scores;
}

}  // namespace tface::match
