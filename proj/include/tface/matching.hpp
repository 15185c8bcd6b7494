#pragma once

#include <string>
#include <vector>

#include "tface/grid.hpp"

namespace tface::match {

/// Normalized cross-correlation (mean-subtracted, in [-1, 1]).
/// Constant input -> UndefinedScoreError; size mismatch -> ParameterError.
double ncc(const ImageGrid& a, const ImageGrid& b);

/// NCC over mask pixels only (the canonical-frame mesh interior in the
/// pipeline). Mask must match the image sizes and select >= 2 pixels.
double ncc(const ImageGrid& a, const ImageGrid& b, const BinaryMask& mask);

struct ScorePair {
    std::string gallery_id;
    double rho = 0.0;
};

/// Scores descending; equal scores break ties by ascending gallery id.
std::vector<ScorePair> rank_scores(std::vector<ScorePair> scores);

}  // namespace tface::match
