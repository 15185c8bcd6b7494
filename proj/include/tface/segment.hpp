#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "tface/grid.hpp"

namespace tface::segment {

/// Flat disc structuring element, odd-sided bounding grid.
struct StructElem {
    int radius_cells = 0;                 ///< floor(radius): grid half-side
    double radius = 0.0;
    std::vector<std::pair<int, int>> offsets;  ///< set cells, relative to center
};

/// Cells at Euclidean distance <= radius from the center cell.
StructElem circular_structuring_element(double radius);

/// mask[p] = 1 iff t_low <= img[p] <= t_high.
BinaryMask threshold_band(const ImageGrid& img, double t_low, double t_high);

/// Histogram-based (256-bin) threshold maximizing inter-class variance.
double otsu_threshold(const ImageGrid& img);

BinaryMask erode(const BinaryMask& mask, const StructElem& elem);
BinaryMask dilate(const BinaryMask& mask, const StructElem& elem);
BinaryMask morph_open(const BinaryMask& mask, const StructElem& elem);
BinaryMask morph_close(const BinaryMask& mask, const StructElem& elem);

struct SegmentParams {
    std::optional<double> t_low;   ///< empty -> Otsu on the image
    double t_high = std::numeric_limits<double>::infinity();
    double elem_area_fraction = 0.06;  ///< disc area as fraction of moment-ellipse area
};

struct SegmentResult {
    BinaryMask mask;
    ImageGrid segmented;  ///< input with background zeroed
};

/// Threshold band -> provisional mask -> disc sized from the provisional
/// mask's moment ellipse -> opening then closing -> background zeroed.
/// Raises SegmentationError when the band selects nothing.
SegmentResult segment_face(const ImageGrid& img, const SegmentParams& params = {});

}  // namespace tface::segment
