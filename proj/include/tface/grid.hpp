#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tface/errors.hpp"

namespace tface {

/// Dense single-channel raster, row-major, double precision internally.
/// Value semantics; operations elsewhere treat grids as immutable inputs.
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw ParameterError("ImageGrid: non-positive dimensions");
        data_.assign(static_cast<size_t>(width) * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    double& at(int x, int y) { return data_[idx(x, y)]; }
    double at(int x, int y) const { return data_[idx(x, y)]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* row(int y) { return data_.data() + static_cast<size_t>(y) * width_; }
    const double* row(int y) const { return data_.data() + static_cast<size_t>(y) * width_; }

    bool same_size(const ImageGrid& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

private:
    size_t idx(int x, int y) const {
        return static_cast<size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Boolean raster sharing ImageGrid's layout. 0 = background, 1 = foreground.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, uint8_t fill = 0)
        : width_(width), height_(height) {
        if (width <= 0 || height <= 0)
            throw ParameterError("BinaryMask: non-positive dimensions");
        data_.assign(static_cast<size_t>(width) * height, fill ? 1 : 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    size_t size() const { return data_.size(); }

    uint8_t& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    uint8_t& operator[](size_t i) { return data_[i]; }
    uint8_t operator[](size_t i) const { return data_[i]; }

    bool same_size(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data_) n += v;
        return n;
    }

    bool operator==(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

/// First and second central moments of a mask's foreground.
struct MaskMoments {
    double cx = 0.0, cy = 0.0;      ///< centroid
    double cxx = 0.0, cyy = 0.0;    ///< central second moments
    double cxy = 0.0;
    size_t area = 0;                ///< foreground pixel count
};

MaskMoments mask_moments(const BinaryMask& mask);

/// Area of the moment ellipse (semi-axes = 2*sqrt of covariance eigenvalues).
double moment_ellipse_area(const MaskMoments& m);

}  // namespace tface
