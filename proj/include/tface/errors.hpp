#pragma once

#include <stdexcept>
#include <string>

namespace tface {

/// Base type for every error raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument values / violated preconditions.
struct ParameterError : Error {
    using Error::Error;
};

/// File I/O failures and malformed/unsupported on-disk data.
struct IoError : Error {
    using Error::Error;
};

/// Thresholding produced an empty foreground.
struct SegmentationError : Error {
    using Error::Error;
};

/// Degenerate geometry (collapsed triangle, non-invertible warp).
struct WarpError : Error {
    using Error::Error;
};

/// Model training could not proceed (rank, population, ...).
struct TrainingError : Error {
    using Error::Error;
};

/// Fit left the valid region (non-finite error, collapsed warp).
struct FitDivergedError : Error {
    using Error::Error;
};

/// Dataset annotation problems (yaw out of range, missing landmarks).
struct AnnotationError : Error {
    using Error::Error;
};

/// No ensemble member produced a usable fit.
struct SelectionError : Error {
    using Error::Error;
};

/// Similarity score mathematically undefined (constant input).
struct UndefinedScoreError : Error {
    using Error::Error;
};

}  // namespace tface
