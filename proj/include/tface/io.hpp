#pragma once

#include <string>

#include "tface/grid.hpp"

namespace tface::io {

// ---------------------------------------------------------------------------
// Float raster format "TFR1"
//
//   ASCII header:  TFR1 <width> <height>\n
//   Payload:       width*height little-endian float32, row-major, top-down.
//
// Round trip is bit-exact for float32-representable samples.
// ---------------------------------------------------------------------------

ImageGrid read_tfr(const std::string& path);
void write_tfr(const std::string& path, const ImageGrid& img);

// ---------------------------------------------------------------------------
// PGM (P5), 8- or 16-bit. Samples are scaled linearly to [0, 1]:
// 8-bit v -> v/255, 16-bit v -> v/65535 (big-endian, per the PGM format).
// ---------------------------------------------------------------------------

ImageGrid read_pgm(const std::string& path);

/// Writes an 8-bit PGM with {0, 255} levels.
void write_mask_pgm(const std::string& path, const BinaryMask& mask);
BinaryMask read_mask_pgm(const std::string& path);

/// Dispatch on extension: .tfr -> TFR1, .pgm -> PGM. Unknown -> IoError.
ImageGrid read_image(const std::string& path);

}  // namespace tface::io
