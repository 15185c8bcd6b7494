#pragma once

#include "tface/grid.hpp"

namespace tface::enhance {

/// Conductance law applied to the per-edge gradient magnitude g.
enum class Conductance {
    paper,         ///< exp(-g / k^2): decay linear in g (the default law)
    perona_malik,  ///< exp(-(g / k)^2): classical quadratic-exponent law
};

/// When edge conductances are (re)computed.
enum class ConductanceUpdate {
    frozen,    ///< once, from the input image
    per_step,  ///< recomputed from the current iterate
};

struct DiffusionParams {
    double k = 20.0;        ///< conductance scale
    double step = 0.20;     ///< explicit Euler time step (stable <= 0.25)
    int iterations = 20;
    Conductance conductance = Conductance::paper;
    ConductanceUpdate update = ConductanceUpdate::frozen;
};

/// Explicit 4-neighbour diffusion with no-flux (Neumann) borders.
/// Flux-form update conserves the image mean to roundoff.
ImageGrid diffuse(const ImageGrid& img, const DiffusionParams& params = {});

/// Detail image: img - diffuse(img).
ImageGrid enhance_detail(const ImageGrid& img, const DiffusionParams& params = {});

}  // namespace tface::enhance
