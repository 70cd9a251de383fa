#pragma once

#include <cstdint>
#include <random>

#include "hyperflock/surface.hpp"

namespace hyperflock {

using Rng = std::mt19937_64;

/// Draws a random surface point: a standard Gaussian direction from the
/// surface's interior anchor, bracketed along the ray until c changes sign,
/// bisected, then retracted. The resulting distribution is absolutely
/// continuous on the surface but not claimed uniform (on spheres it is
/// uniform by isotropy).
inline SurfacePoint sample_point(const ImplicitSurface& s, Rng& rng,
                                 double tol = kTolSurface) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec& anchor = s.interior_anchor;
  for (int attempt = 0; attempt < 16; ++attempt) {
    Vec dir(s.ambient_dim);
    for (int i = 0; i < s.ambient_dim; ++i) dir(i) = gauss(rng);
    double len = dir.norm();
    if (len < 1e-12) continue;
    dir /= len;

    // Bracket the crossing: c(anchor) < 0, extend t until c > 0.
    double t_lo = 0.0, t_hi = 1.0;
    bool bracketed = false;
    for (int ext = 0; ext < 100; ++ext) {
      if (s.c(anchor + t_hi * dir) > 0.0) {
        bracketed = true;
        break;
      }
      t_lo = t_hi;
      t_hi *= 2.0;
    }
    if (!bracketed) {
      throw SamplingFailed("sample_point: no sign change of c along the ray after 100 extensions");
    }
    while (t_hi - t_lo > 1e-9 * (1.0 + t_hi)) {
      double mid = 0.5 * (t_lo + t_hi);
      (s.c(anchor + mid * dir) > 0.0 ? t_hi : t_lo) = mid;
    }
    RetractOptions opt;
    opt.tol = tol;
    return retract(s, anchor + 0.5 * (t_lo + t_hi) * dir, opt);
  }
  throw SamplingFailed("sample_point: degenerate random directions");
}

}  // namespace hyperflock
