#pragma once

#include "fel/fractal_system.hpp"
#include "fel/harmonic.hpp"

namespace fel {

/// Hausdorff, walk and spectral dimensions (natural logs throughout).
struct DimensionReport {
  int map_count = 0;
  double scale = 0.0;
  double rho = 0.0;
  double d_f = 0.0;
  double d_w = 0.0;
  double d_s = 0.0;
};

/// Throws DegenerateStructure when rho <= 1.
DimensionReport dimensions(const FractalSystem& system, const HarmonicStructure& hs);
DimensionReport dimensions(int map_count, double scale, double rho);

}  // namespace fel
