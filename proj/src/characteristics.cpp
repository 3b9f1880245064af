#include "fel/characteristics.hpp"

#include "fel/errors.hpp"

#include <cmath>
#include <string>

namespace fel {

DimensionReport dimensions(int map_count, double scale, double rho) {
  if (!(rho > 1.0)) throw DegenerateStructure("resistance factor rho = " + std::to_string(rho) + " is not above 1");
  DimensionReport r;
  r.map_count = map_count;
  r.scale = scale;
  r.rho = rho;
  const double log_l = std::log(scale);
  r.d_f = std::log(static_cast<double>(map_count)) / log_l;
  r.d_w = std::log(static_cast<double>(map_count) * rho) / log_l;
  r.d_s = 2.0 * r.d_f / r.d_w;
  return r;
}

DimensionReport dimensions(const FractalSystem& system, const HarmonicStructure& hs) {
  return dimensions(system.map_count(), system.scale(), hs.rho);
}

}  // namespace fel
