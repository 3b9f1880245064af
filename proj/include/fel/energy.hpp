#pragma once

#include "fel/fractal_system.hpp"
#include "fel/harmonic.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fel {

/// Real values on V_m, indexed by vertex id.
struct VertexFunction {
  int level = 0;
  std::vector<double> values;
};

/// Values on V_m of a function known on a finer level (ids are shared across levels).
VertexFunction restrict_to(const VertexFunction& f, const FractalSystem& system, int level);

/// Level-m energy rho^m * sum over m-cells of the pulled-back V_0 form.
double energy_m(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f);

/// Energy-minimizing extension of f to level n, built cell by cell.
VertexFunction harmonic_extension(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f,
                                  int n);

struct EnergySequence {
  std::string tag;
  std::vector<std::pair<int, double>> entries;
  double limit_estimate = 0.0;
  bool monotone_ok = true;
};

/// E^(m) for m0 <= m <= f.level, restricting f to each level.
EnergySequence energy_sequence(const FractalSystem& system, const HarmonicStructure& hs, const VertexFunction& f,
                               int m0, std::string tag = {});

/// Function mini-language: `coord:k`, `harmonic:v1,v2,...`, `perturb:<spec>:<vertex>:<delta>`.
///
/// `harmonic` data is placed on the level whose vertex count equals the number of
/// values and extended harmonically; `coord:k` samples the k-th Euclidean coordinate.
class FunctionSpec {
 public:
  enum class Kind { Coordinate, Harmonic, Perturbation };

  static FunctionSpec parse(const std::string& text);
  static FunctionSpec coordinate(int axis);
  static FunctionSpec harmonic(std::vector<double> values);
  static FunctionSpec perturbation(FunctionSpec inner, VertexId vertex, double delta);

  Kind kind() const { return kind_; }
  /// Canonical text form; doubles are written with 17 significant digits.
  std::string text() const;

  VertexFunction sample(const FractalSystem& system, const HarmonicStructure& hs, int level) const;

 private:
  Kind kind_ = Kind::Coordinate;
  int axis_ = 0;
  std::vector<double> values_;
  std::shared_ptr<const FunctionSpec> inner_;
  VertexId vertex_ = 0;
  double delta_ = 0.0;
};

/// One spec per line; blank lines and lines starting with '#' are skipped.
std::vector<FunctionSpec> parse_corpus(const std::string& text);
std::vector<FunctionSpec> load_corpus(const std::string& path);

/// `count` harmonic extensions of uniform random data (alternating V_0 and V_1
/// data) followed by the N coordinate functions.
std::vector<FunctionSpec> generate_corpus(const FractalSystem& system, int count, unsigned seed);

std::string format_double(double v);

}  // namespace fel
