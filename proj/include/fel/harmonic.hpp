#pragma once

#include "fel/fractal_system.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace fel {

/// Symmetric matrix with nonnegative off-diagonals and zero row sums on an
/// ordered vertex set; the negative of a weighted graph Laplacian.
class ConductivityMatrix {
 public:
  ConductivityMatrix() = default;
  /// Checks symmetry, signs and row sums up to `tol` (relative to the largest entry).
  ConductivityMatrix(std::vector<VertexId> ids, Eigen::MatrixXd entries, double tol = 1e-10);

  /// Conductivity matrix with given off-diagonal weights; the diagonal is balanced.
  static ConductivityMatrix from_off_diagonal(std::vector<VertexId> ids, const Eigen::MatrixXd& weights);

  const std::vector<VertexId>& ids() const { return ids_; }
  const Eigen::MatrixXd& entries() const { return a_; }
  double operator()(Eigen::Index x, Eigen::Index y) const { return a_(x, y); }
  Eigen::Index size() const { return a_.rows(); }

  /// Connected graph on {a_xy > 0}.
  bool irreducible() const;
  /// Form value 1/2 sum a_xy (f(x) - f(y))^2 for f aligned with ids().
  double form(std::span<const double> f) const;

 private:
  std::vector<VertexId> ids_;
  Eigen::MatrixXd a_;
};

double energy0(const ConductivityMatrix& a, std::span<const double> f);

/// Lifts a form on V_0 to V_1 by summing its copies over the M level-1 cells.
ConductivityMatrix reproduce(const FractalSystem& system, const ConductivityMatrix& a);

struct Decimation {
  ConductivityMatrix reduced;  // on the boundary ids, in the order given
  Eigen::MatrixXd extension;   // interior values = extension * boundary values
  std::vector<VertexId> interior;
};

/// Schur-complement elimination of every id not in `boundary`.
Decimation decimate(const ConductivityMatrix& b, std::span<const VertexId> boundary);

/// Orbits of unordered V_0 pairs under the reflection group.
struct PairOrbits {
  Eigen::MatrixXi class_of;  // class index per ordered pair (x != y), -1 on the diagonal
  int count = 0;
  int nearest = 0;  // class containing a pair at distance c0
  std::vector<std::pair<int, int>> representatives;
};

PairOrbits pair_orbits(const FractalSystem& system);

struct NdhsTraceEntry {
  double gap;
  double rho_estimate;
};

struct HarmonicStructure {
  ConductivityMatrix a;  // on V_0, nearest-neighbor class conductance 1
  double rho = 0.0;
  Eigen::MatrixXd extension;  // (#V_1 - #V_0) x #V_0
  PairOrbits orbits;
  std::vector<double> class_conductance;
  double residual = 0.0;  // |rho T(A) - A|_inf
  int iterations = 0;
  bool damped = false;
  std::vector<NdhsTraceEntry> trace;
};

struct NdhsOptions {
  double tolerance = 1e-12;
  int max_iterations = 10'000;
  double initial_scale = 1.0;
};

/// Renormalization fixed point A = rho * (De o R)(A) within the symmetric cone.
HarmonicStructure solve_ndhs(const FractalSystem& system, const NdhsOptions& options = {});

/// One renormalization step T = De o R on a V_0 matrix.
ConductivityMatrix renormalize(const FractalSystem& system, const ConductivityMatrix& a);

}  // namespace fel
