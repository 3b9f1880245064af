#include "fel/harmonic.hpp"

#include "fel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace fel {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

ConductivityMatrix::ConductivityMatrix(std::vector<VertexId> ids, Eigen::MatrixXd entries, double tol)
    : ids_(std::move(ids)), a_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(ids_.size());
  if (a_.rows() != n || a_.cols() != n) throw DimensionMismatch("conductivity matrix size does not match its ids");
  const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
  for (Eigen::Index x = 0; x < n; ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      row += a_(x, y);
      if (std::abs(a_(x, y) - a_(y, x)) > tol * scale) throw InputError("conductivity matrix is not symmetric");
      if (x != y && a_(x, y) < -tol * scale) throw InputError("negative off-diagonal conductance");
    }
    if (std::abs(row) > tol * scale * static_cast<double>(n)) throw InputError("conductivity matrix row does not sum to zero");
  }
}

ConductivityMatrix ConductivityMatrix::from_off_diagonal(std::vector<VertexId> ids, const Eigen::MatrixXd& weights) {
  Eigen::MatrixXd a = weights;
  for (Eigen::Index x = 0; x < a.rows(); ++x) {
    a(x, x) = 0.0;
    a(x, x) = -a.row(x).sum();
  }
  return ConductivityMatrix(std::move(ids), std::move(a));
}

bool ConductivityMatrix::irreducible() const {
  const auto n = static_cast<std::size_t>(size());
  if (n == 0) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (a_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) > 0.0)
        parent[find_root(parent, x)] = find_root(parent, y);
  const auto root = find_root(parent, 0);
  for (std::size_t x = 1; x < n; ++x)
    if (find_root(parent, x) != root) return false;
  return true;
}

double ConductivityMatrix::form(std::span<const double> f) const {
  if (f.size() != ids_.size())
    throw DimensionMismatch("function has " + std::to_string(f.size()) + " values, form expects " +
                            std::to_string(ids_.size()));
  double sum = 0.0;
  const auto n = size();
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const double d = f[static_cast<std::size_t>(x)] - f[static_cast<std::size_t>(y)];
      sum += a_(x, y) * d * d;
    }
  return sum;
}

double energy0(const ConductivityMatrix& a, std::span<const double> f) { return a.form(f); }

ConductivityMatrix reproduce(const FractalSystem& system, const ConductivityMatrix& a) {
  const auto v0 = system.v0_count();
  if (static_cast<std::size_t>(a.size()) != v0) throw DimensionMismatch("reproduce expects a matrix on V_0");
  const auto v1 = system.vertex_count(1);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(v1), static_cast<Eigen::Index>(v1));
  for (std::size_t cell = 0; cell < system.symplex_count(1); ++cell) {
    const auto v = system.symplex_vertices(1, cell);
    for (std::size_t k = 0; k < v0; ++k)
      for (std::size_t l = 0; l < v0; ++l)
        b(v[k], v[l]) += a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  }
  std::vector<VertexId> ids(v1);
  std::iota(ids.begin(), ids.end(), VertexId{0});
  return ConductivityMatrix(std::move(ids), std::move(b));
}

Decimation decimate(const ConductivityMatrix& b, std::span<const VertexId> boundary) {
  const auto& ids = b.ids();
  std::unordered_map<VertexId, Eigen::Index> position;
  for (std::size_t k = 0; k < ids.size(); ++k) position[ids[k]] = static_cast<Eigen::Index>(k);

  std::vector<Eigen::Index> bnd;
  std::vector<bool> is_boundary(ids.size(), false);
  for (auto id : boundary) {
    auto it = position.find(id);
    if (it == position.end()) throw InputError("boundary vertex " + std::to_string(id) + " is not in the matrix");
    if (is_boundary[static_cast<std::size_t>(it->second)]) throw InputError("duplicate boundary vertex");
    is_boundary[static_cast<std::size_t>(it->second)] = true;
    bnd.push_back(it->second);
  }
  Decimation out;
  std::vector<Eigen::Index> inner;
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (!is_boundary[k]) {
      inner.push_back(static_cast<Eigen::Index>(k));
      out.interior.push_back(ids[k]);
    }

  const auto nb = static_cast<Eigen::Index>(bnd.size());
  const auto ni = static_cast<Eigen::Index>(inner.size());
  const Eigen::MatrixXd lap = -b.entries();
  Eigen::MatrixXd l_bb(nb, nb), l_bi(nb, ni), l_ii(ni, ni);
  for (Eigen::Index r = 0; r < nb; ++r) {
    for (Eigen::Index c = 0; c < nb; ++c) l_bb(r, c) = lap(bnd[r], bnd[c]);
    for (Eigen::Index c = 0; c < ni; ++c) l_bi(r, c) = lap(bnd[r], inner[c]);
  }
  for (Eigen::Index r = 0; r < ni; ++r)
    for (Eigen::Index c = 0; c < ni; ++c) l_ii(r, c) = lap(inner[r], inner[c]);

  Eigen::MatrixXd schur = l_bb;
  out.extension = Eigen::MatrixXd::Zero(ni, nb);
  if (ni > 0) {
    Eigen::LDLT<Eigen::MatrixXd> chol(l_ii);
    const double scale = std::max(1.0, l_ii.cwiseAbs().maxCoeff());
    const auto d = chol.vectorD();
    if (chol.info() != Eigen::Success || d.minCoeff() <= 1e-13 * scale)
      throw SingularInterior("interior Laplacian block is not positive definite (an interior component misses the boundary)");
    const Eigen::MatrixXd solved = chol.solve(l_bi.transpose());
    out.extension = -solved;
    schur -= l_bi * solved;
  }
  Eigen::MatrixXd reduced = -0.5 * (schur + schur.transpose());
  for (Eigen::Index x = 0; x < nb; ++x) {
    reduced(x, x) = 0.0;
    reduced(x, x) = -reduced.row(x).sum();
  }
  std::vector<VertexId> bids(boundary.begin(), boundary.end());
  out.reduced = ConductivityMatrix(std::move(bids), std::move(reduced));
  return out;
}

PairOrbits pair_orbits(const FractalSystem& system) {
  const auto v0 = static_cast<int>(system.v0_count());
  const auto pair_index = [v0](int x, int y) { return static_cast<std::size_t>(std::min(x, y) * v0 + std::max(x, y)); };
  std::vector<std::size_t> parent(static_cast<std::size_t>(v0 * v0));
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (const auto& perm : system.v0_permutations()) {
    if (std::find(perm.begin(), perm.end(), -1) != perm.end()) continue;
    for (int x = 0; x < v0; ++x)
      for (int y = x + 1; y < v0; ++y)
        parent[find_root(parent, pair_index(x, y))] = find_root(parent, pair_index(perm[static_cast<std::size_t>(x)], perm[static_cast<std::size_t>(y)]));
  }

  PairOrbits orbits;
  orbits.class_of = Eigen::MatrixXi::Constant(v0, v0, -1);
  std::unordered_map<std::size_t, int> label;
  const double c0 = system.c0();
  orbits.nearest = -1;
  for (int x = 0; x < v0; ++x)
    for (int y = x + 1; y < v0; ++y) {
      const auto root = find_root(parent, pair_index(x, y));
      auto [it, inserted] = label.try_emplace(root, orbits.count);
      if (inserted) {
        ++orbits.count;
        orbits.representatives.emplace_back(x, y);
      }
      orbits.class_of(x, y) = orbits.class_of(y, x) = it->second;
      const double dist = (system.point_vector(x) - system.point_vector(y)).norm();
      if (orbits.nearest < 0 && dist <= c0 * (1.0 + 1e-9)) orbits.nearest = it->second;
    }
  return orbits;
}

ConductivityMatrix renormalize(const FractalSystem& system, const ConductivityMatrix& a) {
  const auto v0 = system.v0_count();
  std::vector<VertexId> boundary(v0);
  std::iota(boundary.begin(), boundary.end(), VertexId{0});
  return decimate(reproduce(system, a), boundary).reduced;
}

namespace {

ConductivityMatrix assemble(const PairOrbits& orbits, const std::vector<double>& c) {
  const auto n = orbits.class_of.rows();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      if (x != y) w(x, y) = c[static_cast<std::size_t>(orbits.class_of(x, y))];
  std::vector<VertexId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), VertexId{0});
  return ConductivityMatrix::from_off_diagonal(std::move(ids), w);
}

// Class averages of a G-invariant matrix; averaging removes rounding asymmetry.
std::vector<double> class_values(const PairOrbits& orbits, const ConductivityMatrix& t) {
  std::vector<double> sum(static_cast<std::size_t>(orbits.count), 0.0);
  std::vector<int> count(static_cast<std::size_t>(orbits.count), 0);
  const auto n = orbits.class_of.rows();
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = x + 1; y < n; ++y) {
      const auto k = static_cast<std::size_t>(orbits.class_of(x, y));
      sum[k] += t(x, y);
      ++count[k];
    }
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= count[k];
  return sum;
}

}  // namespace

HarmonicStructure solve_ndhs(const FractalSystem& system, const NdhsOptions& options) {
  HarmonicStructure hs;
  hs.orbits = pair_orbits(system);
  const auto nn = static_cast<std::size_t>(hs.orbits.nearest);
  std::vector<double> c(static_cast<std::size_t>(hs.orbits.count), options.initial_scale);
  std::vector<double> prev_diff;
  bool converged = false;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const auto t = class_values(hs.orbits, renormalize(system, assemble(hs.orbits, c)));
    if (!(t[nn] > 0.0)) throw DegenerateStructure("nearest-neighbor conductance vanished during renormalization");
    const double rho_estimate = c[nn] / t[nn];
    std::vector<double> diff(c.size());
    double gap = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      diff[k] = t[k] / t[nn] - c[k];
      gap = std::max(gap, std::abs(diff[k]));
    }
    hs.trace.push_back({gap, rho_estimate});
    hs.iterations = iter;
    if (gap < options.tolerance) {
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += diff[k];
      converged = true;
      break;
    }
    if (!prev_diff.empty() && std::inner_product(diff.begin(), diff.end(), prev_diff.begin(), 0.0) < 0.0) hs.damped = true;
    const double step = hs.damped ? 0.5 : 1.0;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += step * diff[k];
    prev_diff = std::move(diff);
  }
  if (!converged)
    throw NoConvergence("renormalization did not converge in " + std::to_string(options.max_iterations) +
                        " iterations (last gap " + std::to_string(hs.trace.back().gap) + ")");

  hs.class_conductance = c;
  hs.a = assemble(hs.orbits, c);
  std::vector<VertexId> boundary(system.v0_count());
  std::iota(boundary.begin(), boundary.end(), VertexId{0});
  auto dec = decimate(reproduce(system, hs.a), boundary);
  const auto [rx, ry] = hs.orbits.representatives[nn];
  hs.rho = hs.a(rx, ry) / dec.reduced(rx, ry);
  hs.residual = (hs.rho * dec.reduced.entries() - hs.a.entries()).cwiseAbs().maxCoeff();
  hs.extension = std::move(dec.extension);
  return hs;
}

}  // namespace fel
