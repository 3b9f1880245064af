#pragma once

#include "fel/energy.hpp"
#include "fel/fractal_system.hpp"
#include "fel/harmonic.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace fel {

/// Parameters of the integral Lipschitz coefficients (p = 2, q = infinity).
struct LipschitzParams {
  double alpha = 0.0;  // smoothness, d_w / 2 by default
  double p = 2.0;
  double d = 0.0;      // measure dimension d_f
  double c0 = 0.0;     // cutoff constant, min distance in V_0
  double base = 0.0;   // 2 for a_m, L for b_m
};

LipschitzParams default_lipschitz_params(const FractalSystem& system, const HarmonicStructure& hs);

/// Ordered pairs (x, y) of V_n with |x - y| < radius, found through level-k
/// symplex neighborhoods. The neighborhood of S holds S_* (the symplices touching S)
/// plus every level-k symplex whose V_n bounding box comes within `radius` of S's;
/// the touching ring alone can miss close pairs across holes of the fractal.
/// Each pair is visited once: x is owned by the lexicographically smallest level-k
/// symplex containing it.
class ClosePairs {
 public:
  ClosePairs(const FractalSystem& system, int n, int k, double radius);

  int level() const { return n_; }
  int neighborhood_level() const { return k_; }
  double radius() const { return radius_; }
  /// Level-k symplices scanned for partners of points owned by `symplex` (sorted, includes itself).
  const std::vector<std::uint32_t>& neighborhood(std::size_t symplex) const { return neighbors_[symplex]; }

  template <class Visit>
  void for_each(Visit&& visit) const {
    const int dim = system_->dimension();
    const double r2 = radius_ * radius_;
    std::vector<std::uint32_t> stamp(system_->vertex_count(n_), 0);
    std::vector<VertexId> candidates;
    for (std::size_t s = 0; s < owned_.size(); ++s) {
      if (owned_[s].empty()) continue;
      candidates.clear();
      const auto tag = static_cast<std::uint32_t>(s + 1);
      for (auto t : neighbors_[s])
        for (auto y : members_[t])
          if (stamp[static_cast<std::size_t>(y)] != tag) {
            stamp[static_cast<std::size_t>(y)] = tag;
            candidates.push_back(y);
          }
      for (auto x : owned_[s]) {
        const double* px = system_->point(x).data();
        for (auto y : candidates) {
          const double* py = system_->point(y).data();
          double d2 = 0.0;
          for (int c = 0; c < dim; ++c) d2 += (px[c] - py[c]) * (px[c] - py[c]);
          if (d2 < r2) visit(x, y);
        }
      }
    }
  }

 private:
  const FractalSystem* system_;
  int n_;
  int k_;
  double radius_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::vector<std::vector<VertexId>> members_;  // V_n inside each level-k symplex
  std::vector<std::vector<VertexId>> owned_;
};

/// Deepest level k whose neighborhoods cover the cutoff c0 / base^m.
int neighborhood_level(const FractalSystem& system, int m, double base);

/// base^{m alpha} (base^{m d} * integral over |x-y| < c0/base^m of (f(x)-f(y))^2 dmu_n dmu_n)^{1/2},
/// with mu_n the counting measure on V_n and n = f.level. Throws ResolutionTooCoarse if n <= m.
double lipschitz_coefficient(const FractalSystem& system, const VertexFunction& f, int m, const LipschitzParams& params);

/// b_m: base L.
double b_coefficient(const FractalSystem& system, const VertexFunction& f, int m, LipschitzParams params);
/// a_m: base 2.
double a_coefficient(const FractalSystem& system, const VertexFunction& f, int m, LipschitzParams params);

/// Coefficients m = 1..m_max for several functions sampled on the same level;
/// result[i][m-1] belongs to functions[i].
std::vector<std::vector<double>> coefficient_table(const FractalSystem& system, const std::vector<VertexFunction>& functions,
                                                   int m_max, const LipschitzParams& params);

struct NormReport {
  std::string tag;
  std::vector<std::pair<int, double>> b_values;
  std::vector<std::pair<int, double>> a_values;
  double sup_b = 0.0;
  double sup_a = 0.0;
  double l2_norm = 0.0;
  double lip_norm = 0.0;
  EnergySequence energies;
  double dirichlet_energy = 0.0;
  double dirichlet_norm = 0.0;
  double ratio = std::nan("");
  bool ratio_defined = false;
  int approximation_level = 0;
};

NormReport norm_report(const FractalSystem& system, const HarmonicStructure& hs, const FunctionSpec& spec, int m_max,
                       int n);
std::vector<NormReport> norm_reports(const FractalSystem& system, const HarmonicStructure& hs,
                                     const std::vector<FunctionSpec>& specs, int m_max, int n);

struct FunctionStability {
  std::string tag;
  double ratio = 0.0;
  double ratio_previous = 0.0;  // at level n - 1
  double relative_change = 0.0;
  bool stable = false;
};

struct EquivalenceSummary {
  std::vector<NormReport> reports;  // at level n, excluded functions included
  std::vector<std::string> excluded;
  std::vector<FunctionStability> stability;
  double min_ratio = std::nan("");
  double max_ratio = std::nan("");
  double c_empirical = std::nan("");
  bool all_stable = false;
  int m_max = 0;
  int level = 0;
};

/// Norm ratios over a corpus at levels n and n - 1.
EquivalenceSummary equivalence_experiment(const FractalSystem& system, const HarmonicStructure& hs,
                                          const std::vector<FunctionSpec>& corpus, int m_max, int n);

/// Largest |f(x) - f(y)| / |x - y|^gamma over pairs sharing a cell at some level <= f.level.
double hoelder_estimate(const FractalSystem& system, const VertexFunction& f, double gamma);

}  // namespace fel
