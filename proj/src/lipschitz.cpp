#include "fel/lipschitz.hpp"

#include "fel/characteristics.hpp"
#include "fel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fel {

LipschitzParams default_lipschitz_params(const FractalSystem& system, const HarmonicStructure& hs) {
  const auto dims = dimensions(system, hs);
  LipschitzParams p;
  p.alpha = dims.d_w / 2.0;
  p.d = dims.d_f;
  p.c0 = system.c0();
  p.base = system.scale();
  return p;
}

ClosePairs::ClosePairs(const FractalSystem& system, int n, int k, double radius)
    : system_(&system), n_(n), k_(k), radius_(radius) {
  if (k < 0 || k > n) throw LevelMismatch("neighborhood level must lie in [0, n]");
  if (!(radius > 0.0)) throw InputError("cutoff radius must be positive");
  const int dim = system.dimension();
  const auto count = system.symplex_count(k);
  members_.resize(count);
  owned_.resize(count);
  std::size_t span = 1;
  for (int j = k; j < n; ++j) span *= static_cast<std::size_t>(system.map_count());
  const auto first = system.first_symplex(n);

  // Bounding boxes of the V_n points of each symplex, lo then hi.
  std::vector<double> box(count * 2 * static_cast<std::size_t>(dim));
  for (std::size_t s = 0; s < count; ++s) {
    members_[s] = system.points_in_symplex(k, s, n);
    double* lo = box.data() + s * 2 * static_cast<std::size_t>(dim);
    double* hi = lo + dim;
    std::fill(lo, lo + dim, std::numeric_limits<double>::infinity());
    std::fill(hi, hi + dim, -std::numeric_limits<double>::infinity());
    for (auto x : members_[s]) {
      if (first[static_cast<std::size_t>(x)] / span == s) owned_[s].push_back(x);
      const auto p = system.point(x);
      for (int c = 0; c < dim; ++c) {
        lo[c] = std::min(lo[c], p[static_cast<std::size_t>(c)]);
        hi[c] = std::max(hi[c], p[static_cast<std::size_t>(c)]);
      }
    }
  }

  neighbors_ = system.symplex_neighborhoods(k).neighbors;
  // Sweep along the first axis for boxes closer than the radius.
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  const auto lo_of = [&](std::size_t s) { return box.data() + s * 2 * static_cast<std::size_t>(dim); };
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lo_of(a)[0] < lo_of(b)[0]; });
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t s = order[i];
    const double* ls = lo_of(s);
    const double* hs = ls + dim;
    for (std::size_t j = i + 1; j < count; ++j) {
      const std::uint32_t t = order[j];
      const double* lt = lo_of(t);
      if (lt[0] - hs[0] >= radius) break;
      const double* ht = lt + dim;
      double gap2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double g = std::max({0.0, lt[c] - hs[c], ls[c] - ht[c]});
        gap2 += g * g;
      }
      if (gap2 < r2) {
        neighbors_[s].push_back(t);
        neighbors_[t].push_back(s);
      }
    }
  }
  for (auto& list : neighbors_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

int neighborhood_level(const FractalSystem& system, int m, double base) {
  if (std::abs(base - system.scale()) <= 1e-12 * base) return m;
  const int k = static_cast<int>(std::floor(m * std::log(base) / std::log(system.scale()) + 1e-9));
  return std::clamp(k, 0, m);
}

namespace {

void check_resolution(int n, int m) {
  if (m < 1) throw InputError("coefficient index m must be >= 1");
  if (n <= m)
    throw ResolutionTooCoarse("counting measure on V_" + std::to_string(n) + " cannot resolve the level-" +
                              std::to_string(m) + " cutoff");
}

double scale_coefficient(double pair_sum, int m, double n_points, const LipschitzParams& params) {
  const double integral = pair_sum / (n_points * n_points);
  return std::pow(params.base, m * params.alpha) * std::sqrt(std::pow(params.base, m * params.d) * integral);
}

}  // namespace

std::vector<std::vector<double>> coefficient_table(const FractalSystem& system, const std::vector<VertexFunction>& functions,
                                                   int m_max, const LipschitzParams& params) {
  if (functions.empty()) return {};
  if (!(params.alpha > 0.0) || !(params.base > 1.0)) throw InputError("Lipschitz parameters need alpha > 0 and base > 1");
  if (params.p != 2.0) throw InputError("only p = 2 is supported");
  const int n = functions.front().level;
  for (const auto& f : functions)
    if (f.level != n || f.values.size() != system.vertex_count(n))
      throw LevelMismatch("functions in a coefficient table must share one sampling level");
  check_resolution(n, m_max);

  const auto count = functions.size();
  const auto nv = system.vertex_count(n);
  std::vector<double> packed(nv * count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t x = 0; x < nv; ++x) packed[x * count + i] = functions[i].values[x];

  std::vector<std::vector<double>> table(count, std::vector<double>(static_cast<std::size_t>(m_max)));
  std::vector<double> sums(count);
  for (int m = 1; m <= m_max; ++m) {
    const double radius = params.c0 / std::pow(params.base, m);
    const ClosePairs pairs(system, n, neighborhood_level(system, m, params.base), radius);
    std::fill(sums.begin(), sums.end(), 0.0);
    pairs.for_each([&](VertexId x, VertexId y) {
      const double* fx = packed.data() + static_cast<std::size_t>(x) * count;
      const double* fy = packed.data() + static_cast<std::size_t>(y) * count;
      for (std::size_t i = 0; i < count; ++i) {
        const double d = fx[i] - fy[i];
        sums[i] += d * d;
      }
    });
    for (std::size_t i = 0; i < count; ++i)
      table[i][static_cast<std::size_t>(m - 1)] = scale_coefficient(sums[i], m, static_cast<double>(nv), params);
  }
  return table;
}

double lipschitz_coefficient(const FractalSystem& system, const VertexFunction& f, int m, const LipschitzParams& params) {
  check_resolution(f.level, m);
  if (f.values.size() != system.vertex_count(f.level)) throw LevelMismatch("function does not match its level");
  const double radius = params.c0 / std::pow(params.base, m);
  const ClosePairs pairs(system, f.level, neighborhood_level(system, m, params.base), radius);
  double sum = 0.0;
  pairs.for_each([&](VertexId x, VertexId y) {
    const double d = f.values[static_cast<std::size_t>(x)] - f.values[static_cast<std::size_t>(y)];
    sum += d * d;
  });
  return scale_coefficient(sum, m, static_cast<double>(f.values.size()), params);
}

double b_coefficient(const FractalSystem& system, const VertexFunction& f, int m, LipschitzParams params) {
  params.base = system.scale();
  return lipschitz_coefficient(system, f, m, params);
}

double a_coefficient(const FractalSystem& system, const VertexFunction& f, int m, LipschitzParams params) {
  params.base = 2.0;
  return lipschitz_coefficient(system, f, m, params);
}

std::vector<NormReport> norm_reports(const FractalSystem& system, const HarmonicStructure& hs,
                                     const std::vector<FunctionSpec>& specs, int m_max, int n) {
  if (m_max < 1) throw InputError("m_max must be >= 1");
  check_resolution(n, m_max);
  auto params = default_lipschitz_params(system, hs);

  std::vector<VertexFunction> sampled;
  sampled.reserve(specs.size());
  for (const auto& s : specs) sampled.push_back(s.sample(system, hs, n));

  params.base = system.scale();
  const auto b_table = coefficient_table(system, sampled, m_max, params);
  params.base = 2.0;
  const auto a_table =
      std::abs(system.scale() - 2.0) <= 1e-15 ? b_table : coefficient_table(system, sampled, m_max, params);

  std::vector<NormReport> reports;
  const double weight = system.counting_measure_weight(n);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    NormReport r;
    r.tag = specs[i].text();
    r.approximation_level = n;
    for (int m = 1; m <= m_max; ++m) {
      const auto k = static_cast<std::size_t>(m - 1);
      r.b_values.emplace_back(m, b_table[i][k]);
      r.a_values.emplace_back(m, a_table[i][k]);
      r.sup_b = std::max(r.sup_b, b_table[i][k]);
      r.sup_a = std::max(r.sup_a, a_table[i][k]);
    }
    double sq = 0.0;
    for (double v : sampled[i].values) sq += v * v;
    r.l2_norm = std::sqrt(sq * weight);
    r.lip_norm = r.l2_norm + r.sup_b;
    r.energies = energy_sequence(system, hs, restrict_to(sampled[i], system, m_max), 0, r.tag);
    r.dirichlet_energy = r.energies.limit_estimate;
    r.dirichlet_norm = std::sqrt(std::max(0.0, r.dirichlet_energy) + r.l2_norm * r.l2_norm);
    r.ratio_defined = r.dirichlet_norm > 0.0;
    if (r.ratio_defined) r.ratio = r.lip_norm / r.dirichlet_norm;
    reports.push_back(std::move(r));
  }
  return reports;
}

NormReport norm_report(const FractalSystem& system, const HarmonicStructure& hs, const FunctionSpec& spec, int m_max,
                       int n) {
  return norm_reports(system, hs, {spec}, m_max, n).front();
}

EquivalenceSummary equivalence_experiment(const FractalSystem& system, const HarmonicStructure& hs,
                                          const std::vector<FunctionSpec>& corpus, int m_max, int n) {
  if (corpus.empty()) throw InputError("equivalence experiment needs a nonempty corpus");
  EquivalenceSummary out;
  out.m_max = m_max;
  out.level = n;
  out.reports = norm_reports(system, hs, corpus, m_max, n);
  const auto previous = norm_reports(system, hs, corpus, m_max, n - 1);

  out.all_stable = true;
  bool any = false;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = out.reports[i];
    if (!r.ratio_defined) {
      out.excluded.push_back(r.tag);
      continue;
    }
    if (!any) {
      out.min_ratio = out.max_ratio = r.ratio;
      any = true;
    }
    out.min_ratio = std::min(out.min_ratio, r.ratio);
    out.max_ratio = std::max(out.max_ratio, r.ratio);
    FunctionStability st;
    st.tag = r.tag;
    st.ratio = r.ratio;
    st.ratio_previous = previous[i].ratio;
    st.relative_change = std::abs(r.ratio - previous[i].ratio) / r.ratio;
    st.stable = previous[i].ratio_defined && st.relative_change < 0.1;
    out.all_stable = out.all_stable && st.stable;
    out.stability.push_back(st);
  }
  if (any) out.c_empirical = std::max(out.max_ratio, 1.0 / out.min_ratio);
  else out.all_stable = false;
  return out;
}

double hoelder_estimate(const FractalSystem& system, const VertexFunction& f, double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0)) throw InputError("Hoelder exponent must lie in (0, 1)");
  if (f.values.size() != system.vertex_count(f.level)) throw LevelMismatch("function does not match its level");
  double best = 0.0;
  for (int k = 0; k <= f.level; ++k) {
    for (std::size_t s = 0; s < system.symplex_count(k); ++s) {
      const auto v = system.symplex_vertices(k, s);
      for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b) {
          const auto pa = system.point(v[a]);
          const auto pb = system.point(v[b]);
          double d2 = 0.0;
          for (std::size_t c = 0; c < pa.size(); ++c) d2 += (pa[c] - pb[c]) * (pa[c] - pb[c]);
          const double df = std::abs(f.values[static_cast<std::size_t>(v[a])] - f.values[static_cast<std::size_t>(v[b])]);
          best = std::max(best, df / std::pow(std::sqrt(d2), gamma));
        }
    }
  }
  return best;
}

}  // namespace fel
