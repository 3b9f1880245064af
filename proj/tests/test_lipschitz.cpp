#include "fel/characteristics.hpp"
#include "fel/definition.hpp"
#include "fel/errors.hpp"
#include "fel/lipschitz.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace fel;

namespace {

struct Fixture {
  FractalSystem sys;
  HarmonicStructure hs;
  LipschitzParams params;
  explicit Fixture(const std::string& name, int level)
      : sys(FractalSystem::build(preset(name)->maps, level)), hs(solve_ndhs(sys)), params(default_lipschitz_params(sys, hs)) {}
};

// Direct evaluation of the coefficient from the brute-force pair list.
double brute_coefficient(const FractalSystem& sys, const VertexFunction& f, int m, const LipschitzParams& p) {
  const double sum = oracle::all_pairs_sum(sys, f.values, f.level, p.c0 / std::pow(p.base, m));
  const double nv = static_cast<double>(f.values.size());
  return std::pow(p.base, m * p.alpha) * std::sqrt(std::pow(p.base, m * p.d) * sum / (nv * nv));
}

double lip_norm(const FractalSystem& sys, const VertexFunction& f, int m_max, const LipschitzParams& p) {
  double sq = 0.0;
  for (double v : f.values) sq += v * v;
  const auto row = coefficient_table(sys, {f}, m_max, p).front();
  return std::sqrt(sq * sys.counting_measure_weight(f.level)) + *std::max_element(row.begin(), row.end());
}

}  // namespace

TEST_CASE("S_* pair enumeration equals the all-pairs scan") {
  Fixture g("gasket2", 5);
  for (int n = 1; n <= 5; ++n)
    for (int m = 0; m <= std::min(2, n); ++m) {
      const double radius = g.sys.c0() / std::pow(2.0, m);
      std::vector<std::pair<VertexId, VertexId>> found;
      ClosePairs(g.sys, n, m, radius).for_each([&](VertexId x, VertexId y) { found.emplace_back(x, y); });
      auto expected = oracle::all_close_pairs(g.sys, n, radius);
      const auto before = found.size();
      std::sort(found.begin(), found.end());
      CHECK(std::unique(found.begin(), found.end()) == found.end());  // no pair visited twice
      std::sort(expected.begin(), expected.end());
      CHECK(before == expected.size());
      CHECK(found == expected);
    }

  // Off-scale base: level-k neighborhoods with a base-2 cutoff on the snowflake.
  Fixture s("snowflake", 4);
  for (int m = 1; m <= 3; ++m) {
    const double radius = s.sys.c0() / std::pow(2.0, m);
    const int k = neighborhood_level(s.sys, m, 2.0);
    CHECK(radius <= s.sys.c0() / std::pow(3.0, k));
    std::vector<std::pair<VertexId, VertexId>> found;
    ClosePairs(s.sys, 3, k, radius).for_each([&](VertexId x, VertexId y) { found.emplace_back(x, y); });
    auto expected = oracle::all_close_pairs(s.sys, 3, radius);
    std::sort(found.begin(), found.end());
    std::sort(expected.begin(), expected.end());
    CHECK(found == expected);
  }
  CHECK_THROWS_AS(ClosePairs(g.sys, 3, 2, 0.0), InputError);
  CHECK_THROWS_AS(ClosePairs(g.sys, 3, 4, 0.1), LevelMismatch);
}

TEST_CASE("neighborhoods contain S_* and reach across holes") {
  Fixture g("gasket2", 3);
  const double radius = g.sys.c0() / 4.0;
  const ClosePairs pairs(g.sys, 3, 2, radius);
  const auto ring = g.sys.symplex_neighborhoods(2);
  for (std::size_t s = 0; s < g.sys.symplex_count(2); ++s) {
    const auto& wide = pairs.neighborhood(s);
    CHECK(std::includes(wide.begin(), wide.end(), ring.neighbors[s].begin(), ring.neighbors[s].end()));
  }
  // Touching cells alone miss pairs at distance sqrt(3)/8 < 1/4 across the central hole.
  const auto first = g.sys.first_symplex(3);
  int missed = 0;
  for (const auto& [x, y] : oracle::all_close_pairs(g.sys, 3, radius)) {
    const auto& ring_x = ring.neighbors[first[static_cast<std::size_t>(x)] / 3];
    bool reachable = false;
    for (auto t : ring_x) {
      const auto inside = g.sys.points_in_symplex(2, t, 3);
      reachable = reachable || std::binary_search(inside.begin(), inside.end(), y);
    }
    if (!reachable) ++missed;
  }
  CHECK(missed > 0);
}

TEST_CASE("b_m against the brute-force oracle") {
  Fixture g("gasket2", 5);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n = 2; n <= 5; ++n) {
    VertexFunction f{n, std::vector<double>(g.sys.vertex_count(n))};
    for (auto& v : f.values) v = u(rng);
    for (int m = 1; m <= std::min(2, n - 1); ++m) {
      const double b = b_coefficient(g.sys, f, m, g.params);
      const double brute = brute_coefficient(g.sys, f, m, g.params);
      CHECK(std::abs(b - brute) <= 1e-12 * std::max(1.0, brute));
    }
  }
  const auto x1 = FunctionSpec::coordinate(0).sample(g.sys, g.hs, 5);
  const double b = b_coefficient(g.sys, x1, 1, g.params);
  CHECK(b > 0.0);
  CHECK(std::abs(b - brute_coefficient(g.sys, x1, 1, g.params)) <= 1e-12 * std::max(1.0, b));
}

TEST_CASE("coefficient basics: constants, homogeneity, coinciding bases, resolution") {
  Fixture g("gasket2", 5);
  VertexFunction c{5, std::vector<double>(g.sys.vertex_count(5), 2.0)};
  for (int m = 1; m <= 4; ++m) {
    CHECK(b_coefficient(g.sys, c, m, g.params) == 0.0);
    CHECK(a_coefficient(g.sys, c, m, g.params) == 0.0);
  }
  const auto f = FunctionSpec::parse("harmonic:0.3,-1,0.7").sample(g.sys, g.hs, 5);
  VertexFunction f2 = f;
  for (auto& v : f2.values) v *= -2.0;
  for (int m = 1; m <= 4; ++m) {
    const double b = b_coefficient(g.sys, f, m, g.params);
    CHECK(b_coefficient(g.sys, f2, m, g.params) == doctest::Approx(2.0 * b).epsilon(1e-13));
    CHECK(a_coefficient(g.sys, f, m, g.params) == b);
  }
  CHECK_THROWS_AS(b_coefficient(g.sys, f, 5, g.params), ResolutionTooCoarse);
  CHECK_THROWS_AS(b_coefficient(g.sys, restrict_to(f, g.sys, 2), 3, g.params), ResolutionTooCoarse);

  const auto table = coefficient_table(g.sys, {f, f2}, 4, g.params);
  for (int m = 1; m <= 4; ++m) {
    CHECK(table[0][static_cast<std::size_t>(m - 1)] == doctest::Approx(b_coefficient(g.sys, f, m, g.params)).epsilon(1e-13));
    CHECK(table[1][static_cast<std::size_t>(m - 1)] == doctest::Approx(b_coefficient(g.sys, f2, m, g.params)).epsilon(1e-13));
  }
}

TEST_CASE("base change bound on the snowflake") {
  Fixture s("snowflake", 4);
  const double dbound = std::pow(2.0, s.params.alpha + s.params.d / 2.0);
  for (const auto& spec : generate_corpus(s.sys, 4, 11)) {
    const auto r = norm_report(s.sys, s.hs, spec, 3, 4);
    CHECK(r.sup_b <= dbound * r.sup_a);
    CHECK(r.sup_a <= dbound * r.sup_b);
  }
}

TEST_CASE("norm_report examples") {
  Fixture g("gasket2", 6);
  const auto one = norm_report(g.sys, g.hs, FunctionSpec::harmonic({1, 1, 1}), 3, 6);
  CHECK(one.sup_b <= 1e-12);
  CHECK(one.l2_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.lip_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.dirichlet_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.ratio == doctest::Approx(1.0).epsilon(1e-14));

  const auto zero = norm_report(g.sys, g.hs, FunctionSpec::harmonic({0, 0, 0}), 3, 6);
  CHECK_FALSE(zero.ratio_defined);
  CHECK(std::isnan(zero.ratio));
  CHECK(zero.lip_norm == 0.0);
  CHECK(zero.dirichlet_norm == 0.0);

  const auto h = norm_report(g.sys, g.hs, FunctionSpec::harmonic({1, 0, 0}), 3, 6);
  CHECK(std::abs(h.dirichlet_energy - 2.0) <= 1e-9);
  CHECK(h.approximation_level == 6);
  CHECK(h.b_values.size() == 3);
  CHECK(h.energies.entries.size() == 4);
  for (const auto& [m, b] : h.b_values) CHECK(b >= 0.0);
  CHECK(h.ratio_defined);
  CHECK(std::isfinite(h.ratio));
}

TEST_CASE("norms are homogeneous of degree one") {
  Fixture g("gasket2", 6);
  const std::vector<double> data{0.2, -0.9, 0.4};
  const auto base = norm_report(g.sys, g.hs, FunctionSpec::harmonic(data), 3, 6);
  for (double c : {0.5, 3.0}) {
    std::vector<double> scaled = data;
    for (auto& v : scaled) v *= c;
    const auto r = norm_report(g.sys, g.hs, FunctionSpec::harmonic(scaled), 3, 6);
    CHECK(r.lip_norm == doctest::Approx(c * base.lip_norm).epsilon(1e-12));
    CHECK(r.dirichlet_norm == doctest::Approx(c * base.dirichlet_norm).epsilon(1e-12));
    CHECK(r.ratio == doctest::Approx(base.ratio).epsilon(1e-12));
  }
}

TEST_CASE("triangle inequality of the Lipschitz norm") {
  Fixture g("gasket2", 6);
  const auto corpus = generate_corpus(g.sys, 6, 5);
  std::vector<VertexFunction> sampled;
  for (const auto& s : corpus) sampled.push_back(s.sample(g.sys, g.hs, 6));
  for (std::size_t i = 0; i < sampled.size(); ++i)
    for (std::size_t j = i + 1; j < sampled.size(); ++j) {
      VertexFunction sum = sampled[i];
      for (std::size_t x = 0; x < sum.values.size(); ++x) sum.values[x] += sampled[j].values[x];
      CHECK(lip_norm(g.sys, sum, 3, g.params) <=
            lip_norm(g.sys, sampled[i], 3, g.params) + lip_norm(g.sys, sampled[j], 3, g.params) + 1e-9);
    }
}

TEST_CASE("b_m is stable under measure refinement") {
  Fixture g("gasket2", 7);
  const auto corpus = generate_corpus(g.sys, 6, 13);
  for (int n = 5; n <= 6; ++n) {
    std::vector<VertexFunction> coarse, fine;
    for (const auto& s : corpus) {
      coarse.push_back(s.sample(g.sys, g.hs, n));
      fine.push_back(s.sample(g.sys, g.hs, n + 1));
    }
    const auto tc = coefficient_table(g.sys, coarse, n - 3, g.params);
    const auto tf = coefficient_table(g.sys, fine, n - 3, g.params);
    for (std::size_t i = 0; i < corpus.size(); ++i)
      for (std::size_t k = 0; k < tc[i].size(); ++k) {
        INFO(corpus[i].text() << " n=" << n << " m=" << k + 1);
        CHECK(std::abs(tf[i][k] - tc[i][k]) < 0.1 * tf[i][k]);
      }
  }
}

TEST_CASE("equivalence experiment edge cases") {
  Fixture g("gasket2", 6);
  const auto lone = equivalence_experiment(g.sys, g.hs, {FunctionSpec::harmonic({0, 0, 0})}, 3, 6);
  REQUIRE(lone.excluded.size() == 1);
  CHECK(lone.excluded[0] == "harmonic:0,0,0");
  CHECK(lone.stability.empty());
  CHECK(std::isnan(lone.c_empirical));

  const auto corpus = generate_corpus(g.sys, 4, 3);
  std::vector<FunctionSpec> scaled;
  // Harmonic members scaled by 10 keep their ratios.
  std::vector<FunctionSpec> harmonic_only;
  for (const auto& s : corpus)
    if (s.kind() == FunctionSpec::Kind::Harmonic) harmonic_only.push_back(s);
  for (const auto& s : harmonic_only) {
    const auto text = s.text().substr(std::string("harmonic:").size());
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(10.0 * std::stod(item));
    scaled.push_back(FunctionSpec::harmonic(values));
  }
  const auto a = equivalence_experiment(g.sys, g.hs, harmonic_only, 3, 6);
  const auto b = equivalence_experiment(g.sys, g.hs, scaled, 3, 6);
  REQUIRE(a.stability.size() == b.stability.size());
  for (std::size_t i = 0; i < a.stability.size(); ++i)
    CHECK(b.stability[i].ratio == doctest::Approx(a.stability[i].ratio).epsilon(1e-12));
  CHECK(std::isfinite(a.c_empirical));
  CHECK(a.c_empirical >= 1.0);
  for (const auto& st : a.stability) {
    CHECK(st.ratio <= a.c_empirical);
    CHECK(st.ratio >= 1.0 / a.c_empirical);
  }
  CHECK_THROWS_AS(equivalence_experiment(g.sys, g.hs, {}, 3, 6), InputError);
}

TEST_CASE("Hoelder estimates") {
  Fixture g("gasket2", 6);
  const auto dims = dimensions(g.sys, g.hs);
  const double gamma = (dims.d_w - dims.d_f) / 2.0;
  CHECK(gamma == doctest::Approx((std::log(5.0) - std::log(3.0)) / (2 * std::log(2.0))).epsilon(1e-12));
  const VertexFunction c{4, std::vector<double>(g.sys.vertex_count(4), 1.0)};
  CHECK(hoelder_estimate(g.sys, c, gamma) == 0.0);
  const auto f = FunctionSpec::harmonic({1, 0, 0}).sample(g.sys, g.hs, 6);
  const double h = hoelder_estimate(g.sys, f, gamma);
  const double steep = hoelder_estimate(g.sys, f, 0.999);
  CHECK(std::isfinite(h));
  CHECK(h > 0.0);
  CHECK(std::isfinite(steep));
  CHECK(steep > h);
  const double h4 = hoelder_estimate(g.sys, restrict_to(f, g.sys, 4), gamma);
  CHECK(std::abs(h - h4) <= 0.2 * h);
  CHECK_THROWS_AS(hoelder_estimate(g.sys, f, 1.0), InputError);
  CHECK_THROWS_AS(hoelder_estimate(g.sys, f, 0.0), InputError);
}
