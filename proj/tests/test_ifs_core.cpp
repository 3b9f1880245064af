#include "fel/definition.hpp"
#include "fel/errors.hpp"
#include "fel/fractal_system.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace fel;

namespace {

const double kSqrt3 = std::sqrt(3.0);

FractalSystem build_preset(const std::string& name, int level) {
  BuildOptions opts;
  opts.max_level = level;
  return FractalSystem::build(preset(name)->maps, opts, name);
}

std::vector<Similitude> perturbed_gasket() {
  auto maps = gasket(2).maps;
  Eigen::VectorXd v = maps[2].translation();
  v[0] += 0.1;
  maps[2] = Similitude::homothety(2.0, v);
  return maps;
}

// Gasket with a fourth copy overlapping the two bottom ones.
std::vector<Similitude> overlapping_gasket() {
  auto maps = gasket(2).maps;
  maps.push_back(Similitude::homothety(2.0, Eigen::Vector2d(0.25, 0.0)));
  return maps;
}

}  // namespace

TEST_CASE("apply_similitude evaluates U x / L + v") {
  const auto g = gasket(2);
  const auto p = apply_similitude(g.maps[1], Eigen::Vector2d(0, 0));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.0));
  const auto q = apply_similitude(g.maps[2], Eigen::Vector2d(1, 0));
  CHECK(q[0] == doctest::Approx(0.75));
  CHECK(q[1] == doctest::Approx(kSqrt3 / 4));
  for (const auto& psi : g.maps) {
    const auto x = fixed_point(psi);
    CHECK((apply_similitude(psi, x) - x).norm() < 1e-15);
  }
  CHECK_THROWS_AS(apply_similitude(g.maps[0], Eigen::Vector3d(0, 0, 0)), DimensionMismatch);
}

TEST_CASE("similitudes reject non-orthogonal rotations and scales <= 1") {
  Eigen::Matrix2d skew;
  skew << 1, 0.1, 0, 1;
  CHECK_THROWS_AS(Similitude(skew, Eigen::Vector2d::Zero(), 2.0), InputError);
  CHECK_THROWS_AS(Similitude::homothety(1.0, Eigen::Vector2d::Zero()), InputError);
}

TEST_CASE("fixed points of the preset maps") {
  const auto g = gasket(2);
  auto x1 = fixed_point(g.maps[0]);
  CHECK(x1.norm() < 1e-15);
  auto x3 = fixed_point(g.maps[2]);
  CHECK(x3[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(x3[1] == doctest::Approx(kSqrt3 / 2).epsilon(1e-14));
  const auto s = snowflake();
  CHECK(fixed_point(s.maps[6]).norm() < 1e-15);

  std::mt19937_64 rng(7);
  for (const auto& psi : oracle::moved_family(s.maps, rng)) {
    const auto x = fixed_point(psi);
    CHECK((psi.apply(x) - x).norm() <= 1e-10 * (1 + x.norm()));
  }
}

TEST_CASE("similitudes contract distances by exactly 1/L") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (const auto& name : preset_names()) {
    for (const auto& psi : oracle::moved_family(preset(name)->maps, rng)) {
      const int n = psi.dimension();
      Eigen::VectorXd x(n), y(n);
      for (int d = 0; d < n; ++d) {
        x[d] = u(rng);
        y[d] = u(rng);
      }
      const double lhs = (psi.apply(x) - psi.apply(y)).norm();
      CHECK(lhs == doctest::Approx((x - y).norm() / psi.scale()).epsilon(1e-12));
    }
  }
}

TEST_CASE("essential fixed points") {
  CHECK(essential_fixed_points(gasket(2).maps).size() == 3);
  const auto snow = essential_fixed_points(snowflake().maps);
  REQUIRE(snow.size() == 6);
  for (const auto& p : snow) CHECK(p.norm() == doctest::Approx(1.0));  // center excluded

  const auto psi = gasket(2).maps[1];
  try {
    essential_fixed_points({psi, psi});
    FAIL("expected ConditionViolation");
  } catch (const ConditionViolation& e) {
    CHECK(e.condition() == 1);
  }
  CHECK_THROWS_AS(FractalSystem::build({psi, psi}, 1), Error);

  // Middle-thirds Cantor maps: the fixed points 0 and 1 are not essential.
  const std::vector<Similitude> cantor{Similitude::homothety(3.0, Eigen::VectorXd::Zero(1)),
                                       Similitude::homothety(3.0, Eigen::VectorXd::Constant(1, 2.0 / 3.0))};
  CHECK_THROWS_AS(essential_fixed_points(cantor), ConditionViolation);
}

TEST_CASE("build: vertex counts match brute-force enumeration") {
  const auto g = build_preset("gasket2", 3);
  std::vector<Eigen::VectorXd> v0;
  for (VertexId x = 0; x < 3; ++x) v0.push_back(g.point_vector(x));
  CHECK(g.vertex_count(1) == 6);
  CHECK(g.vertex_count(2) == 15);
  for (int m = 1; m <= 3; ++m)
    CHECK(oracle::enumerate_vertices(g.maps(), v0, m, 1e-9).size() == g.vertex_count(m));

  const auto s = build_preset("snowflake", 2);
  CHECK(s.vertex_count(1) == 30);
  std::vector<Eigen::VectorXd> s0;
  for (VertexId x = 0; x < 6; ++x) s0.push_back(s.point_vector(x));
  CHECK(oracle::enumerate_vertices(s.maps(), s0, 1, 1e-9).size() == 30);
  CHECK(oracle::enumerate_vertices(s.maps(), s0, 2, 1e-9).size() == s.vertex_count(2));
}

TEST_CASE("build: level-m vertex set equals the brute-force point set as a prefix") {
  const auto g = build_preset("gasket3", 3);
  std::vector<Eigen::VectorXd> v0;
  for (VertexId x = 0; x < 4; ++x) v0.push_back(g.point_vector(x));
  for (int m = 1; m <= 3; ++m) {
    const auto pts = oracle::enumerate_vertices(g.maps(), v0, m, 1e-9);
    for (const auto& p : pts) {
      bool found = false;
      for (std::size_t x = 0; x < g.vertex_count(m) && !found; ++x)
        found = (g.point_vector(static_cast<VertexId>(x)) - p).norm() < 1e-9;
      CHECK(found);
    }
  }
}

TEST_CASE("vertex counts follow the nesting recursion and #F_m = M^m") {
  std::mt19937_64 rng(11);
  for (const auto& name : preset_names()) {
    for (int variant = 0; variant < 2; ++variant) {
      auto maps = preset(name)->maps;
      if (variant == 1) maps = oracle::moved_family(maps, rng);
      const auto sys = FractalSystem::build(maps, 4);
      const auto m_count = sys.map_count();
      std::size_t cells = 1;
      for (int m = 0; m <= sys.max_level(); ++m) {
        CHECK(sys.symplex_count(m) == cells);
        CHECK(static_cast<std::int64_t>(sys.vertex_count(m)) ==
              oracle::closed_form_count(m_count, sys.v0_count(), sys.vertex_count(1), m));
        std::set<std::vector<int>> addresses;
        for (std::size_t s = 0; s < sys.symplex_count(m); ++s) addresses.insert(sys.address(m, s));
        CHECK(addresses.size() == cells);
        cells *= static_cast<std::size_t>(m_count);
      }
    }
  }
}

TEST_CASE("each m-symplex holds #V_{n-m} points of V_n") {
  for (const auto& name : {"gasket2", "snowflake"}) {
    const auto sys = build_preset(name, name == std::string("gasket2") ? 6 : 4);
    for (int m = 1; m <= 3; ++m)
      for (int n = m; n <= sys.max_level(); ++n)
        for (std::size_t s = 0; s < sys.symplex_count(m); ++s)
          CHECK(sys.points_in_symplex(m, s, n).size() == sys.vertex_count(n - m));
  }
}

TEST_CASE("V_m is contained in V_{m+1} with the same ids") {
  const auto sys = build_preset("snowflake", 3);
  for (int m = 0; m < 3; ++m) {
    const auto coarse = sys.vertex_count(m);
    for (std::size_t s = 0; s < sys.symplex_count(m + 1); ++s)
      for (auto x : sys.symplex_vertices(m + 1, s)) CHECK(static_cast<std::size_t>(x) < sys.vertex_count(m + 1));
    // Every level-m symplex vertex reappears as a vertex of one of its children.
    for (std::size_t s = 0; s < sys.symplex_count(m); ++s) {
      const auto children = sys.points_in_symplex(m, s, m + 1);
      for (auto x : sys.symplex_vertices(m, s)) {
        CHECK(static_cast<std::size_t>(x) < coarse);
        CHECK(std::binary_search(children.begin(), children.end(), x));
      }
    }
  }
}

TEST_CASE("validate: presets satisfy conditions 1, 3, 4, 5") {
  for (const auto& name : preset_names()) {
    const auto sys = build_preset(name, 4);
    const auto rep = validate(sys);
    CHECK(rep.ok());
    CHECK(rep.nesting_depth == 3);
  }
}

TEST_CASE("validate: broken families") {
  BuildOptions lax;
  lax.enforce_conditions = false;

  // Shifting psi_3 turns the gasket into one on a scalene triangle: still nested, no longer symmetric.
  const auto skewed = FractalSystem::build(perturbed_gasket(), lax);
  CHECK(skewed.validation().nesting);
  CHECK(skewed.validation().connectivity);
  CHECK_FALSE(skewed.validation().symmetry);
  CHECK_THROWS_AS(FractalSystem::build(perturbed_gasket(), 4), ConditionViolation);

  const auto overlap = FractalSystem::build(overlapping_gasket(), lax);
  CHECK_FALSE(overlap.validation().nesting);
  CHECK(overlap.validation().first_failure() == 3);
  try {
    FractalSystem::build(overlapping_gasket(), 4);
    FAIL("expected ConditionViolation");
  } catch (const ConditionViolation& e) {
    CHECK(e.condition() == 3);
  }
}

TEST_CASE("counting measure weights") {
  const auto g = build_preset("gasket2", 2);
  CHECK(g.counting_measure_weight(0) == doctest::Approx(1.0 / 3));
  CHECK(g.counting_measure_weight(1) == doctest::Approx(1.0 / 6));
  CHECK(g.counting_measure_weight(2) == doctest::Approx(1.0 / 15));
}

TEST_CASE("symplex neighborhoods") {
  const auto g = build_preset("gasket2", 4);
  const auto n1 = g.symplex_neighborhoods(1);
  CHECK(n1.neighbors[0] == std::vector<std::uint32_t>{0, 1, 2});

  const auto s = build_preset("snowflake", 2);
  const auto sn = s.symplex_neighborhoods(1);
  CHECK(sn.neighbors[6].size() == 7);
  for (std::size_t i = 0; i < 6; ++i) CHECK(sn.neighbors[i].size() == 4);  // itself, center, two outer neighbours

  for (int m = 1; m <= 3; ++m) {
    const auto nb = g.symplex_neighborhoods(m);
    for (std::size_t a = 0; a < nb.neighbors.size(); ++a) {
      CHECK(std::binary_search(nb.neighbors[a].begin(), nb.neighbors[a].end(), a));
      for (auto b : nb.neighbors[a])
        CHECK(std::binary_search(nb.neighbors[b].begin(), nb.neighbors[b].end(), static_cast<std::uint32_t>(a)));
    }
  }
}

TEST_CASE("neighborhood completeness: close pairs always lie in S and S_*") {
  for (const auto& [name, n_max] : {std::pair{"gasket2", 4}, std::pair{"snowflake", 3}, std::pair{"gasket3", 3}}) {
    const auto sys = build_preset(name, n_max);
    const auto m_count = static_cast<std::size_t>(sys.map_count());
    for (int n = 2; n <= n_max; ++n) {
      for (int m = 1; m < n; ++m) {
        // level-m symplices containing each vertex of V_n
        std::vector<std::set<std::uint32_t>> containing(sys.vertex_count(n));
        std::size_t span = 1;
        for (int j = m; j < n; ++j) span *= m_count;
        for (std::size_t t = 0; t < sys.symplex_count(n); ++t)
          for (auto x : sys.symplex_vertices(n, t)) containing[static_cast<std::size_t>(x)].insert(static_cast<std::uint32_t>(t / span));
        const auto nb = sys.symplex_neighborhoods(m);
        const double radius = sys.c0() / std::pow(sys.scale(), m);
        std::size_t violations = 0;
        for (const auto& [x, y] : oracle::all_close_pairs(sys, n, radius)) {
          bool covered = false;
          for (auto S : containing[static_cast<std::size_t>(x)])
            for (auto T : containing[static_cast<std::size_t>(y)])
              covered = covered || std::binary_search(nb.neighbors[S].begin(), nb.neighbors[S].end(), T);
          if (!covered) ++violations;
        }
        CHECK_MESSAGE(violations == 0, name << " n=" << n << " m=" << m);
      }
    }
  }
}

TEST_CASE("neighbor edges at level 1 of the gasket") {
  const auto g = build_preset("gasket2", 1);
  CHECK(g.neighbor_edges(1).size() == 9);
  CHECK(g.neighbor_edges(0).size() == 3);
}

TEST_CASE("build refuses levels above the point cap") {
  BuildOptions opts;
  opts.max_level = 6;
  opts.point_cap = 1000;
  CHECK_THROWS_AS(FractalSystem::build(gasket(2).maps, opts), ResourceLimit);
  CHECK(enumerable_max_level(3, 3, 2'000'000) == 12);
  CHECK(enumerable_max_level(7, 6, 2'000'000) == 6);
}

TEST_CASE("diameter and c0") {
  const auto s = build_preset("snowflake", 3);
  CHECK(s.c0() == doctest::Approx(1.0));
  CHECK(s.diameter() == doctest::Approx(2.0));
  const auto g = build_preset("gasket2", 3);
  CHECK(g.c0() == doctest::Approx(1.0));
  CHECK(g.diameter() == doctest::Approx(1.0));
}

TEST_CASE("definition files round-trip") {
  for (const auto& name : preset_names()) {
    const auto def = *preset(name);
    const auto back = parse_definition(format_definition(def));
    CHECK(back.name == def.name);
    REQUIRE(back.maps.size() == def.maps.size());
    for (std::size_t i = 0; i < def.maps.size(); ++i) CHECK(back.maps[i].approx_equal(def.maps[i], 0.0));
  }
  CHECK_THROWS_AS(parse_definition("{not json"), InputError);
  CHECK_THROWS_AS(parse_definition(R"({"dimension":2,"scale":2,"maps":[{"rotation":[1,0,0],"translation":[0,0]}]})"),
                  InputError);
  CHECK_THROWS_AS(resolve_definition("no-such-fractal"), InputError);
}
