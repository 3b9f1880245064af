#include "fel/fractal_system.hpp"

#include "fel/errors.hpp"
#include "grid_hash.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

namespace fel {

namespace {

std::size_t int_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// Sorted ids of the vertices of level-`level` symplices in [first, last).
std::vector<VertexId> collect_ids(const FractalSystem& sys, int level, std::size_t first, std::size_t last) {
  std::vector<VertexId> ids;
  for (std::size_t s = first; s < last; ++s) {
    const auto v = sys.symplex_vertices(level, s);
    ids.insert(ids.end(), v.begin(), v.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

int ValidationReport::first_failure() const {
  if (!essential_points) return 1;
  if (!nesting) return 3;
  if (!connectivity) return 4;
  if (!symmetry) return 5;
  return 0;
}

std::size_t default_point_cap() {
  if (const char* env = std::getenv("FEL_MAX_POINTS")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 2'000'000;
}

int enumerable_max_level(std::size_t map_count, std::size_t v0_count, std::size_t point_cap) {
  int m = 0;
  std::size_t pts = v0_count;
  while (pts * map_count <= point_cap) {
    pts *= map_count;
    ++m;
  }
  return m;
}

std::vector<Point> essential_fixed_points(const std::vector<Similitude>& maps) {
  std::vector<Point> fixed;
  double extent = 0.0;
  for (const auto& psi : maps) {
    fixed.push_back(psi.fixed_point());
    extent = std::max(extent, fixed.back().cwiseAbs().maxCoeff());
  }
  const double tol = 1e-9 * (1.0 + extent);

  std::vector<Point> distinct;
  for (const auto& x : fixed) {
    const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](const Point& y) { return (x - y).norm() <= tol; });
    if (!seen) distinct.push_back(x);
  }

  std::vector<Point> essential;
  for (const auto& x : distinct) {
    bool is_essential = false;
    for (std::size_t i = 0; i < maps.size() && !is_essential; ++i) {
      const Point image = maps[i].apply(x);
      for (std::size_t j = 0; j < maps.size() && !is_essential; ++j) {
        if (i == j) continue;
        for (const auto& y : distinct) {
          if ((image - maps[j].apply(y)).norm() <= tol) {
            is_essential = true;
            break;
          }
        }
      }
    }
    if (is_essential) essential.push_back(x);
  }
  if (essential.size() < 2)
    throw ConditionViolation(1, "only " + std::to_string(essential.size()) + " essential fixed point(s)");
  return essential;
}

FractalSystem FractalSystem::build(std::vector<Similitude> maps, const BuildOptions& options, std::string name) {
  if (maps.size() < 2) throw InputError("a fractal needs at least two similitudes");
  if (options.max_level < 1) throw InputError("max_level must be >= 1");
  const int dim = maps.front().dimension();
  const double scale = maps.front().scale();
  if (dim > detail::kMaxDim) throw UnsupportedDimension("dimension above 8 is not supported");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].dimension() != dim) throw DimensionMismatch("maps have different dimensions");
    if (std::abs(maps[i].scale() - scale) > 1e-12) throw InputError("maps must share one scaling factor");
    for (std::size_t j = 0; j < i; ++j)
      if (maps[i].approx_equal(maps[j], 1e-12))
        throw InputError("maps " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " coincide");
  }

  FractalSystem sys;
  sys.name_ = std::move(name);
  sys.dimension_ = dim;
  sys.scale_ = scale;
  sys.maps_ = std::move(maps);

  const auto v0 = essential_fixed_points(sys.maps_);
  for (const auto& p : v0) sys.coords_.insert(sys.coords_.end(), p.data(), p.data() + dim);
  sys.c0_ = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < v0.size(); ++a)
    for (std::size_t b = a + 1; b < v0.size(); ++b) sys.c0_ = std::min(sys.c0_, (v0[a] - v0[b]).norm());

  const std::size_t cap = options.point_cap ? options.point_cap : default_point_cap();
  const auto m_count = sys.maps_.size();
  const int limit = enumerable_max_level(m_count, v0.size(), cap);
  if (options.max_level > limit)
    throw ResourceLimit("level " + std::to_string(options.max_level) + " needs " +
                        std::to_string(int_pow(m_count, options.max_level) * v0.size()) +
                        " points, above the cap of " + std::to_string(cap) + " (deepest allowed level: " +
                        std::to_string(limit) + ")");
  sys.enumerate(std::max(options.max_level, std::min(4, limit)));

  const int diam_level = std::min(3, sys.max_level());
  const auto nd = sys.vertex_count(diam_level);
  for (std::size_t a = 0; a < nd; ++a)
    for (std::size_t b = a + 1; b < nd; ++b)
      sys.diameter_ = std::max(sys.diameter_, distance(sys.point(static_cast<VertexId>(a)), sys.point(static_cast<VertexId>(b))));

  sys.compute_symmetries();
  sys.report_ = sys.run_validation();
  if (options.enforce_conditions && !sys.report_.ok()) {
    std::string msg;
    for (const auto& f : sys.report_.failures) msg += (msg.empty() ? "" : "; ") + f;
    throw ConditionViolation(sys.report_.first_failure(), msg);
  }
  return sys;
}

void FractalSystem::enumerate(int max_level) {
  const std::size_t v0 = coords_.size() / static_cast<std::size_t>(dimension_);
  const std::size_t m_count = maps_.size();
  level_vertex_counts_ = {v0};
  symplex_tables_.clear();
  symplex_tables_.emplace_back(v0);
  std::iota(symplex_tables_[0].begin(), symplex_tables_[0].end(), VertexId{0});

  std::vector<double> buffer(static_cast<std::size_t>(dimension_));
  for (int m = 0; m < max_level; ++m) {
    const std::size_t count = level_vertex_counts_.back();
    const std::size_t cells = int_pow(m_count, m);
    detail::GridHash registry(coords_, dimension_, merge_tolerance(m + 1), m_count * count);
    for (std::size_t id = 0; id < count; ++id) registry.insert(static_cast<VertexId>(id));

    // image[i * count + x] is the id of psi_i(x) for x in V_m.
    std::vector<VertexId> image(m_count * count, -1);
    const auto& coarse = symplex_tables_.back();
    std::vector<VertexId> fine(cells * m_count * v0);
    for (std::size_t i = 0; i < m_count; ++i) {
      for (std::size_t s = 0; s < cells; ++s) {
        for (std::size_t k = 0; k < v0; ++k) {
          const auto x = coarse[s * v0 + k];
          auto& target = image[i * count + static_cast<std::size_t>(x)];
          if (target < 0) {
            maps_[i].apply(point(x), buffer);
            target = registry.find(buffer);
            if (target < 0) {
              target = static_cast<VertexId>(coords_.size() / static_cast<std::size_t>(dimension_));
              coords_.insert(coords_.end(), buffer.begin(), buffer.end());
              registry.insert(target);
            }
          }
          fine[(i * cells + s) * v0 + k] = target;
        }
      }
    }
    symplex_tables_.push_back(std::move(fine));
    level_vertex_counts_.push_back(coords_.size() / static_cast<std::size_t>(dimension_));
  }
}

void FractalSystem::compute_symmetries() {
  const auto v0 = v0_count();
  const double tol = merge_tolerance(0);
  generators_.clear();
  v0_permutations_.clear();
  generators_permute_v0_ = true;
  for (std::size_t a = 0; a < v0; ++a) {
    for (std::size_t b = a + 1; b < v0; ++b) {
      auto r = Isometry::bisector_reflection(point_vector(static_cast<VertexId>(a)), point_vector(static_cast<VertexId>(b)));
      std::vector<int> perm(v0, -1);
      for (std::size_t k = 0; k < v0; ++k) {
        const Point img = r.apply(point_vector(static_cast<VertexId>(k)));
        for (std::size_t t = 0; t < v0; ++t) {
          if ((img - point_vector(static_cast<VertexId>(t))).norm() <= tol) {
            perm[k] = static_cast<int>(t);
            break;
          }
        }
        if (perm[k] < 0) generators_permute_v0_ = false;
      }
      generators_.push_back(std::move(r));
      v0_permutations_.push_back(std::move(perm));
    }
  }
}

ValidationReport FractalSystem::run_validation() const {
  ValidationReport rep;
  const auto v0 = v0_count();
  const auto m_count = static_cast<std::size_t>(map_count());

  rep.essential_points = v0 >= 2;
  if (!rep.essential_points) rep.failures.push_back("fewer than two essential fixed points");

  // Nesting: psi_i(V_k) and psi_j(V_k) may only meet in psi_i(V_0) and psi_j(V_0).
  rep.nesting = true;
  rep.nesting_depth = std::min(3, max_level() - 1);
  for (int k = 0; k <= rep.nesting_depth && rep.nesting; ++k) {
    const std::size_t block = int_pow(m_count, k);
    std::vector<std::vector<VertexId>> parts(m_count);
    for (std::size_t i = 0; i < m_count; ++i) parts[i] = collect_ids(*this, k + 1, i * block, (i + 1) * block);
    for (std::size_t i = 0; i < m_count && rep.nesting; ++i) {
      for (std::size_t j = i + 1; j < m_count && rep.nesting; ++j) {
        std::vector<VertexId> meet;
        std::set_intersection(parts[i].begin(), parts[i].end(), parts[j].begin(), parts[j].end(), std::back_inserter(meet));
        const auto ci = symplex_vertices(1, i);
        const auto cj = symplex_vertices(1, j);
        for (auto x : meet) {
          const bool in_i = std::find(ci.begin(), ci.end(), x) != ci.end();
          const bool in_j = std::find(cj.begin(), cj.end(), x) != cj.end();
          if (!in_i || !in_j) {
            rep.nesting = false;
            rep.failures.push_back("cells " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                   " meet outside their vertices at depth " + std::to_string(k));
            break;
          }
        }
      }
    }
  }

  UnionFind uf(vertex_count(1));
  for (std::size_t s = 0; s < m_count; ++s) {
    const auto v = symplex_vertices(1, s);
    for (std::size_t k = 1; k < v.size(); ++k) uf.unite(static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[k]));
  }
  rep.connectivity = true;
  for (std::size_t x = 1; x < vertex_count(1); ++x) {
    if (uf.find(x) != uf.find(0)) {
      rep.connectivity = false;
      rep.failures.push_back("1-neighbour graph on V_1 is disconnected");
      break;
    }
  }

  rep.symmetry = generators_permute_v0_;
  if (!generators_permute_v0_) rep.failures.push_back("a reflection R_{x,y} does not map V_0 onto itself");
  const double tol = merge_tolerance(1);
  auto same_cell = [&](const std::vector<Point>& pts, std::size_t j) {
    const auto cj = symplex_vertices(1, j);
    return std::all_of(pts.begin(), pts.end(), [&](const Point& p) {
      return std::any_of(cj.begin(), cj.end(), [&](VertexId y) { return (p - point_vector(y)).norm() <= tol; });
    });
  };
  for (std::size_t g = 0; g < generators_.size() && rep.symmetry; ++g) {
    for (std::size_t i = 0; i < m_count && rep.symmetry; ++i) {
      std::vector<Point> reflected;
      for (auto x : symplex_vertices(1, i)) reflected.push_back(generators_[g].apply(point_vector(x)));
      bool matched = false;
      for (std::size_t j = 0; j < m_count && !matched; ++j) matched = same_cell(reflected, j);
      if (!matched) {
        rep.symmetry = false;
        rep.failures.push_back("reflection " + std::to_string(g) + " maps cell " + std::to_string(i + 1) +
                               " onto no 1-cell");
      }
    }
  }
  return rep;
}

ValidationReport validate(const FractalSystem& system) { return system.validation(); }

std::size_t FractalSystem::vertex_count(int level) const {
  if (level < 0 || level > max_level())
    throw LevelMismatch("level " + std::to_string(level) + " not built (max " + std::to_string(max_level()) + ")");
  return level_vertex_counts_[static_cast<std::size_t>(level)];
}

Point FractalSystem::point_vector(VertexId id) const {
  const auto p = point(id);
  return Eigen::Map<const Eigen::VectorXd>(p.data(), dimension_);
}

std::size_t FractalSystem::symplex_count(int level) const {
  vertex_count(level);
  return symplex_tables_[static_cast<std::size_t>(level)].size() / v0_count();
}

std::span<const VertexId> FractalSystem::symplex_vertices(int level, std::size_t symplex) const {
  const auto& t = symplex_tables_[static_cast<std::size_t>(level)];
  const auto v0 = v0_count();
  return {t.data() + symplex * v0, v0};
}

std::vector<int> FractalSystem::address(int level, std::size_t symplex) const {
  std::vector<int> digits(static_cast<std::size_t>(level));
  const auto m = static_cast<std::size_t>(map_count());
  for (int k = level - 1; k >= 0; --k) {
    digits[static_cast<std::size_t>(k)] = static_cast<int>(symplex % m);
    symplex /= m;
  }
  return digits;
}

std::vector<std::pair<VertexId, VertexId>> FractalSystem::neighbor_edges(int level) const {
  std::vector<std::pair<VertexId, VertexId>> edges;
  const auto n = symplex_count(level);
  for (std::size_t s = 0; s < n; ++s) {
    const auto v = symplex_vertices(level, s);
    for (std::size_t a = 0; a < v.size(); ++a)
      for (std::size_t b = a + 1; b < v.size(); ++b) edges.emplace_back(std::min(v[a], v[b]), std::max(v[a], v[b]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

SymplexNeighborhood FractalSystem::symplex_neighborhoods(int level) const {
  const auto n = symplex_count(level);
  const auto nv = vertex_count(level);
  // CSR incidence vertex -> symplices
  std::vector<std::size_t> offsets(nv + 1, 0);
  for (std::size_t s = 0; s < n; ++s)
    for (auto x : symplex_vertices(level, s)) ++offsets[static_cast<std::size_t>(x) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::uint32_t> incident(offsets.back());
  auto cursor = offsets;
  for (std::size_t s = 0; s < n; ++s)
    for (auto x : symplex_vertices(level, s)) incident[cursor[static_cast<std::size_t>(x)]++] = static_cast<std::uint32_t>(s);

  SymplexNeighborhood out;
  out.level = level;
  out.neighbors.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto& list = out.neighbors[s];
    for (auto x : symplex_vertices(level, s)) {
      const auto ux = static_cast<std::size_t>(x);
      list.insert(list.end(), incident.begin() + static_cast<std::ptrdiff_t>(offsets[ux]),
                  incident.begin() + static_cast<std::ptrdiff_t>(offsets[ux + 1]));
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return out;
}

std::vector<VertexId> FractalSystem::points_in_symplex(int m, std::size_t symplex, int n) const {
  if (n < m) throw LevelMismatch("points_in_symplex needs n >= m");
  const std::size_t span = int_pow(static_cast<std::size_t>(map_count()), n - m);
  return collect_ids(*this, n, symplex * span, (symplex + 1) * span);
}

std::vector<std::uint32_t> FractalSystem::first_symplex(int n) const {
  std::vector<std::uint32_t> first(vertex_count(n), std::numeric_limits<std::uint32_t>::max());
  const auto count = symplex_count(n);
  for (std::size_t s = 0; s < count; ++s)
    for (auto x : symplex_vertices(n, s)) {
      auto& f = first[static_cast<std::size_t>(x)];
      if (f == std::numeric_limits<std::uint32_t>::max()) f = static_cast<std::uint32_t>(s);
    }
  return first;
}

double FractalSystem::counting_measure_weight(int n) const { return 1.0 / static_cast<double>(vertex_count(n)); }

double FractalSystem::merge_tolerance(int level) const { return c0_ / (100.0 * std::pow(scale_, level)); }

}  // namespace fel
