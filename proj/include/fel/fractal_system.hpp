#pragma once

#include "fel/similitude.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fel {

using VertexId = std::int32_t;

/// Outcome of checking Conditions 1 and 3-5 on a built system.
/// Condition 2 (open set condition) is never checked.
struct ValidationReport {
  bool essential_points = false;  // Condition 1
  bool nesting = false;           // Condition 3, to `nesting_depth`
  bool connectivity = false;      // Condition 4
  bool symmetry = false;          // Condition 5
  int nesting_depth = 0;
  std::vector<std::string> failures;

  bool ok() const { return essential_points && nesting && connectivity && symmetry; }
  /// Number of the first failing condition, or 0.
  int first_failure() const;
};

/// S_* for every level-m symplex: sorted indices of the symplices sharing a vertex with it.
struct SymplexNeighborhood {
  int level = 0;
  std::vector<std::vector<std::uint32_t>> neighbors;
};

struct BuildOptions {
  /// Deepest level to enumerate. Levels up to 4 are always built for validation.
  int max_level = 4;
  /// Cap on M^max_level * #V_0; 0 means the default (FEL_MAX_POINTS or 2e6).
  std::size_t point_cap = 0;
  /// Throw ConditionViolation when validation fails.
  bool enforce_conditions = true;
};

std::size_t default_point_cap();

/// Largest level whose enumeration stays within the point cap.
int enumerable_max_level(std::size_t map_count, std::size_t v0_count, std::size_t point_cap);

/// Essential fixed points of the family, in order of the map owning them.
/// Throws ConditionViolation(1) when fewer than two exist.
std::vector<Point> essential_fixed_points(const std::vector<Similitude>& maps);

/// Immutable combinatorial skeleton of a self-similar fractal.
///
/// Vertex ids are global across levels: V_m is the id prefix [0, #V_m), and new
/// points at level m are numbered in first-encounter order over lexicographically
/// enumerated level-m addresses. Symplex s at level m has address digits of s
/// written in base M, most significant first; slot k of its vertex list is the
/// image of the k-th point of V_0.
class FractalSystem {
 public:
  static FractalSystem build(std::vector<Similitude> maps, const BuildOptions& options = {},
                             std::string name = {});
  static FractalSystem build(std::vector<Similitude> maps, int max_level) {
    BuildOptions o;
    o.max_level = max_level;
    return build(std::move(maps), o);
  }

  const std::string& name() const { return name_; }
  int dimension() const { return dimension_; }
  int map_count() const { return static_cast<int>(maps_.size()); }
  double scale() const { return scale_; }
  const std::vector<Similitude>& maps() const { return maps_; }
  int max_level() const { return static_cast<int>(level_vertex_counts_.size()) - 1; }

  std::size_t v0_count() const { return level_vertex_counts_[0]; }
  std::size_t vertex_count(int level) const;
  std::span<const double> point(VertexId id) const {
    return {coords_.data() + static_cast<std::size_t>(id) * dimension_, static_cast<std::size_t>(dimension_)};
  }
  Point point_vector(VertexId id) const;

  std::size_t symplex_count(int level) const;
  std::span<const VertexId> symplex_vertices(int level, std::size_t symplex) const;
  std::vector<int> address(int level, std::size_t symplex) const;

  /// Distinct vertex pairs lying in a common level-m cell, sorted.
  std::vector<std::pair<VertexId, VertexId>> neighbor_edges(int level) const;
  SymplexNeighborhood symplex_neighborhoods(int level) const;

  /// Vertex ids of V_n lying in the level-m symplex, sorted (n >= m).
  std::vector<VertexId> points_in_symplex(int m, std::size_t symplex, int n) const;

  /// Index of the lexicographically smallest level-n symplex containing each vertex of V_n.
  std::vector<std::uint32_t> first_symplex(int n) const;

  /// Normalized counting measure weight 1/#V_n.
  double counting_measure_weight(int n) const;

  double c0() const { return c0_; }
  double diameter() const { return diameter_; }
  double merge_tolerance(int level) const;

  /// Reflections R_{x,y} over unordered pairs of V_0, with their induced permutations of V_0.
  const std::vector<Isometry>& symmetry_generators() const { return generators_; }
  const std::vector<std::vector<int>>& v0_permutations() const { return v0_permutations_; }

  const ValidationReport& validation() const { return report_; }

 private:
  FractalSystem() = default;
  void enumerate(int max_level);
  void compute_symmetries();
  ValidationReport run_validation() const;

  std::string name_;
  int dimension_ = 0;
  double scale_ = 0.0;
  std::vector<Similitude> maps_;
  std::vector<double> coords_;
  std::vector<std::size_t> level_vertex_counts_;
  std::vector<std::vector<VertexId>> symplex_tables_;  // per level, M^m * #V_0 ids
  double c0_ = 0.0;
  double diameter_ = 0.0;
  std::vector<Isometry> generators_;
  std::vector<std::vector<int>> v0_permutations_;
  bool generators_permute_v0_ = true;
  ValidationReport report_;
};

ValidationReport validate(const FractalSystem& system);

}  // namespace fel
