#pragma once

// Tolerance-merging point registry on a uniform grid. Internal to the build.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace fel::detail {

inline constexpr int kMaxDim = 8;

// Open-addressing table of point ids keyed by grid cell. Points closer than
// `tol` are considered identical. The cell side is 4*tol, so a query only
// visits neighboring cells along axes where it sits within tol of a cell face.
class GridHash {
 public:
  GridHash(const std::vector<double>& coords, int dim, double tol, std::size_t expected)
      : coords_(coords), dim_(dim), tol_(tol), cell_(4.0 * tol) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 16) cap <<= 1;
    slots_.assign(cap, -1);
  }

  // Id of a registered point within tol of p, or -1.
  std::int32_t find(std::span<const double> p) const {
    std::int64_t base[kMaxDim];
    int lo[kMaxDim], hi[kMaxDim];
    for (int d = 0; d < dim_; ++d) {
      const double s = p[d] / cell_;
      const double fl = std::floor(s);
      base[d] = static_cast<std::int64_t>(fl);
      const double frac = s - fl;
      lo[d] = frac < 0.26 ? -1 : 0;
      hi[d] = frac > 0.74 ? 1 : 0;
    }
    std::int64_t cell[kMaxDim];
    return visit(p, base, lo, hi, cell, 0);
  }

  void insert(std::int32_t id) {
    if (2 * (count_ + 1) > slots_.size()) grow();
    place(id);
    ++count_;
  }

 private:
  std::int32_t visit(std::span<const double> p, const std::int64_t* base, const int* lo, const int* hi,
                     std::int64_t* cell, int d) const {
    if (d == dim_) return probe(p, cell);
    for (int o = lo[d]; o <= hi[d]; ++o) {
      cell[d] = base[d] + o;
      const auto id = visit(p, base, lo, hi, cell, d + 1);
      if (id >= 0) return id;
    }
    return -1;
  }

  std::int32_t probe(std::span<const double> p, const std::int64_t* cell) const {
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash(cell) & mask;; i = (i + 1) & mask) {
      const auto id = slots_[i];
      if (id < 0) return -1;
      if (cell_of(id, cell) && close(p, id)) return id;
    }
  }

  bool cell_of(std::int32_t id, const std::int64_t* cell) const {
    const double* q = coords_.data() + static_cast<std::size_t>(id) * dim_;
    for (int d = 0; d < dim_; ++d)
      if (static_cast<std::int64_t>(std::floor(q[d] / cell_)) != cell[d]) return false;
    return true;
  }

  bool close(std::span<const double> p, std::int32_t id) const {
    const double* q = coords_.data() + static_cast<std::size_t>(id) * dim_;
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) s += (p[d] - q[d]) * (p[d] - q[d]);
    return s <= tol_ * tol_;
  }

  std::size_t hash(const std::int64_t* cell) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int d = 0; d < dim_; ++d) {
      h ^= static_cast<std::uint64_t>(cell[d]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdULL;
      h ^= h >> 33;
    }
    return static_cast<std::size_t>(h);
  }

  void place(std::int32_t id) {
    const double* q = coords_.data() + static_cast<std::size_t>(id) * dim_;
    std::int64_t cell[kMaxDim];
    for (int d = 0; d < dim_; ++d) cell[d] = static_cast<std::int64_t>(std::floor(q[d] / cell_));
    const std::size_t mask = slots_.size() - 1;
    std::size_t i = hash(cell) & mask;
    while (slots_[i] >= 0) i = (i + 1) & mask;
    slots_[i] = id;
  }

  void grow() {
    std::vector<std::int32_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, -1);
    for (auto id : old)
      if (id >= 0) place(id);
  }

  const std::vector<double>& coords_;
  int dim_;
  double tol_;
  double cell_;
  std::vector<std::int32_t> slots_;
  std::size_t count_ = 0;
};

}  // namespace fel::detail
