#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace fel {

using Point = Eigen::VectorXd;

/// Contraction x -> U x / L + v with U orthogonal and L > 1.
class Similitude {
 public:
  Similitude(Eigen::MatrixXd rotation, Eigen::VectorXd translation, double scale);

  /// Pure scaling map x -> x / L + v.
  static Similitude homothety(double scale, Eigen::VectorXd translation);

  int dimension() const { return static_cast<int>(translation_.size()); }
  double scale() const { return scale_; }
  const Eigen::MatrixXd& rotation() const { return rotation_; }
  const Eigen::VectorXd& translation() const { return translation_; }

  Point apply(const Point& x) const;

  // Hot-path variant on raw coordinates; out must not alias x.
  void apply(std::span<const double> x, std::span<double> out) const;

  Point fixed_point() const;

  bool approx_equal(const Similitude& other, double tol) const;

 private:
  Eigen::MatrixXd rotation_;
  Eigen::VectorXd translation_;
  double scale_;
  Eigen::MatrixXd linear_;  // rotation / scale
};

Point apply_similitude(const Similitude& psi, const Point& x);
Point fixed_point(const Similitude& psi);

/// Affine isometry x -> Q x + t. Used for the reflections R_{x,y}.
struct Isometry {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Point apply(const Point& x) const { return linear * x + offset; }

  /// Reflection in the hyperplane bisecting the segment [x, y].
  static Isometry bisector_reflection(const Point& x, const Point& y);
};

}  // namespace fel
