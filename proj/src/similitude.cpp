#include "fel/similitude.hpp"

#include "fel/errors.hpp"

#include <cmath>
#include <string>

namespace fel {

Similitude::Similitude(Eigen::MatrixXd rotation, Eigen::VectorXd translation, double scale)
    : rotation_(std::move(rotation)), translation_(std::move(translation)), scale_(scale) {
  const auto n = translation_.size();
  if (n < 1) throw DimensionMismatch("similitude needs dimension >= 1");
  if (rotation_.rows() != n || rotation_.cols() != n)
    throw DimensionMismatch("rotation must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!(scale_ > 1.0)) throw InputError("similitude scale must exceed 1");
  const Eigen::MatrixXd gram = rotation_.transpose() * rotation_;
  const double defect = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw InputError("rotation is not orthogonal (|U^T U - I| = " + std::to_string(defect) + ")");
  linear_ = rotation_ / scale_;
}

Similitude Similitude::homothety(double scale, Eigen::VectorXd translation) {
  const auto n = translation.size();
  return Similitude(Eigen::MatrixXd::Identity(n, n), std::move(translation), scale);
}

Point Similitude::apply(const Point& x) const {
  if (x.size() != translation_.size())
    throw DimensionMismatch("point has dimension " + std::to_string(x.size()) + ", map expects " +
                            std::to_string(translation_.size()));
  return linear_ * x + translation_;
}

void Similitude::apply(std::span<const double> x, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(translation_.size());
  for (std::size_t r = 0; r < n; ++r) {
    double acc = translation_[static_cast<Eigen::Index>(r)];
    for (std::size_t c = 0; c < n; ++c)
      acc += linear_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[c];
    out[r] = acc;
  }
}

Point Similitude::fixed_point() const {
  const auto n = translation_.size();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - linear_;
  return system.partialPivLu().solve(translation_);
}

bool Similitude::approx_equal(const Similitude& other, double tol) const {
  if (other.dimension() != dimension()) return false;
  return std::abs(other.scale_ - scale_) <= tol &&
         (other.rotation_ - rotation_).cwiseAbs().maxCoeff() <= tol &&
         (other.translation_ - translation_).cwiseAbs().maxCoeff() <= tol;
}

Point apply_similitude(const Similitude& psi, const Point& x) { return psi.apply(x); }

Point fixed_point(const Similitude& psi) { return psi.fixed_point(); }

Isometry Isometry::bisector_reflection(const Point& x, const Point& y) {
  const Eigen::VectorXd normal = (x - y).normalized();
  const Eigen::VectorXd mid = 0.5 * (x + y);
  const auto n = x.size();
  Isometry r;
  r.linear = Eigen::MatrixXd::Identity(n, n) - 2.0 * normal * normal.transpose();
  r.offset = 2.0 * normal.dot(mid) * normal;
  return r;
}

}  // namespace fel
