#pragma once

#include <optional>

#include "kmfl/types.hpp"

namespace kmfl {

/// Regularity constants of a mean-field functional, when known.
struct FunctionalMeta {
  std::optional<double> lip_measure;  ///< W1-Lipschitz constant of m -> D_mF(m, x)
  std::optional<double> lip_space;    ///< Lipschitz constant of x -> D_mF(m, x)
  std::optional<double> lip_third;    ///< bound on the third-order measure derivative term
};

/// Energy F on probability measures, evaluated at uniform empirical measures.
///
/// `points` is an N x d array whose rows are the atoms of mu = (1/N) sum_i delta_{x_i}.
/// `drift(points, x)` returns the intrinsic derivative D_mF(mu, x). The defining
/// identity tested for every implementation is
///   d/dx_i [ N * F(mu_x) ] = D_mF(mu_x, x_i).
class MeanFieldFunctional {
 public:
  virtual ~MeanFieldFunctional() = default;

  virtual Index dimension() const = 0;
  virtual double value(const Matrix& points) const = 0;
  virtual Vector drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const = 0;

  /// D_mF(mu_x, x_i) for every row i, written into `out` (resized to N x d).
  /// The default evaluates `drift` once per particle, in parallel when
  /// `threads > 1`; overrides share per-step work across particles.
  virtual void drift_all(const Matrix& points, Matrix& out, int threads = 1) const;

  virtual FunctionalMeta meta() const { return {}; }

 protected:
  void check_points(const Matrix& points) const;
};

/// F(m) = 0.
class ZeroFunctional final : public MeanFieldFunctional {
 public:
  explicit ZeroFunctional(Index dimension);

  Index dimension() const override { return dim_; }
  double value(const Matrix& points) const override;
  Vector drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const override;
  void drift_all(const Matrix& points, Matrix& out, int threads = 1) const override;
  FunctionalMeta meta() const override { return {0.0, 0.0, 0.0}; }

 private:
  Index dim_;
};

/// F(m) = w . int x m(dx). Linear in m, so D_mF(m, x) = w.
class LinearFunctional final : public MeanFieldFunctional {
 public:
  explicit LinearFunctional(Vector weights);

  Index dimension() const override { return weights_.size(); }
  double value(const Matrix& points) const override;
  Vector drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const override;
  FunctionalMeta meta() const override { return {0.0, 0.0, 0.0}; }

 private:
  Vector weights_;
};

/// Curie-Weiss quadratic energy
///   F(m) = (kappa/2) int |x|^2 m + (eps/2) |int x m|^2,
/// with D_mF(m, x) = kappa x + eps mean(m). Convex for eps >= 0 and its
/// mean-field law stays Gaussian from Gaussian initial data.
class CurieWeissQuadratic final : public MeanFieldFunctional {
 public:
  CurieWeissQuadratic(double kappa, double eps, Index dimension);

  double kappa() const { return kappa_; }
  double eps() const { return eps_; }

  Index dimension() const override { return dim_; }
  double value(const Matrix& points) const override;
  Vector drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const override;
  void drift_all(const Matrix& points, Matrix& out, int threads = 1) const override;
  FunctionalMeta meta() const override { return {eps_, kappa_, 0.0}; }

 private:
  double kappa_;
  double eps_;
  Index dim_;
};

/// Mean of the rows of `points`.
Vector empirical_mean(const Matrix& points);

}  // namespace kmfl
