#pragma once

#include <memory>

#include "kmfl/dataset.hpp"
#include "kmfl/functional.hpp"

namespace kmfl {

/// Mean-field loss of a two-layer network with sigmoid activation and
/// L*tanh(./L) truncation of the output weights.
///
/// A neuron theta = (c, a, b) in R^{d_out} x R^{d_in} x R (in that order)
/// contributes Phi(theta; z) = ell(c) * sigmoid(a.z + b). The network output is
/// the average of Phi over the N neurons and the loss at the empirical measure is
///   F(mu) = 1/(2K) sum_k |y_k - (1/N) sum_i Phi(theta_i; z_k)|^2.
/// The l2 regularizer is not part of this functional; the integrator applies it.
class TwoLayerNetFunctional final : public MeanFieldFunctional {
 public:
  TwoLayerNetFunctional(std::shared_ptr<const Dataset> data, double threshold);

  const Dataset& data() const { return *data_; }
  double threshold() const { return threshold_; }
  Index input_dim() const { return data_->input_dim(); }
  Index output_dim() const { return data_->output_dim(); }

  /// d_out + d_in + 1.
  Index dimension() const override;

  /// ell(x) = L tanh(x / L), lying in (-L, L).
  double truncate(double x) const;

  /// Phi(theta; z).
  Vector neuron_output(const Eigen::Ref<const Vector>& theta,
                       const Eigen::Ref<const Vector>& z) const;

  /// Network output (1/N) sum_i Phi(theta_i; z_k) for every sample, K x d_out.
  Matrix network_output(const Matrix& particles) const;

  double value(const Matrix& particles) const override;

  /// Gradient of theta -> Phi contracted against the residual table
  /// y_k - Phi^N(z_k), i.e. D_mF(mu, theta). Descent direction convention.
  Vector drift(const Matrix& particles, const Eigen::Ref<const Vector>& query) const override;

  /// All N drifts from one residual table; dense products over the dataset.
  void drift_all(const Matrix& particles, Matrix& out, int threads = 1) const override;

 private:
  Matrix residuals(const Matrix& particles) const;

  std::shared_ptr<const Dataset> data_;
  double threshold_;
};

/// (1/(2K)) sum_k |y_k - Phi^N(z_k)|^2 for the given neurons.
double network_loss(const Matrix& particles, std::shared_ptr<const Dataset> data, double threshold);

/// Gradient of theta_i -> N * network_loss.
Vector network_drift(const Matrix& particles, Index i, std::shared_ptr<const Dataset> data,
                     double threshold);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace kmfl
