#include "kmfl/network.hpp"

#include <cmath>
#include <string>

#include "kmfl/error.hpp"

namespace kmfl {

TwoLayerNetFunctional::TwoLayerNetFunctional(std::shared_ptr<const Dataset> data, double threshold)
    : data_(std::move(data)), threshold_(threshold) {
  if (!data_ || data_->size() == 0) throw Error(ErrorKind::kEmptyDataset, "dataset has no samples");
  if (data_->labels.rows() != data_->features.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature and label row counts differ");
  }
  if (!(threshold > 0.0)) throw Error(ErrorKind::kInvalidParameter, "threshold L must be positive");
}

Index TwoLayerNetFunctional::dimension() const { return output_dim() + input_dim() + 1; }

double TwoLayerNetFunctional::truncate(double x) const {
  return threshold_ * std::tanh(x / threshold_);
}

Vector TwoLayerNetFunctional::neuron_output(const Eigen::Ref<const Vector>& theta,
                                            const Eigen::Ref<const Vector>& z) const {
  if (theta.size() != dimension() || z.size() != input_dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "theta must have length " + std::to_string(dimension()) + " and z length " +
                    std::to_string(input_dim()));
  }
  const Index d_out = output_dim();
  const double act = sigmoid(theta.segment(d_out, input_dim()).dot(z) + theta(dimension() - 1));
  Vector out(d_out);
  for (Index j = 0; j < d_out; ++j) out(j) = truncate(theta(j)) * act;
  return out;
}

Matrix TwoLayerNetFunctional::network_output(const Matrix& particles) const {
  check_points(particles);
  const Index n = particles.rows();
  const Index d_out = output_dim();
  const Index d_in = input_dim();

  // pre-activations, N x K
  Matrix pre = particles.middleCols(d_out, d_in) * data_->features.transpose();
  pre.colwise() += particles.col(d_out + d_in);
  const Matrix act = pre.unaryExpr([](double s) { return sigmoid(s); });
  const Matrix trunc = particles.leftCols(d_out).unaryExpr([this](double c) { return truncate(c); });
  return (act.transpose() * trunc) / static_cast<double>(n);
}

Matrix TwoLayerNetFunctional::residuals(const Matrix& particles) const {
  return data_->labels - network_output(particles);
}

double TwoLayerNetFunctional::value(const Matrix& particles) const {
  return 0.5 * residuals(particles).squaredNorm() / static_cast<double>(data_->size());
}

Vector TwoLayerNetFunctional::drift(const Matrix& particles,
                                    const Eigen::Ref<const Vector>& query) const {
  if (query.size() != dimension()) throw Error(ErrorKind::kDimensionMismatch, "query dimension");
  const Matrix res = residuals(particles);
  const Index d_out = output_dim();
  const Index d_in = input_dim();
  const Index k_count = data_->size();
  const double inv_k = 1.0 / static_cast<double>(k_count);

  Vector trunc(d_out), trunc_slope(d_out);
  for (Index j = 0; j < d_out; ++j) {
    const double t = std::tanh(query(j) / threshold_);
    trunc(j) = threshold_ * t;
    trunc_slope(j) = 1.0 - t * t;
  }
  const Vector pre =
      data_->features * query.segment(d_out, d_in) + Vector::Constant(k_count, query(d_out + d_in));

  Vector grad = Vector::Zero(dimension());
  for (Index k = 0; k < k_count; ++k) {
    const double act = sigmoid(pre(k));
    const double act_slope = act * (1.0 - act);
    const double weight = res.row(k).dot(trunc) * act_slope;
    for (Index j = 0; j < d_out; ++j) grad(j) += res(k, j) * trunc_slope(j) * act;
    grad.segment(d_out, d_in) += weight * data_->features.row(k).transpose();
    grad(d_out + d_in) += weight;
  }
  return -inv_k * grad;
}

void TwoLayerNetFunctional::drift_all(const Matrix& particles, Matrix& out, int /*threads*/) const {
  check_points(particles);
  const Index d_out = output_dim();
  const Index d_in = input_dim();
  const double inv_k = 1.0 / static_cast<double>(data_->size());

  Matrix pre = particles.middleCols(d_out, d_in) * data_->features.transpose();
  pre.colwise() += particles.col(d_out + d_in);
  const Matrix act = pre.unaryExpr([](double s) { return sigmoid(s); });
  const Matrix act_slope = act.unaryExpr([](double p) { return p * (1.0 - p); });

  Matrix trunc(particles.rows(), d_out), trunc_slope(particles.rows(), d_out);
  for (Index i = 0; i < particles.rows(); ++i) {
    for (Index j = 0; j < d_out; ++j) {
      const double t = std::tanh(particles(i, j) / threshold_);
      trunc(i, j) = threshold_ * t;
      trunc_slope(i, j) = 1.0 - t * t;
    }
  }
  const Matrix res =
      data_->labels - (act.transpose() * trunc) / static_cast<double>(particles.rows());

  // Per-(neuron, sample) weight on the pre-activation gradient.
  const Matrix weight = (trunc * res.transpose()).cwiseProduct(act_slope);

  out.resize(particles.rows(), dimension());
  out.leftCols(d_out) = -inv_k * (act * res).cwiseProduct(trunc_slope);
  out.middleCols(d_out, d_in) = -inv_k * (weight * data_->features);
  out.col(d_out + d_in) = -inv_k * weight.rowwise().sum();
}

double network_loss(const Matrix& particles, std::shared_ptr<const Dataset> data,
                    double threshold) {
  return TwoLayerNetFunctional(std::move(data), threshold).value(particles);
}

Vector network_drift(const Matrix& particles, Index i, std::shared_ptr<const Dataset> data,
                     double threshold) {
  if (i < 0 || i >= particles.rows()) {
    throw Error(ErrorKind::kDimensionMismatch, "particle index out of range");
  }
  const TwoLayerNetFunctional functional(std::move(data), threshold);
  return functional.drift(particles, particles.row(i).transpose());
}

}  // namespace kmfl
