#include "kmfl/functional.hpp"

#include <string>

#include "kmfl/error.hpp"

namespace kmfl {

Vector empirical_mean(const Matrix& points) {
  return points.colwise().mean().transpose();
}

void MeanFieldFunctional::check_points(const Matrix& points) const {
  if (points.rows() < 1 || points.cols() != dimension()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected N x " + std::to_string(dimension()) + " points, got " +
                    std::to_string(points.rows()) + " x " + std::to_string(points.cols()));
  }
}

void MeanFieldFunctional::drift_all(const Matrix& points, Matrix& out, int threads) const {
  check_points(points);
  out.resize(points.rows(), points.cols());
  const Index n = points.rows();
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (Index i = 0; i < n; ++i) {
    out.row(i) = drift(points, points.row(i).transpose()).transpose();
  }
}

ZeroFunctional::ZeroFunctional(Index dimension) : dim_(dimension) {
  if (dimension < 1) throw Error(ErrorKind::kInvalidParameter, "dimension must be >= 1");
}

double ZeroFunctional::value(const Matrix& points) const {
  check_points(points);
  return 0.0;
}

Vector ZeroFunctional::drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const {
  check_points(points);
  if (query.size() != dim_) throw Error(ErrorKind::kDimensionMismatch, "query dimension");
  return Vector::Zero(dim_);
}

void ZeroFunctional::drift_all(const Matrix& points, Matrix& out, int /*threads*/) const {
  check_points(points);
  out = Matrix::Zero(points.rows(), points.cols());
}

LinearFunctional::LinearFunctional(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw Error(ErrorKind::kInvalidParameter, "empty weight vector");
}

double LinearFunctional::value(const Matrix& points) const {
  check_points(points);
  return weights_.dot(empirical_mean(points));
}

Vector LinearFunctional::drift(const Matrix& points, const Eigen::Ref<const Vector>& query) const {
  check_points(points);
  if (query.size() != weights_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "query dimension");
  }
  return weights_;
}

CurieWeissQuadratic::CurieWeissQuadratic(double kappa, double eps, Index dimension)
    : kappa_(kappa), eps_(eps), dim_(dimension) {
  if (!(kappa >= 0.0) || !(eps >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "kappa and eps must be nonnegative");
  }
  if (dimension < 1) throw Error(ErrorKind::kInvalidParameter, "dimension must be >= 1");
}

double CurieWeissQuadratic::value(const Matrix& points) const {
  check_points(points);
  const double second_moment = points.rowwise().squaredNorm().mean();
  return 0.5 * kappa_ * second_moment + 0.5 * eps_ * empirical_mean(points).squaredNorm();
}

Vector CurieWeissQuadratic::drift(const Matrix& points,
                                  const Eigen::Ref<const Vector>& query) const {
  check_points(points);
  if (query.size() != dim_) throw Error(ErrorKind::kDimensionMismatch, "query dimension");
  return kappa_ * query + eps_ * empirical_mean(points);
}

void CurieWeissQuadratic::drift_all(const Matrix& points, Matrix& out, int /*threads*/) const {
  check_points(points);
  const RowVector shift = eps_ * points.colwise().mean();
  out = kappa_ * points;
  out.rowwise() += shift;
}

}  // namespace kmfl
