#include "kmfl/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kmfl/error.hpp"

namespace kmfl {
namespace {

constexpr double kEigFloor = 1e-14;
constexpr double kEigNegativeTolerance = -1e-8;

void require_same_shape(const GaussianMoments& a, const GaussianMoments& b) {
  a.validate();
  b.validate();
  if (a.phase_dim() != b.phase_dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "Gaussian laws live in different dimensions");
  }
}

// Sum of squared weighted score E_a[s^T W s] with s = M zeta + shift, zeta ~ N(0, cov_a).
double expected_weighted_score(const GaussianMoments& a, const GaussianMoments& ref,
                               const DenseMatrix& weight) {
  const Eigen::LDLT<DenseMatrix> cov_a(a.cov);
  const Eigen::LDLT<DenseMatrix> cov_r(ref.cov);
  const Index n = a.phase_dim();
  const DenseMatrix identity = DenseMatrix::Identity(n, n);
  const DenseMatrix slope = cov_r.solve(identity) - cov_a.solve(identity);
  const Vector shift = cov_r.solve(a.mean - ref.mean);
  const double fluctuation = (weight * slope * a.cov * slope.transpose()).trace();
  return fluctuation + shift.dot(weight * shift);
}

struct MomentDerivative {
  Vector mean;
  DenseMatrix cov;
};

MomentDerivative moment_rhs(const Vector& mean, const DenseMatrix& cov, double kappa, double eps) {
  const Index d = mean.size() / 2;
  MomentDerivative out{Vector(2 * d), DenseMatrix(2 * d, 2 * d)};
  out.mean.head(d) = mean.tail(d);
  out.mean.tail(d) = -mean.tail(d) - (kappa + eps) * mean.head(d);

  // Fluctuations around the mean feel only the kappa part of the drift.
  DenseMatrix a = DenseMatrix::Zero(2 * d, 2 * d);
  a.topRightCorner(d, d).setIdentity();
  a.bottomLeftCorner(d, d) = -kappa * DenseMatrix::Identity(d, d);
  a.bottomRightCorner(d, d) = -DenseMatrix::Identity(d, d);
  out.cov = a * cov + cov * a.transpose();
  out.cov.bottomRightCorner(d, d).diagonal().array() += 2.0;
  return out;
}

void rk4_step(Vector& mean, DenseMatrix& cov, double kappa, double eps, double h) {
  const auto k1 = moment_rhs(mean, cov, kappa, eps);
  const auto k2 = moment_rhs(mean + 0.5 * h * k1.mean, cov + 0.5 * h * k1.cov, kappa, eps);
  const auto k3 = moment_rhs(mean + 0.5 * h * k2.mean, cov + 0.5 * h * k2.cov, kappa, eps);
  const auto k4 = moment_rhs(mean + h * k3.mean, cov + h * k3.cov, kappa, eps);
  mean += (h / 6.0) * (k1.mean + 2.0 * k2.mean + 2.0 * k3.mean + k4.mean);
  cov += (h / 6.0) * (k1.cov + 2.0 * k2.cov + 2.0 * k3.cov + k4.cov);
  cov = 0.5 * (cov + cov.transpose()).eval();
}

void integrate(GaussianMoments& state, double kappa, double eps, double horizon, double ode_dt) {
  if (horizon <= 0.0) return;
  const auto steps = static_cast<long>(std::ceil(horizon / ode_dt - 1e-9));
  const double h = horizon / static_cast<double>(std::max(1L, steps));
  for (long s = 0; s < std::max(1L, steps); ++s) {
    rk4_step(state.mean, state.cov, kappa, eps, h);
    if (!state.cov.allFinite() || Eigen::LLT<DenseMatrix>(state.cov).info() != Eigen::Success) {
      throw Error(ErrorKind::kStepTooLarge,
                  "covariance lost positive definiteness; reduce ode_dt (" +
                      std::to_string(ode_dt) + ")");
    }
  }
  state.time += horizon;
}

}  // namespace

void GaussianMoments::validate() const {
  const Index n = mean.size();
  if (n < 2 || n % 2 != 0 || cov.rows() != n || cov.cols() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "Gaussian moments need a 2d mean and 2d x 2d covariance");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "Gaussian moments are not finite");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::kInvalidParameter, "covariance is not symmetric");
  }
  if (Eigen::LLT<DenseMatrix>(cov).info() != Eigen::Success) {
    throw Error(ErrorKind::kInvalidParameter, "covariance is not positive definite");
  }
}

GaussianMoments invariant_moments(double kappa, double /*eps*/, Index d) {
  if (!(kappa > 0.0)) throw Error(ErrorKind::kInvalidParameter, "invariant law needs kappa > 0");
  GaussianMoments out{Vector::Zero(2 * d), DenseMatrix::Identity(2 * d, 2 * d), 0.0};
  out.cov.topLeftCorner(d, d) /= kappa;
  return out;
}

GaussianMoments propagate_moments(const GaussianMoments& init, double kappa, double eps,
                                  double horizon, double ode_dt) {
  init.validate();
  if (!(horizon >= 0.0) || !(ode_dt > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "need horizon >= 0 and ode_dt > 0");
  }
  GaussianMoments state = init;
  integrate(state, kappa, eps, horizon, ode_dt);
  return state;
}

std::vector<GaussianMoments> propagate_path(const GaussianMoments& init, double kappa,
                                            double eps, const std::vector<double>& times,
                                            double ode_dt) {
  init.validate();
  std::vector<GaussianMoments> out;
  out.reserve(times.size());
  GaussianMoments state = init;
  for (const double t : times) {
    if (t < state.time - 1e-12) {
      throw Error(ErrorKind::kInvalidParameter, "times must be nondecreasing from init.time");
    }
    integrate(state, kappa, eps, t - state.time, ode_dt);
    state.time = t;
    out.push_back(state);
  }
  return out;
}

double gaussian_relative_entropy(const GaussianMoments& a, const GaussianMoments& b) {
  require_same_shape(a, b);
  const Eigen::LDLT<DenseMatrix> cov_b(b.cov);
  const Index n = a.phase_dim();
  const Vector gap = b.mean - a.mean;
  const double trace = cov_b.solve(a.cov).trace();
  const double quad = gap.dot(cov_b.solve(gap));
  const double logdet_a = Eigen::LLT<DenseMatrix>(a.cov).matrixLLT().diagonal().array().log().sum() * 2.0;
  const double logdet_b = Eigen::LLT<DenseMatrix>(b.cov).matrixLLT().diagonal().array().log().sum() * 2.0;
  return std::max(0.0, 0.5 * (trace + quad - static_cast<double>(n) + logdet_b - logdet_a));
}

double gaussian_relative_fisher(const GaussianMoments& a, const GaussianMoments& b) {
  require_same_shape(a, b);
  const Index n = a.phase_dim();
  return std::max(0.0, expected_weighted_score(a, b, DenseMatrix::Identity(n, n)));
}

DenseMatrix psd_sqrt(const DenseMatrix& s) {
  const DenseMatrix sym = 0.5 * (s + s.transpose());
  const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym);
  Vector values = eig.eigenvalues();
  for (Index k = 0; k < values.size(); ++k) {
    if (values(k) < kEigNegativeTolerance) {
      throw Error(ErrorKind::kInvalidParameter,
                  "matrix square root of indefinite matrix (eigenvalue " +
                      std::to_string(values(k)) + ")");
    }
    values(k) = std::sqrt(std::max(values(k), kEigFloor));
  }
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

double gaussian_w2(const GaussianMoments& a, const GaussianMoments& b) {
  require_same_shape(a, b);
  const DenseMatrix root_b = psd_sqrt(b.cov);
  const DenseMatrix cross = psd_sqrt(root_b * a.cov * root_b);
  const double bures = (a.cov + b.cov - 2.0 * cross).trace();
  return std::max(0.0, (a.mean - b.mean).squaredNorm() + bures);
}

double gaussian_entropy(const GaussianMoments& a) {
  a.validate();
  const double logdet = 2.0 * Eigen::LLT<DenseMatrix>(a.cov).matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(a.phase_dim());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet);
}

double free_energy(const GaussianMoments& a, double kappa, double eps) {
  a.validate();
  const Index d = a.dimension();
  const Vector mean_x = a.mean.head(d);
  const Vector mean_v = a.mean.tail(d);
  const double energy = 0.5 * kappa * (mean_x.squaredNorm() + a.cov.topLeftCorner(d, d).trace()) +
                        0.5 * eps * mean_x.squaredNorm();
  const double kinetic = 0.5 * (mean_v.squaredNorm() + a.cov.bottomRightCorner(d, d).trace());
  return energy + kinetic + gaussian_entropy(a);
}

double free_energy_gap(const GaussianMoments& a, double kappa, double eps) {
  return free_energy(a, kappa, eps) - free_energy(invariant_moments(kappa, eps, a.dimension()), kappa, eps);
}

double hypocoercive_functional(const GaussianMoments& m, const HypocoerciveCoefficients& coeffs,
                               const GaussianMoments& reference) {
  if (!(coeffs.a > 0.0) || !(coeffs.a * coeffs.c > coeffs.b * coeffs.b)) {
    throw Error(ErrorKind::kIndefiniteCoefficients, "need a > 0 and a*c > b^2");
  }
  require_same_shape(m, reference);
  const Index d = m.dimension();
  DenseMatrix weight = DenseMatrix::Zero(2 * d, 2 * d);
  weight.topLeftCorner(d, d).diagonal().setConstant(coeffs.c);
  weight.bottomRightCorner(d, d).diagonal().setConstant(coeffs.a);
  weight.topRightCorner(d, d).diagonal().setConstant(coeffs.b);
  weight.bottomLeftCorner(d, d).diagonal().setConstant(coeffs.b);
  return std::max(0.0, expected_weighted_score(m, reference, weight));
}

double curie_weiss_lsi_constant(double kappa) { return std::min(0.5 * kappa, 0.5); }

GaussianMoments empirical_moments(const ParticleState& state) {
  const Index n = state.size();
  const Index d = state.dimension();
  Matrix phase(n, 2 * d);
  phase.leftCols(d) = state.positions;
  phase.rightCols(d) = state.velocities;
  GaussianMoments out;
  out.mean = phase.colwise().mean().transpose();
  const Matrix centered = phase.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(n);
  out.time = state.time;
  return out;
}

ParticleState sample_gaussian(const GaussianMoments& law, Index n, const NoiseStream& noise,
                              std::uint64_t tag) {
  law.validate();
  const Index dim = law.phase_dim();
  const Index d = law.dimension();
  const DenseMatrix chol = Eigen::LLT<DenseMatrix>(law.cov).matrixL();
  Matrix x(n, d), v(n, d);
  Vector z(dim);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < dim; ++j) {
      z(j) = noise.normal(tag, static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j));
    }
    const Vector point = law.mean + chol * z;
    x.row(k) = point.head(d).transpose();
    v.row(k) = point.tail(d).transpose();
  }
  return ParticleState(std::move(x), std::move(v), law.time);
}

}  // namespace kmfl
