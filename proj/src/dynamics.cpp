#include "kmfl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kmfl/error.hpp"

namespace kmfl {
namespace {

void require_finite(const Matrix& m, const char* what, std::uint64_t step) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::kNonFinite,
                std::string(what) + " not finite after step " + std::to_string(step) +
                    " (step size too large?)",
                step);
  }
}

void check_step_params(const DynamicsParams& p) {
  if (!(p.dt > 0.0) || !(p.alpha > 0.0) || !(p.gamma >= 0.0) || !(p.sigma >= 0.0) ||
      !(p.lambda >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "dynamics coefficients out of range");
  }
  if (!(p.gamma * p.dt < 1.0)) {
    throw Error(ErrorKind::kInvalidParameter, "gamma * dt must be < 1");
  }
}

}  // namespace

ParticleState::ParticleState(Matrix x, Matrix v, double t)
    : positions(std::move(x)), velocities(std::move(v)), time(t) {
  validate();
}

ParticleState ParticleState::zeros(Index n, Index d) {
  return ParticleState(Matrix::Zero(n, d), Matrix::Zero(n, d), 0.0);
}

void ParticleState::validate() const {
  if (positions.rows() < 1 || positions.cols() < 1 || velocities.rows() != positions.rows() ||
      velocities.cols() != positions.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "positions and velocities must both be N x d, N, d >= 1");
  }
  if (!positions.allFinite() || !velocities.allFinite() || !std::isfinite(time) || time < 0.0) {
    throw Error(ErrorKind::kNonFinite, "particle state has non-finite entries");
  }
}

void DynamicsParams::validate() const {
  if (!(alpha > 0.0) || !(gamma > 0.0) || !(dt > 0.0) || !(horizon > 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "alpha, gamma, dt and horizon must be positive");
  }
  if (!(sigma >= 0.0) || !(lambda >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "sigma and lambda must be nonnegative");
  }
  if (dt > horizon) throw Error(ErrorKind::kInvalidParameter, "dt exceeds the horizon");
  if (!(gamma * dt < 1.0)) throw Error(ErrorKind::kInvalidParameter, "gamma * dt must be < 1");
}

std::uint64_t DynamicsParams::step_count() const {
  // Guard against horizon/dt landing a hair above an integer.
  const double ratio = horizon / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::uint64_t>(nearest);
  }
  return static_cast<std::uint64_t>(std::ceil(ratio));
}

ParticleState step_underdamped(const ParticleState& state, const DynamicsParams& params,
                               const MeanFieldFunctional& functional, const NoiseStream& noise,
                               std::uint64_t step, int threads) {
  check_step_params(params);
  if (functional.dimension() != state.dimension()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "functional dimension " + std::to_string(functional.dimension()) +
                    " != particle dimension " + std::to_string(state.dimension()));
  }

  Matrix drift;
  functional.drift_all(state.positions, drift, threads);

  const Index n = state.size();
  const Index d = state.dimension();
  const double dt = params.dt;
  const double friction = 1.0 - params.gamma * dt;
  const double noise_scale = params.sigma * std::sqrt(dt);
  const bool semi_implicit = params.scheme == Scheme::kSemiImplicitEuler;

  ParticleState next;
  next.positions.resize(n, d);
  next.velocities.resize(n, d);
  next.time = state.time + dt;

#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const double x = state.positions(i, j);
      const double v = state.velocities(i, j);
      double v_new = friction * v - drift(i, j) * dt - params.lambda * x * dt;
      if (noise_scale != 0.0) {
        v_new += noise_scale * noise.normal(step, static_cast<std::uint32_t>(i),
                                            static_cast<std::uint32_t>(j));
      }
      next.velocities(i, j) = v_new;
      next.positions(i, j) = x + params.alpha * (semi_implicit ? v_new : v) * dt;
    }
  }
  require_finite(next.velocities, "velocities", step);
  require_finite(next.positions, "positions", step);
  return next;
}

Matrix step_overdamped(const Matrix& positions, const DynamicsParams& params,
                       const MeanFieldFunctional& functional, const NoiseStream& noise,
                       std::uint64_t step, int threads) {
  check_step_params(params);
  if (functional.dimension() != positions.cols()) {
    throw Error(ErrorKind::kDimensionMismatch, "functional dimension does not match positions");
  }
  Matrix drift;
  functional.drift_all(positions, drift, threads);

  const Index n = positions.rows();
  const Index d = positions.cols();
  const double dt = params.dt;
  const double noise_scale = params.sigma * std::sqrt(dt);

  Matrix next(n, d);
#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      double x = positions(i, j) - (drift(i, j) + params.lambda * positions(i, j)) * dt;
      if (noise_scale != 0.0) {
        x += noise_scale *
             noise.normal(step, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
      }
      next(i, j) = x;
    }
  }
  require_finite(next, "positions", step);
  return next;
}

NormalizedScales normalize_params(double alpha, double gamma, double sigma) {
  if (!(alpha > 0.0) || !(gamma > 0.0) || !(sigma > 0.0)) {
    throw Error(ErrorKind::kNonPositiveParameter, "alpha, gamma and sigma must be positive");
  }
  return {
      std::sqrt(2.0 * gamma * gamma * gamma) / (alpha * sigma),
      std::sqrt(2.0 * gamma) / sigma,
      1.0 / gamma,
      2.0 * gamma / (alpha * sigma * sigma),
  };
}

}  // namespace kmfl
