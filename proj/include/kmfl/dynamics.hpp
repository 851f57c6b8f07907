#pragma once

#include <cstdint>

#include "kmfl/functional.hpp"
#include "kmfl/noise.hpp"
#include "kmfl/types.hpp"

namespace kmfl {

/// Positions and velocities of N particles in R^d, plus the simulation clock.
struct ParticleState {
  Matrix positions;   ///< N x d
  Matrix velocities;  ///< N x d
  double time = 0.0;

  ParticleState() = default;
  ParticleState(Matrix x, Matrix v, double t = 0.0);

  /// N particles at the origin with zero velocity.
  static ParticleState zeros(Index n, Index d);

  Index size() const { return positions.rows(); }
  Index dimension() const { return positions.cols(); }

  /// Throws DimensionMismatch on shape errors, NonFinite on NaN/Inf entries.
  void validate() const;
};

enum class Scheme {
  /// v <- v + dt*(...), then x <- x + alpha*v_new*dt.
  kSemiImplicitEuler,
  /// Both updates use the pre-step state.
  kEulerMaruyama,
};

/// Coefficients of
///   dX = alpha V dt,
///   dV = -gamma V dt - D_mF(mu_X, X) dt - lambda X dt + sigma dW
/// together with the time grid and noise seed.
struct DynamicsParams {
  double alpha = 1.0;
  double gamma = 1.0;
  double sigma = 1.4142135623730951;
  double lambda = 0.0;
  double dt = 0.01;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kSemiImplicitEuler;

  /// Full construction check: alpha, gamma, dt, horizon > 0; sigma, lambda >= 0;
  /// dt <= horizon; gamma*dt < 1.
  void validate() const;

  /// Number of steps to reach the horizon, ceil(horizon / dt).
  std::uint64_t step_count() const;
};

/// One step of the kinetic dynamics. D_mF is evaluated once against the
/// pre-step empirical measure for every particle. `step` keys the noise draws.
/// Requires gamma >= 0 and gamma*dt < 1; gamma = 0 is allowed here so that
/// conservative (frictionless) runs can be stepped directly.
/// Throws NonFinite (with `step` attached) if the result contains NaN/Inf.
ParticleState step_underdamped(const ParticleState& state, const DynamicsParams& params,
                               const MeanFieldFunctional& functional, const NoiseStream& noise,
                               std::uint64_t step, int threads = 1);

/// x <- x - (D_mF(mu_x, x) + lambda x) dt + sigma sqrt(dt) xi.
Matrix step_overdamped(const Matrix& positions, const DynamicsParams& params,
                       const MeanFieldFunctional& functional, const NoiseStream& noise,
                       std::uint64_t step, int threads = 1);

/// Change of variables to the normalized dynamics (alpha = gamma = 1, sigma = sqrt 2):
///   x' = space_scale x,  v' = velocity_scale v,  t = time_scale t',
///   F'(m') = functional_scale F(m),
/// where m' is the push-forward of m under x -> x'. The normalized Brownian
/// motion is W'(t') = gamma^{1/2} W(t).
struct NormalizedScales {
  double space_scale;       ///< sqrt(2 gamma^3) / (alpha sigma)
  double velocity_scale;    ///< sqrt(2 gamma) / sigma
  double time_scale;        ///< 1 / gamma
  double functional_scale;  ///< 2 gamma / (alpha sigma^2)
};

NormalizedScales normalize_params(double alpha, double gamma, double sigma);

}  // namespace kmfl
