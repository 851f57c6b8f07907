#pragma once

#include <vector>

#include "kmfl/dynamics.hpp"
#include "kmfl/noise.hpp"
#include "kmfl/types.hpp"

namespace kmfl {

/// Gaussian law on phase space R^{2d}; coordinates are ordered (x, v).
struct GaussianMoments {
  Vector mean;      ///< length 2d
  DenseMatrix cov;  ///< 2d x 2d, symmetric positive definite
  double time = 0.0;

  Index phase_dim() const { return mean.size(); }
  Index dimension() const { return mean.size() / 2; }

  /// Throws DimensionMismatch for bad shapes, InvalidParameter when the
  /// covariance is asymmetric beyond 1e-12 or not positive definite.
  void validate() const;
};

/// Invariant law of the normalized Curie-Weiss dynamics: N(0, diag(I/kappa, I)).
GaussianMoments invariant_moments(double kappa, double eps, Index d);

/// Law at `init.time + horizon` of the normalized mean-field dynamics
///   dX = V dt,  dV = -V dt - (kappa X + eps E[X]) dt + sqrt(2) dW.
/// Mean and covariance ODEs are integrated with classical RK4 at a step no
/// larger than `ode_dt`. Throws StepTooLarge if the covariance stops being
/// positive definite.
GaussianMoments propagate_moments(const GaussianMoments& init, double kappa, double eps,
                                  double horizon, double ode_dt);

/// Moments at each of `times` (nondecreasing, >= init.time), integrating once.
std::vector<GaussianMoments> propagate_path(const GaussianMoments& init, double kappa,
                                            double eps, const std::vector<double>& times,
                                            double ode_dt);

/// KL divergence H(a | b).
double gaussian_relative_entropy(const GaussianMoments& a, const GaussianMoments& b);

/// I(a | b) = E_a |grad log a - grad log b|^2.
double gaussian_relative_fisher(const GaussianMoments& a, const GaussianMoments& b);

/// Squared Bures-Wasserstein distance W2^2(a, b).
double gaussian_w2(const GaussianMoments& a, const GaussianMoments& b);

/// int a log a (negative differential entropy).
double gaussian_entropy(const GaussianMoments& a);

/// F(a^x) + 1/2 E|v|^2 + H(a) for the Curie-Weiss energy.
double free_energy(const GaussianMoments& a, double kappa, double eps);

/// free_energy(a) - free_energy(invariant law).
double free_energy_gap(const GaussianMoments& a, double kappa, double eps);

/// Weights of the mixed Fisher functional; requires a > 0 and a*c > b^2.
struct HypocoerciveCoefficients {
  double a;  ///< on |grad_v log(m/ref)|^2
  double b;  ///< on 2 grad_v log(m/ref) . grad_x log(m/ref)
  double c;  ///< on |grad_x log(m/ref)|^2
};

/// E_m[a |s_v|^2 + 2b s_v.s_x + c |s_x|^2] with s = grad log(m / reference).
/// Throws IndefiniteCoefficients unless a > 0 and a*c > b^2.
double hypocoercive_functional(const GaussianMoments& m, const HypocoerciveCoefficients& coeffs,
                               const GaussianMoments& reference);

/// LSI constant, in the normalization rho Ent(f^2) <= E|grad f|^2, of the
/// Curie-Weiss invariant law N(0, diag(I/kappa, I)): min(kappa/2, 1/2).
double curie_weiss_lsi_constant(double kappa);

/// Phase-space mean and (1/N-normalized) covariance of a particle cloud.
GaussianMoments empirical_moments(const ParticleState& state);

/// n i.i.d. draws from `law`; returns an N x d particle state (x, v split).
/// Draw k uses `noise` at (step = tag, particle = k).
ParticleState sample_gaussian(const GaussianMoments& law, Index n, const NoiseStream& noise,
                              std::uint64_t tag = 0);

/// Symmetric positive semidefinite square root. Eigenvalues in [-1e-8, 1e-14)
/// are clamped to 1e-14; anything more negative raises InvalidParameter.
DenseMatrix psd_sqrt(const DenseMatrix& s);

}  // namespace kmfl
