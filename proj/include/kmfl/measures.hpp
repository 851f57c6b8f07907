#pragma once

#include <cstdint>
#include <vector>

#include "kmfl/functional.hpp"
#include "kmfl/types.hpp"

namespace kmfl {

/// Largest point count accepted by the exact assignment solver.
inline constexpr Index kAssignmentLimit = 512;

/// Uniform atomic measure on the rows of `points`.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(Matrix points);

  const Matrix& points() const { return points_; }
  Index size() const { return points_.rows(); }
  Index dimension() const { return points_.cols(); }

 private:
  Matrix points_;
};

/// Trace of the empirical covariance (1/M normalization).
double variance(const EmpiricalMeasure& m);

/// Optimal assignment for a square cost matrix (Hungarian method with
/// potentials, O(n^3)). Returns assignment[i] = column matched to row i.
std::vector<Index> solve_assignment(const DenseMatrix& cost);

/// W2^2 between equal-size measures: optimal assignment under squared
/// Euclidean cost (sorted coupling when d = 1). SizeMismatch on unequal
/// sizes; TooLarge above kAssignmentLimit points for d > 1.
double w2_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// W1 between equal-size one-dimensional measures via the sorted coupling.
double w1_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// W1 between arbitrary-size one-dimensional uniform measures, as the integral
/// of |F_a - F_b| over the line.
double w1_cdf_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// (1/(N(N-1))) sum_{j != i} |x_j - x_i|, an upper bound on W1(mu_x, mu_{x^{-i}}).
double leave_one_out_w1_bound(const Matrix& points, Index i);

/// Constants (M1, M2) bounding the first and second measure derivatives of a
/// functional phi around a base measure m.
struct ConcentrationConstants {
  double m1;
  double m2;
};

struct ConcentrationResult {
  double mse;       ///< Monte-Carlo mean of |phi(mu_xi) - phi(m)|^2
  double std_error; ///< standard error of `mse`
  double bound;     ///< M1^2 Var(m) / N + M2^2 / (4 N^2)
};

/// Resamples N points i.i.d. from `base` `trials` times (trials >= 100) and
/// compares the mean squared deviation of phi against the concentration bound.
/// Trials are keyed by (seed, trial) and may run on `threads` workers.
ConcentrationResult concentration_check(const MeanFieldFunctional& phi,
                                        const ConcentrationConstants& constants,
                                        const EmpiricalMeasure& base, Index n, int trials,
                                        std::uint64_t seed, int threads = 1);

}  // namespace kmfl
