#include "kmfl/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kmfl/error.hpp"
#include "kmfl/noise.hpp"

namespace kmfl {
namespace {

std::vector<double> sorted_column(const EmpiricalMeasure& m) {
  std::vector<double> out(m.points().data(), m.points().data() + m.size());
  std::sort(out.begin(), out.end());
  return out;
}

void require_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dimension() != 1 || b.dimension() != 1) {
    throw Error(ErrorKind::kDimensionMismatch, "one-dimensional measures required");
  }
}

void require_same_size(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorKind::kDimensionMismatch, "measures live in different dimensions");
  }
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kSizeMismatch, "point counts differ (" + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(Matrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::kDimensionMismatch, "empirical measure needs at least one point");
  }
  if (!points_.allFinite()) throw Error(ErrorKind::kNonFinite, "empirical measure has non-finite points");
}

double variance(const EmpiricalMeasure& m) {
  const Matrix centered = m.points().rowwise() - m.points().colwise().mean();
  return centered.squaredNorm() / static_cast<double>(m.size());
}

std::vector<Index> solve_assignment(const DenseMatrix& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw Error(ErrorKind::kSizeMismatch, "assignment cost must be square");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> row_of(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    row_of[0] = i;
    Index col = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col] = 1;
      const Index row = row_of[col];
      double delta = kInf;
      Index next = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(row - 1, j - 1) - u[row] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = col;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          next = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      col = next;
    } while (row_of[col] != 0);
    do {
      const Index prev = way[col];
      row_of[col] = row_of[prev];
      col = prev;
    } while (col != 0);
  }

  std::vector<Index> assignment(n);
  for (Index j = 1; j <= n; ++j) assignment[row_of[j] - 1] = j - 1;
  return assignment;
}

double w2_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_same_size(a, b);
  const Index n = a.size();
  if (a.dimension() == 1) {
    const auto xa = sorted_column(a);
    const auto xb = sorted_column(b);
    double total = 0.0;
    for (Index k = 0; k < n; ++k) total += (xa[k] - xb[k]) * (xa[k] - xb[k]);
    return total / static_cast<double>(n);
  }
  if (n > kAssignmentLimit) {
    throw Error(ErrorKind::kTooLarge, "exact assignment limited to " +
                                          std::to_string(kAssignmentLimit) + " points, got " +
                                          std::to_string(n));
  }
  DenseMatrix cost(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) cost(i, j) = (a.points().row(i) - b.points().row(j)).squaredNorm();
  }
  const auto assignment = solve_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += cost(i, assignment[i]);
  return total / static_cast<double>(n);
}

double w1_exact_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_1d(a, b);
  require_same_size(a, b);
  const auto xa = sorted_column(a);
  const auto xb = sorted_column(b);
  double total = 0.0;
  for (std::size_t k = 0; k < xa.size(); ++k) total += std::abs(xa[k] - xb[k]);
  return total / static_cast<double>(xa.size());
}

double w1_cdf_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_1d(a, b);
  const auto xa = sorted_column(a);
  const auto xb = sorted_column(b);
  const double wa = 1.0 / static_cast<double>(xa.size());
  const double wb = 1.0 / static_cast<double>(xb.size());

  // Sweep the merged breakpoints, integrating |F_a - F_b| between them.
  std::size_t ia = 0, ib = 0;
  double cdf_gap = 0.0, total = 0.0;
  double prev = std::min(xa.front(), xb.front());
  while (ia < xa.size() || ib < xb.size()) {
    const double next_a = ia < xa.size() ? xa[ia] : std::numeric_limits<double>::infinity();
    const double next_b = ib < xb.size() ? xb[ib] : std::numeric_limits<double>::infinity();
    const double x = std::min(next_a, next_b);
    total += std::abs(cdf_gap) * (x - prev);
    while (ia < xa.size() && xa[ia] == x) {
      cdf_gap += wa;
      ++ia;
    }
    while (ib < xb.size() && xb[ib] == x) {
      cdf_gap -= wb;
      ++ib;
    }
    prev = x;
  }
  return total;
}

double leave_one_out_w1_bound(const Matrix& points, Index i) {
  const Index n = points.rows();
  if (n < 2) throw Error(ErrorKind::kInvalidParameter, "leave-one-out bound needs N >= 2");
  if (i < 0 || i >= n) throw Error(ErrorKind::kInvalidParameter, "index out of range");
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j != i) total += (points.row(j) - points.row(i)).norm();
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

ConcentrationResult concentration_check(const MeanFieldFunctional& phi,
                                        const ConcentrationConstants& constants,
                                        const EmpiricalMeasure& base, Index n, int trials,
                                        std::uint64_t seed, int threads) {
  if (trials < 100) throw Error(ErrorKind::kInvalidParameter, "concentration check needs >= 100 trials");
  if (n < 1) throw Error(ErrorKind::kInvalidParameter, "sample size must be >= 1");
  if (!(constants.m1 >= 0.0) || !(constants.m2 >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "concentration constants must be nonnegative");
  }

  const double reference = phi.value(base.points());
  const NoiseStream rng(seed);
  const auto base_size = static_cast<std::uint64_t>(base.size());
  std::vector<double> squared(static_cast<std::size_t>(trials));

#pragma omp parallel for num_threads(threads) schedule(static) if (threads > 1)
  for (int t = 0; t < trials; ++t) {
    Matrix sample(n, base.dimension());
    for (Index k = 0; k < n; ++k) {
      const auto pick = rng.uniform_index(static_cast<std::uint64_t>(t),
                                          static_cast<std::uint32_t>(k), 0, base_size);
      sample.row(k) = base.points().row(static_cast<Index>(pick));
    }
    const double gap = phi.value(sample) - reference;
    squared[static_cast<std::size_t>(t)] = gap * gap;
  }

  const double count = static_cast<double>(trials);
  const double mse = std::accumulate(squared.begin(), squared.end(), 0.0) / count;
  double spread = 0.0;
  for (const double s : squared) spread += (s - mse) * (s - mse);
  const double std_error = std::sqrt(spread / (count - 1.0) / count);

  const double nn = static_cast<double>(n);
  const double bound = constants.m1 * constants.m1 * variance(base) / nn +
                       constants.m2 * constants.m2 / (4.0 * nn * nn);
  return {mse, std_error, bound};
}

}  // namespace kmfl
