#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kmfl/error.hpp"
#include "kmfl/functional.hpp"
#include "kmfl/measures.hpp"
#include "kmfl/noise.hpp"

using namespace kmfl;

namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index k = 0;
  for (double x : v) m(k++, 0) = x;
  return m;
}

Matrix random_points(Index n, Index d, const NoiseStream& s, std::uint64_t step) {
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      x(i, j) = s.normal(step, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  return x;
}

double brute_force_assignment(const DenseMatrix& cost) {
  std::vector<Index> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = INFINITY;
  do {
    double c = 0;
    for (Index i = 0; i < cost.rows(); ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double assignment_cost(const DenseMatrix& cost, const std::vector<Index>& a) {
  double c = 0;
  for (Index i = 0; i < cost.rows(); ++i) c += cost(i, a[static_cast<std::size_t>(i)]);
  return c;
}

}  // namespace

TEST_CASE("variance examples") {
  CHECK(variance(EmpiricalMeasure(col({3.0}))) == 0.0);
  CHECK(variance(EmpiricalMeasure(col({-1.0, 1.0}))) == doctest::Approx(1.0));
  Matrix sq(4, 2);
  sq << 0, 0, 2, 0, 0, 2, 2, 2;
  CHECK(variance(EmpiricalMeasure(sq)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(EmpiricalMeasure(Matrix::Zero(0, 1)), Error);
}

TEST_CASE("wasserstein examples") {
  const EmpiricalMeasure a(col({0, 2})), b(col({1, 3}));
  CHECK(w2_exact(a, a) == 0.0);
  CHECK(w2_exact(a, b) == doctest::Approx(1.0));
  CHECK(w1_exact_1d(a, a) == 0.0);
  CHECK(w1_exact_1d(a, b) == doctest::Approx(1.0));
  CHECK(w1_exact_1d(EmpiricalMeasure(col({0})), EmpiricalMeasure(col({5}))) == doctest::Approx(5.0));
  Matrix p(1, 2), q(1, 2);
  p << 0, 0;
  q << 3, 4;
  CHECK(w2_exact(EmpiricalMeasure(p), EmpiricalMeasure(q)) == doctest::Approx(25.0));
  CHECK_THROWS_AS(w2_exact(a, EmpiricalMeasure(col({1}))), Error);
  CHECK_THROWS_AS(w2_exact(EmpiricalMeasure(Matrix::Zero(kAssignmentLimit + 1, 2)),
                           EmpiricalMeasure(Matrix::Zero(kAssignmentLimit + 1, 2))),
                  Error);
  CHECK_NOTHROW(w2_exact(EmpiricalMeasure(Matrix::Zero(2000, 1)), EmpiricalMeasure(Matrix::Zero(2000, 1))));
}

TEST_CASE("hungarian solver is optimal on small instances") {
  const NoiseStream s(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + trial % 7;
    DenseMatrix cost(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        cost(i, j) = std::abs(s.normal(trial, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)));
    const auto a = solve_assignment(cost);
    std::vector<Index> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < n; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(assignment_cost(cost, a) == doctest::Approx(brute_force_assignment(cost)).epsilon(1e-12));
  }
}

TEST_CASE("assignment and sorted coupling agree in one dimension") {
  const NoiseStream s(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 40;
    const Matrix x = random_points(n, 1, s, 2 * trial), y = random_points(n, 1, s, 2 * trial + 1);
    DenseMatrix cost(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) cost(i, j) = (x(i, 0) - y(j, 0)) * (x(i, 0) - y(j, 0));
    const double hungarian = assignment_cost(cost, solve_assignment(cost)) / static_cast<double>(n);
    CHECK(hungarian == doctest::Approx(w2_exact(EmpiricalMeasure(x), EmpiricalMeasure(y))).epsilon(1e-12));
  }
}

TEST_CASE("w2 metric sanity") {
  const NoiseStream s(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix x = random_points(12, 3, s, 2 * trial), y = random_points(12, 3, s, 2 * trial + 1);
    const EmpiricalMeasure a(x), b(y);
    CHECK(w2_exact(a, b) == doctest::Approx(w2_exact(b, a)).epsilon(1e-12));
    CHECK(w2_exact(a, b) > 0.0);
    Matrix perm = x;
    perm.row(0).swap(perm.row(5));
    CHECK(w2_exact(a, EmpiricalMeasure(perm)) == doctest::Approx(0.0).scale(1));
    const RowVector shift = RowVector::Constant(3, 1.75);
    CHECK(w2_exact(EmpiricalMeasure(x.rowwise() + shift), EmpiricalMeasure(y.rowwise() + shift)) ==
          doctest::Approx(w2_exact(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("cdf integration handles unequal sizes") {
  CHECK(w1_cdf_1d(EmpiricalMeasure(col({0, 1})), EmpiricalMeasure(col({1}))) == doctest::Approx(0.5));
  CHECK(w1_cdf_1d(EmpiricalMeasure(col({0, 2})), EmpiricalMeasure(col({1, 3}))) == doctest::Approx(1.0));
  const NoiseStream s(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = random_points(9, 1, s, 2 * trial), y = random_points(9, 1, s, 2 * trial + 1);
    CHECK(w1_cdf_1d(EmpiricalMeasure(x), EmpiricalMeasure(y)) ==
          doctest::Approx(w1_exact_1d(EmpiricalMeasure(x), EmpiricalMeasure(y))).epsilon(1e-12));
  }
}

TEST_CASE("leave-one-out bound") {
  CHECK(leave_one_out_w1_bound(col({2, 2, 2}), 1) == 0.0);
  CHECK(leave_one_out_w1_bound(col({0, 1}), 0) == doctest::Approx(0.5));
  CHECK(leave_one_out_w1_bound(col({0, 1, 2}), 1) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(leave_one_out_w1_bound(col({1}), 0), Error);

  const NoiseStream s(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + trial % 30;
    const Matrix x = random_points(n, 1, s, trial);
    const Index i = trial % n;
    Matrix rest(n - 1, 1);
    for (Index j = 0, k = 0; j < n; ++j)
      if (j != i) rest(k++, 0) = x(j, 0);
    const double exact = w1_cdf_1d(EmpiricalMeasure(x), EmpiricalMeasure(rest));
    CHECK(exact <= leave_one_out_w1_bound(x, i) + 1e-12);
  }
}

TEST_CASE("concentration check") {
  const EmpiricalMeasure base(col({-1, 1}));
  const ZeroFunctional zero(1);
  const auto flat = concentration_check(zero, {0.0, 0.0}, base, 8, 100, 1);
  CHECK(flat.mse == 0.0);
  CHECK(flat.mse <= flat.bound);

  Vector w(1);
  w << 1.0;
  const LinearFunctional lin(w);
  for (Index n : {4, 16, 64}) {
    const auto r = concentration_check(lin, {1.0, 0.0}, base, n, 2000, 7, 2);
    CHECK(r.bound == doctest::Approx(1.0 / static_cast<double>(n)));
    CHECK(std::abs(r.mse - r.bound) <= 3 * r.std_error);
  }

  // Curie-Weiss with kappa = 0, eps = 1: phi = |mean|^2 / 2. D_m phi is the
  // mean of m', at most max|x| over the support; the M2 integral is Var m.
  const CurieWeissQuadratic cw(0.0, 1.0, 1);
  const EmpiricalMeasure skew(col({-1.0, 0.0, 0.5, 2.5}));
  const double m1 = 2.5, m2 = variance(skew);
  const auto r = concentration_check(cw, {m1, m2}, skew, 16, 1000, 3);
  CHECK(r.mse <= r.bound);

  // Thread count does not change the estimate.
  const auto one = concentration_check(cw, {m1, m2}, skew, 16, 200, 9, 1);
  const auto four = concentration_check(cw, {m1, m2}, skew, 16, 200, 9, 4);
  CHECK(one.mse == four.mse);

  CHECK_THROWS_AS(concentration_check(lin, {1.0, 0.0}, base, 4, 99, 1), Error);
}
