#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

#include "kmfl/error.hpp"
#include "kmfl/gaussian.hpp"
#include "kmfl/noise.hpp"

using namespace kmfl;

namespace {

GaussianMoments law(std::initializer_list<double> mean, const DenseMatrix& cov) {
  Vector m(static_cast<Index>(mean.size()));
  Index k = 0;
  for (double v : mean) m(k++) = v;
  return {m, cov, 0.0};
}

DenseMatrix diag2(double a, double b) {
  DenseMatrix m = DenseMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

GaussianMoments random_law(Index n, const NoiseStream& s, std::uint64_t step) {
  DenseMatrix b(n, n);
  Vector m(n);
  for (Index i = 0; i < n; ++i) {
    m(i) = 2.0 * s.normal(step, 0, static_cast<std::uint32_t>(i));
    for (Index j = 0; j < n; ++j)
      b(i, j) = s.normal(step, 1 + static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  }
  DenseMatrix cov = b * b.transpose() / static_cast<double>(n) + 0.2 * DenseMatrix::Identity(n, n);
  return {m, cov, 0.0};
}

// Plain density and score on R^2, written out independently of the library.
struct Density2 {
  Eigen::Vector2d mu;
  Eigen::Matrix2d prec;
  double log_norm;

  explicit Density2(const GaussianMoments& g)
      : mu(g.mean), prec(Eigen::Matrix2d(g.cov).inverse()),
        log_norm(-std::log(2 * std::numbers::pi) - 0.5 * std::log(Eigen::Matrix2d(g.cov).determinant())) {}

  double log_pdf(const Eigen::Vector2d& z) const {
    const Eigen::Vector2d r = z - mu;
    return log_norm - 0.5 * r.dot(prec * r);
  }
  Eigen::Vector2d score(const Eigen::Vector2d& z) const { return -prec * (z - mu); }
};

// Integral of f against the density a over a box of +-12 standard deviations.
template <typename F>
double integrate(const GaussianMoments& a, F f) {
  using boost::math::quadrature::gauss_kronrod;
  const double sx = std::sqrt(a.cov(0, 0)), sv = std::sqrt(a.cov(1, 1));
  const double x0 = a.mean(0), v0 = a.mean(1);
  auto inner = [&](double x) {
    return gauss_kronrod<double, 61>::integrate(
        [&](double v) { return f(Eigen::Vector2d(x, v)); }, v0 - 12 * sv, v0 + 12 * sv, 15, 1e-13);
  };
  return gauss_kronrod<double, 61>::integrate(inner, x0 - 12 * sx, x0 + 12 * sx, 15, 1e-13);
}

// Exact moments of the linear mean-field dynamics: the mean by a matrix
// exponential, the covariance by Van Loan's block exponential.
GaussianMoments exact_moments(const GaussianMoments& init, double kappa, double eps, double t) {
  const Index d = init.dimension(), n = 2 * d;
  const DenseMatrix I = DenseMatrix::Identity(d, d);
  DenseMatrix am = DenseMatrix::Zero(n, n), a = DenseMatrix::Zero(n, n), q = DenseMatrix::Zero(n, n);
  am.topRightCorner(d, d) = I;
  am.bottomLeftCorner(d, d) = -(kappa + eps) * I;
  am.bottomRightCorner(d, d) = -I;
  a = am;
  a.bottomLeftCorner(d, d) = -kappa * I;
  q.bottomRightCorner(d, d) = 2 * I;

  DenseMatrix block = DenseMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a * t;
  block.topRightCorner(n, n) = q * t;
  block.bottomRightCorner(n, n) = a.transpose() * t;
  const DenseMatrix e = block.exp();
  const DenseMatrix phi_t = e.bottomRightCorner(n, n);  // exp(A^T t)
  const DenseMatrix integral = phi_t.transpose() * e.topRightCorner(n, n);
  const DenseMatrix phi = phi_t.transpose();

  GaussianMoments out;
  out.mean = (am * t).exp() * init.mean;
  out.cov = phi * init.cov * phi.transpose() + integral;
  out.time = init.time + t;
  return out;
}

}  // namespace

TEST_CASE("stationary law is preserved") {
  for (double kappa : {1.0, 0.3, 2.5}) {
    const auto inv = invariant_moments(kappa, 0.5, 2);
    const auto out = propagate_moments(inv, kappa, 0.5, 5.0, 1e-3);
    CHECK((out.mean - inv.mean).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((out.cov - inv.cov).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(out.time == doctest::Approx(5.0));
  }
  const auto inv = invariant_moments(1.0, 0.0, 1);
  CHECK(inv.cov.isApprox(DenseMatrix::Identity(2, 2)));
}

TEST_CASE("propagation matches the matrix exponential solution") {
  const NoiseStream s(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 1 + trial % 2;
    const double kappa = 0.2 + 0.3 * trial, eps = 0.1 * (trial % 4);
    const auto init = random_law(2 * d, s, trial);
    const double t = 0.5 + 0.4 * trial;
    const auto got = propagate_moments(init, kappa, eps, t, 1e-3);
    const auto want = exact_moments(init, kappa, eps, t);
    CHECK((got.mean - want.mean).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((got.cov - want.cov).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("long horizon relaxes to the invariant law") {
  const auto init = law({3.0, -1.0}, diag2(4.0, 0.25));
  const auto out = propagate_moments(init, 1.0, 0.0, 70.0, 1e-2);
  CHECK(out.mean.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((out.cov - DenseMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("zero horizon is the identity") {
  const auto init = law({0.3, 0.1}, diag2(2.0, 0.5));
  const auto out = propagate_moments(init, 1.0, 0.5, 0.0, 1e-3);
  CHECK(out.mean == init.mean);
  CHECK(out.cov == init.cov);
}

TEST_CASE("path sampling agrees with one-shot propagation") {
  const auto init = law({1.0, -0.5}, DenseMatrix::Identity(2, 2));
  const std::vector<double> times{0.0, 0.5, 1.25, 3.0};
  const auto path = propagate_path(init, 1.0, 0.5, times, 1e-3);
  REQUIRE(path.size() == times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto one = exact_moments(init, 1.0, 0.5, times[k]);
    CHECK((path[k].mean - one.mean).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((path[k].cov - one.cov).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("relative entropy examples") {
  const DenseMatrix I = DenseMatrix::Identity(2, 2);
  CHECK(gaussian_relative_entropy(law({0, 0}, I), law({0, 0}, I)) == 0.0);
  CHECK(gaussian_relative_entropy(law({0, 0}, I), law({1, 0}, I)) == doctest::Approx(0.5));
  const auto a = law({0, 0}, 2 * I), b = law({0, 0}, I);
  CHECK(gaussian_relative_entropy(a, b) == doctest::Approx(1 - std::log(2.0)).epsilon(1e-14));
  const Density2 pa(a), pb(b);
  const double quad = integrate(a, [&](const Eigen::Vector2d& z) {
    return std::exp(pa.log_pdf(z)) * (pa.log_pdf(z) - pb.log_pdf(z));
  });
  CHECK(quad == doctest::Approx(1 - std::log(2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(gaussian_relative_entropy(law({0, 0}, I), invariant_moments(1, 0, 2)), Error);
}

TEST_CASE("fisher information examples") {
  const DenseMatrix I = DenseMatrix::Identity(2, 2);
  CHECK(gaussian_relative_fisher(law({0, 0}, I), law({0, 0}, I)) == 0.0);
  CHECK(gaussian_relative_fisher(law({0, 0}, I), law({1, 0}, I)) == doctest::Approx(1.0));
}

TEST_CASE("closed forms agree with quadrature in one dimension") {
  const NoiseStream s(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_law(2, s, 10 + trial);
    const auto b = random_law(2, s, 100 + trial);
    const Density2 pa(a), pb(b);
    const auto pdf = [&](const Eigen::Vector2d& z) { return std::exp(pa.log_pdf(z)); };

    const double kl = integrate(a, [&](const Eigen::Vector2d& z) {
      return pdf(z) * (pa.log_pdf(z) - pb.log_pdf(z));
    });
    CHECK(gaussian_relative_entropy(a, b) == doctest::Approx(kl).epsilon(1e-8));

    const double fisher = integrate(a, [&](const Eigen::Vector2d& z) {
      return pdf(z) * (pa.score(z) - pb.score(z)).squaredNorm();
    });
    CHECK(gaussian_relative_fisher(a, b) == doctest::Approx(fisher).epsilon(1e-8));

    const double ent = integrate(a, [&](const Eigen::Vector2d& z) { return pdf(z) * pa.log_pdf(z); });
    CHECK(gaussian_entropy(a) == doctest::Approx(ent).epsilon(1e-8));

    const HypocoerciveCoefficients c{1.5, 0.4 - 0.2 * trial, 0.7};
    const double hyp = integrate(a, [&](const Eigen::Vector2d& z) {
      const Eigen::Vector2d sc = pa.score(z) - pb.score(z);
      return pdf(z) * (c.a * sc(1) * sc(1) + 2 * c.b * sc(1) * sc(0) + c.c * sc(0) * sc(0));
    });
    CHECK(hypocoercive_functional(a, c, b) == doctest::Approx(hyp).epsilon(1e-8));
  }
}

TEST_CASE("hypocoercive functional") {
  const NoiseStream s(5);
  const auto a = random_law(4, s, 1), ref = invariant_moments(0.7, 0.2, 2);
  CHECK(hypocoercive_functional(ref, {1, 0.3, 1}, ref) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(hypocoercive_functional(a, {1, 0, 1}, ref) ==
        doctest::Approx(gaussian_relative_fisher(a, ref)).epsilon(1e-12));
  CHECK_THROWS_AS(hypocoercive_functional(a, {1, 1, 1}, ref), Error);
  CHECK_THROWS_AS(hypocoercive_functional(a, {0, 0, 1}, ref), Error);
  try {
    hypocoercive_functional(a, {1, 2, 1}, ref);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIndefiniteCoefficients);
  }
}

TEST_CASE("bures-wasserstein examples") {
  const DenseMatrix I = DenseMatrix::Identity(2, 2);
  CHECK(gaussian_w2(law({0, 0}, I), law({0, 0}, I)) == doctest::Approx(0.0).scale(1));
  CHECK(gaussian_w2(law({0, 0}, I), law({3, 4}, I)) == doctest::Approx(25.0));
  const GaussianMoments a{Vector::Zero(2), diag2(4, 4), 0}, b{Vector::Zero(2), I, 0};
  CHECK(gaussian_w2(a, b) == doctest::Approx(2.0));  // (2 - 1)^2 in each of two coordinates

  // Symmetry and agreement with the commuting-case formula.
  const NoiseStream s(2);
  const auto p = random_law(4, s, 7), q = random_law(4, s, 8);
  CHECK(gaussian_w2(p, q) == doctest::Approx(gaussian_w2(q, p)).epsilon(1e-10));
  const DenseMatrix d1 = diag2(2.0, 5.0), d2 = diag2(0.5, 3.0);
  const double want = std::pow(std::sqrt(2.0) - std::sqrt(0.5), 2) + std::pow(std::sqrt(5.0) - std::sqrt(3.0), 2);
  CHECK(gaussian_w2(GaussianMoments{Vector::Zero(2), d1, 0}, GaussianMoments{Vector::Zero(2), d2, 0}) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("free energy gap") {
  const double kappa = 0.8, eps = 0.4;
  const auto inv = invariant_moments(kappa, eps, 2);
  CHECK(free_energy_gap(inv, kappa, eps) == doctest::Approx(0.0).scale(1));

  const NoiseStream s(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_law(4, s, trial);
    CHECK(free_energy_gap(a, kappa, eps) >= gaussian_relative_entropy(a, inv) - 1e-10);
  }

  const auto init = law({2.0, 1.0}, diag2(3.0, 0.2));
  std::vector<double> times;
  for (int k = 0; k < 20; ++k) times.push_back(0.5 * k);
  const auto path = propagate_path(init, 1.0, 0.5, times, 1e-3);
  for (std::size_t k = 1; k < path.size(); ++k) {
    CHECK(free_energy_gap(path[k], 1.0, 0.5) <= free_energy_gap(path[k - 1], 1.0, 0.5) + 1e-12);
  }
}

TEST_CASE("talagrand inequality for the invariant law") {
  const NoiseStream s(10);
  for (double kappa : {0.3, 1.0, 2.0}) {
    const auto inv = invariant_moments(kappa, 0.0, 1);
    const double rho = curie_weiss_lsi_constant(kappa);
    CHECK(rho == doctest::Approx(std::min(kappa / 2, 0.5)));
    for (int trial = 0; trial < 200; ++trial) {
      const auto a = random_law(2, s, 1000 * static_cast<std::uint64_t>(kappa * 10) + trial);
      CHECK(rho * gaussian_w2(a, inv) <= gaussian_relative_entropy(a, inv) + 1e-10);
    }
  }
  // A pure shift of the x-marginal saturates the inequality above, so the
  // doubled constant cannot hold.
  const auto inv = invariant_moments(1.0, 0.0, 1);
  auto shifted = inv;
  shifted.mean(0) = 1.0;
  const double h = gaussian_relative_entropy(shifted, inv), w = gaussian_w2(shifted, inv);
  CHECK(curie_weiss_lsi_constant(1.0) * w == doctest::Approx(h));
  CHECK(2 * std::min(1.0, 0.5) * w > h);
}

TEST_CASE("psd square root") {
  const NoiseStream s(4);
  const auto a = random_law(5, s, 3);
  const DenseMatrix r = psd_sqrt(a.cov);
  CHECK((r * r - a.cov).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_NOTHROW(psd_sqrt(diag2(1.0, -1e-10)));
  CHECK_THROWS_AS(psd_sqrt(diag2(1.0, -1e-6)), Error);
}

TEST_CASE("moments validation") {
  CHECK_THROWS_AS(law({0, 0}, diag2(1.0, -1.0)).validate(), Error);
  DenseMatrix asym = DenseMatrix::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(law({0, 0}, asym).validate(), Error);
  CHECK_THROWS_AS(law({0, 0, 0}, DenseMatrix::Identity(3, 3)).validate(), Error);
}

TEST_CASE("sampling reproduces the law within sampling error") {
  const NoiseStream s(1);
  const auto target = random_law(4, s, 2);
  const Index n = 20000;
  const auto cloud = sample_gaussian(target, n, NoiseStream(55), 0);
  const auto m = empirical_moments(cloud);
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(m.mean(i) - target.mean(i)) <= 5 * std::sqrt(target.cov(i, i) / n));
    for (Index j = 0; j < 4; ++j) {
      // Wishart variance of a sample covariance entry.
      const double sd = std::sqrt((target.cov(i, i) * target.cov(j, j) + target.cov(i, j) * target.cov(i, j)) / n);
      CHECK(std::abs(m.cov(i, j) - target.cov(i, j)) <= 5 * sd);
    }
  }
}
