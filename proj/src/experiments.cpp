#include "kmfl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "kmfl/csv.hpp"
#include "kmfl/error.hpp"
#include "kmfl/measures.hpp"

namespace kmfl {
namespace {

// Runs fn(0..count-1) on up to `threads` workers; the first exception wins.
template <typename Fn>
void for_each_cell(std::size_t count, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Rows of `points` at `count` distinct indices drawn without replacement.
Matrix subsample_rows(const Matrix& points, Index count, const NoiseStream& rng) {
  const Index n = points.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index j = 0; j < count; ++j) {
    const auto pick = j + static_cast<Index>(
                              rng.uniform_index(kInitialDrawStep, static_cast<std::uint32_t>(j), 0,
                                                static_cast<std::uint64_t>(n - j)));
    std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick)]);
  }
  Matrix out(count, points.cols());
  for (Index j = 0; j < count; ++j) out.row(j) = points.row(order[static_cast<std::size_t>(j)]);
  return out;
}

Matrix phase_points(const ParticleState& s) {
  Matrix out(s.size(), 2 * s.dimension());
  out.leftCols(s.dimension()) = s.positions;
  out.rightCols(s.dimension()) = s.velocities;
  return out;
}

Matrix apply_drift(const AffineDrift& drift, const Matrix& z) {
  const RowVector mean = z.colwise().mean();
  Matrix out = -drift.rate * z;
  out.rowwise() -= drift.mean_coupling * mean;
  out.array() += drift.offset;
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, Experiment experiment, std::uint32_t n_index,
                          std::uint32_t run) {
  if (n_index >= (1u << 24)) throw Error(ErrorKind::kInvalidParameter, "N index too large for seed packing");
  const std::uint64_t packed = (static_cast<std::uint64_t>(experiment) << 56) |
                               (static_cast<std::uint64_t>(n_index) << 32) | run;
  return base ^ mix64(packed);
}

ParticleState sample_initial_state(Index n, Index d, const InitSpec& init, std::uint64_t seed) {
  const NoiseStream rng(seed);
  Matrix x(n, d), v(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const auto pi = static_cast<std::uint32_t>(i);
      const auto pj = static_cast<std::uint32_t>(j);
      x(i, j) = init.m0x_std * rng.normal(kInitialDrawStep, pi, pj);
      v(i, j) = init.m0v_std * rng.normal(kInitialDrawStep + 1, pi, pj);
    }
  }
  return ParticleState(std::move(x), std::move(v));
}

std::size_t tail_length(const ExperimentConfig& config, std::size_t records) {
  const std::size_t wanted = config.tail_window > 0 ? config.tail_window : records / 10;
  return std::clamp<std::size_t>(wanted, 1, std::max<std::size_t>(records, 1));
}

FitResult fit_inverse_n(const std::map<Index, std::vector<double>>& tail_averages) {
  std::vector<double> x, y;
  for (const auto& [n, values] : tail_averages) {
    if (n < 1 || values.empty()) throw Error(ErrorKind::kDegenerateFit, "empty tail data for some N");
    x.push_back(1.0 / static_cast<double>(n));
    y.push_back(mean_of(values));
  }
  if (x.size() < 2) throw Error(ErrorKind::kDegenerateFit, "need at least two distinct N");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  FitResult fit;
  fit.c_slope = sxy / sxx;
  fit.c_const = my - fit.c_slope * mx;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - fit.c_const - fit.c_slope * x[k];
    fit.residual += r * r;
  }
  return fit;
}

PocSweepResult run_poc_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto functional = make_functional(config.functional);
  const Index dim = functional->dimension();

  PocSweepResult result;
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    for (int run = 0; run < config.repetitions; ++run) {
      SweepCell cell;
      cell.n = config.n_list[ni];
      cell.run = run;
      cell.seed = derive_seed(config.dynamics.seed, Experiment::kPocSweep,
                              static_cast<std::uint32_t>(ni), static_cast<std::uint32_t>(run));
      result.cells.push_back(std::move(cell));
    }
  }

  for_each_cell(result.cells.size(), config.threads, [&](std::size_t k) {
    SweepCell& cell = result.cells[k];
    DynamicsParams params = config.dynamics;
    params.seed = cell.seed;
    const ParticleState initial = sample_initial_state(cell.n, dim, config.init, cell.seed);
    const MeanFieldFunctional& f = *functional;
    const std::vector<Observer> observers{
        energy_observer(f, "loss"),
        kinetic_observer(),
        {"total",
         [&f](const ParticleState& s) {
           return f.value(s.positions) +
                  0.5 * s.velocities.squaredNorm() / static_cast<double>(s.size());
         }},
    };
    try {
      cell.series = simulate(initial, params, f, observers, {config.record_every}).series;
    } catch (const Error& e) {
      throw Error(e.kind(),
                  "N=" + std::to_string(cell.n) + " run=" + std::to_string(cell.run) + ": " + e.what(),
                  e.step());
    }
    const auto total = cell.series.column("total");
    const std::size_t tail = tail_length(config, total.size());
    cell.tail_average =
        std::accumulate(total.end() - static_cast<std::ptrdiff_t>(tail), total.end(), 0.0) /
        static_cast<double>(tail);
  });

  for (const auto& cell : result.cells) result.tail_averages[cell.n].push_back(cell.tail_average);
  if (result.tail_averages.size() >= 2) result.fit = fit_inverse_n(result.tail_averages);

  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    for (const auto& cell : result.cells) {
      write_series(cell.series, dir,
                   "series_N" + std::to_string(cell.n) + "_run" + std::to_string(cell.run) + ".csv");
    }
    if (result.tail_averages.size() >= 2) write_tail_fit(result, dir / "tail_fit.csv");
  }
  return result;
}

MomentumComparison run_momentum_comparison(const ExperimentConfig& config) {
  config.validate();
  const auto functional = make_functional(config.functional);
  const Index n = config.n_list.front();
  const std::uint64_t base = config.dynamics.seed;
  const ParticleState initial =
      sample_initial_state(n, functional->dimension(), config.init,
                           derive_seed(base, Experiment::kMomentumComparison, 0, 2));

  DynamicsParams kinetic = config.dynamics;
  kinetic.seed = derive_seed(base, Experiment::kMomentumComparison, 0, 0);
  DynamicsParams overdamped = config.dynamics;
  overdamped.seed = derive_seed(base, Experiment::kMomentumComparison, 0, 1);

  const MeanFieldFunctional& f = *functional;
  MomentumComparison out;
  out.underdamped = simulate(initial, kinetic, f, {energy_observer(f, "loss"), kinetic_observer()},
                             {config.record_every, Model::kUnderdamped})
                        .series;
  out.overdamped = simulate(initial, overdamped, f, {energy_observer(f, "loss")},
                            {config.record_every, Model::kOverdamped})
                       .series;
  return out;
}

OracleReport run_oracle_validation(const OracleSpec& spec, const DynamicsParams& params,
                                   const std::vector<Index>& n_list, int threads) {
  params.validate();
  constexpr double kTol = 1e-12;
  if (std::abs(params.alpha - 1.0) > kTol || std::abs(params.gamma - 1.0) > kTol ||
      std::abs(params.sigma - std::numbers::sqrt2) > kTol || params.lambda != 0.0) {
    throw Error(ErrorKind::kConfig,
                "oracle validation needs normalized dynamics: alpha = gamma = 1, sigma = sqrt 2, "
                "lambda = 0");
  }
  if (spec.checkpoints < 1) throw Error(ErrorKind::kConfig, "need at least one checkpoint");

  const GaussianMoments law0 = spec.initial_law();
  const CurieWeissQuadratic functional(spec.kappa, spec.eps, spec.dimension);
  const std::uint64_t steps = params.step_count();

  std::vector<std::uint64_t> checkpoint_steps;
  std::vector<double> checkpoint_times;
  for (int k = 1; k <= spec.checkpoints; ++k) {
    const auto s = static_cast<std::uint64_t>(std::llround(static_cast<double>(k) *
                                                           static_cast<double>(steps) /
                                                           spec.checkpoints));
    if (!checkpoint_steps.empty() && s == checkpoint_steps.back()) continue;
    checkpoint_steps.push_back(s);
    checkpoint_times.push_back(static_cast<double>(s) * params.dt);
  }
  const auto oracle = propagate_path(law0, spec.kappa, spec.eps, checkpoint_times, params.dt / 10.0);

  OracleReport report;
  report.passed = true;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const Index n = n_list[ni];
    const std::uint64_t seed =
        derive_seed(params.seed, Experiment::kOracleValidation, static_cast<std::uint32_t>(ni), 0);
    const NoiseStream noise(seed);

    OracleRun run;
    run.n = n;
    run.mean_tolerance = spec.mean_tolerance_factor / std::sqrt(static_cast<double>(n));
    run.cov_tolerance = spec.cov_tolerance_factor / std::sqrt(static_cast<double>(n));
    run.passed = true;

    ParticleState state = sample_gaussian(law0, n, noise, kInitialDrawStep);
    std::size_t next_checkpoint = 0;
    for (std::uint64_t step = 0; step < steps && next_checkpoint < checkpoint_steps.size(); ++step) {
      state = step_underdamped(state, params, functional, noise, step, threads);
      if (step + 1 != checkpoint_steps[next_checkpoint]) continue;
      const GaussianMoments empirical = empirical_moments(state);
      const GaussianMoments& exact = oracle[next_checkpoint];
      OracleCheckpoint cp;
      cp.time = exact.time;
      cp.mean_deviation = (empirical.mean - exact.mean).cwiseAbs().maxCoeff();
      cp.cov_deviation = (empirical.cov - exact.cov).cwiseAbs().maxCoeff();
      cp.within_tolerance =
          cp.mean_deviation <= run.mean_tolerance && cp.cov_deviation <= run.cov_tolerance;
      run.passed = run.passed && cp.within_tolerance;
      run.checkpoints.push_back(cp);
      ++next_checkpoint;
    }

    run.w2_sample_size = std::min(n, spec.subsample);
    const Matrix cloud = subsample_rows(phase_points(state), run.w2_sample_size, noise.derive(1));
    const ParticleState reference =
        sample_gaussian(oracle.back(), run.w2_sample_size, noise.derive(2), kInitialDrawStep);
    run.w2_final = w2_exact(EmpiricalMeasure(cloud), EmpiricalMeasure(phase_points(reference)));

    report.passed = report.passed && run.passed;
    report.runs.push_back(std::move(run));
  }
  return report;
}

double coupling_bound(double t, double lip_measure, double lip_space, double delta,
                      double initial_w2) {
  const double rate = 2.0 * lip_measure + 2.0 * lip_space;
  const double e2 = std::exp(2.0);
  const double integral = rate > 0.0 ? delta * delta * std::expm1(rate * t) / rate : delta * delta * t;
  return std::exp(rate * t + 1.0) * initial_w2 + e2 * t * integral;
}

CouplingReport run_synchronous_coupling(const CouplingSpec& spec, std::uint64_t seed) {
  if (spec.n < 1 || spec.dimension < 1 || !(spec.dt > 0.0) || !(spec.horizon >= spec.dt) ||
      spec.record_every < 1 || !(spec.sigma >= 0.0)) {
    throw Error(ErrorKind::kInvalidParameter, "invalid coupling specification");
  }
  const NoiseStream noise(derive_seed(seed, Experiment::kCoupling, 0, 0));
  Matrix z(spec.n, spec.dimension);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index j = 0; j < spec.dimension; ++j) {
      z(i, j) = spec.init_std * noise.normal(kInitialDrawStep, static_cast<std::uint32_t>(i),
                                             static_cast<std::uint32_t>(j));
    }
  }
  Matrix z_prime = z.array() + spec.init_shift;

  CouplingReport report;
  const double initial_cost = (z - z_prime).squaredNorm() / static_cast<double>(spec.n);
  if (spec.dimension == 1 || spec.n <= kAssignmentLimit) {
    report.initial_w2 = w2_exact(EmpiricalMeasure(z), EmpiricalMeasure(z_prime));
  } else {
    report.initial_w2 = initial_cost;
  }

  auto record = [&](double t) {
    report.times.push_back(t);
    report.cost.push_back((z - z_prime).squaredNorm() / static_cast<double>(spec.n));
    report.bound.push_back(
        coupling_bound(t, spec.lip_measure, spec.lip_space, spec.delta, report.initial_w2));
  };

  DynamicsParams grid;
  grid.dt = spec.dt;
  grid.horizon = spec.horizon;
  const std::uint64_t steps = grid.step_count();
  const double noise_scale = spec.sigma * std::sqrt(spec.dt);

  record(0.0);
  for (std::uint64_t step = 0; step < steps; ++step) {
    const Matrix drift = apply_drift(spec.drift, z);
    const Matrix drift_prime = apply_drift(spec.drift_prime, z_prime);
    z += drift * spec.dt;
    z_prime += drift_prime * spec.dt;
    if (noise_scale != 0.0) {
      for (Index i = 0; i < spec.n; ++i) {
        for (Index j = 0; j < spec.dimension; ++j) {
          const double xi =
              noise.normal(step, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
          z(i, j) += noise_scale * xi;
          z_prime(i, j) += noise_scale * xi;
        }
      }
    }
    if (!z.allFinite() || !z_prime.allFinite()) {
      throw Error(ErrorKind::kNonFinite, "coupled systems blew up", step);
    }
    const std::uint64_t done = step + 1;
    if (done % spec.record_every == 0 || done == steps) record(static_cast<double>(done) * spec.dt);
  }

  report.holds = true;
  for (std::size_t k = 0; k < report.cost.size(); ++k) {
    report.holds = report.holds && report.cost[k] <= report.bound[k] + 1e-14;
  }
  return report;
}

std::string write_series(const ObservableSeries& series, const std::filesystem::path& dir,
                         const std::string& name) {
  series.write_csv(dir / name);
  return name;
}

void write_tail_fit(const PocSweepResult& result, const std::filesystem::path& path) {
  CsvTable table;
  table.header = {"N", "mean", "std", "c_const", "c_slope", "residual"};
  for (const auto& [n, values] : result.tail_averages) {
    table.rows.push_back({static_cast<double>(n), mean_of(values), sample_std(values),
                          result.fit.c_const, result.fit.c_slope, result.fit.residual});
  }
  write_csv(table, path);
}

}  // namespace kmfl
