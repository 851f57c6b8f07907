#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "kmfl/config.hpp"
#include "kmfl/simulate.hpp"

namespace kmfl {

enum class Experiment : std::uint8_t {
  kPocSweep = 1,
  kMomentumComparison = 2,
  kOracleValidation = 3,
  kCoupling = 4,
  kSingleRun = 5,
};

/// Per-cell seed, injective in (experiment, n_index, run) for a fixed base:
/// base XOR mix64(packed cell id), with mix64 a bijection.
std::uint64_t derive_seed(std::uint64_t base, Experiment experiment, std::uint32_t n_index,
                          std::uint32_t run);

/// Noise step indices at and above this value are reserved for initial draws.
inline constexpr std::uint64_t kInitialDrawStep = std::uint64_t{1} << 63;

/// N particles with x ~ N(0, m0x_std^2 I), v ~ N(0, m0v_std^2 I).
ParticleState sample_initial_state(Index n, Index d, const InitSpec& init, std::uint64_t seed);

struct SweepCell {
  Index n = 0;
  int run = 0;
  std::uint64_t seed = 0;
  ObservableSeries series;  ///< columns loss, kinetic, total
  double tail_average = 0.0;
};

struct FitResult {
  double c_const = 0.0;  ///< C'
  double c_slope = 0.0;  ///< C
  double residual = 0.0; ///< residual sum of squares of the per-N means
};

struct PocSweepResult {
  std::vector<SweepCell> cells;  ///< ordered by (N index, run)
  std::map<Index, std::vector<double>> tail_averages;
  FitResult fit;
};

/// Least squares of the per-N mean tail value against 1/N. Needs at least two
/// distinct N (DegenerateFit otherwise).
FitResult fit_inverse_n(const std::map<Index, std::vector<double>>& tail_averages);

/// Number of tail records averaged for a series of `records` rows.
std::size_t tail_length(const ExperimentConfig& config, std::size_t records);

/// N-sweep of the kinetic dynamics: R runs per N, recording (1/N) F, the
/// kinetic energy per particle and their sum. Cells run concurrently. When
/// config.output_dir is set, every series plus tail_fit.csv are written there.
PocSweepResult run_poc_sweep(const ExperimentConfig& config);

struct MomentumComparison {
  ObservableSeries underdamped;
  ObservableSeries overdamped;
};

/// Kinetic and overdamped runs with N = config.n_list.front() from identical
/// initial positions and independent noise.
MomentumComparison run_momentum_comparison(const ExperimentConfig& config);

struct OracleCheckpoint {
  double time = 0.0;
  double mean_deviation = 0.0;  ///< max over phase coordinates
  double cov_deviation = 0.0;   ///< max over covariance entries
  bool within_tolerance = false;
};

struct OracleRun {
  Index n = 0;
  double mean_tolerance = 0.0;
  double cov_tolerance = 0.0;
  std::vector<OracleCheckpoint> checkpoints;
  double w2_final = 0.0;  ///< subsampled W2^2 at the horizon
  Index w2_sample_size = 0;
  bool passed = false;
};

struct OracleReport {
  std::vector<OracleRun> runs;
  bool passed = false;
};

/// Simulates the Curie-Weiss particle system under normalized params
/// (alpha = gamma = 1, sigma = sqrt 2) for each N and compares phase-space
/// moments against the Gaussian oracle at `spec.checkpoints` equally spaced
/// times. At the horizon, min(N, subsample) particles are compared with an
/// equal-size i.i.d. oracle sample in exact W2^2.
OracleReport run_oracle_validation(const OracleSpec& spec, const DynamicsParams& params,
                                   const std::vector<Index>& n_list, int threads = 1);

struct CouplingReport {
  std::vector<double> times;
  std::vector<double> cost;   ///< E|Z_t - Z'_t|^2, an upper bound on W2^2
  std::vector<double> bound;  ///< Gronwall right-hand side
  double initial_w2 = 0.0;
  bool holds = false;
};

/// Right-hand side of the synchronous-coupling estimate with constant delta:
///   e^{k t + 1} W0 + e^2 t delta^2 (e^{k t} - 1) / k,  k = 2 M_m + 2 M_z.
double coupling_bound(double t, double lip_measure, double lip_space, double delta,
                      double initial_w2);

/// Evolves two first-order particle systems with the two affine drifts and
/// identical noise, recording the coupling cost against the bound.
CouplingReport run_synchronous_coupling(const CouplingSpec& spec, std::uint64_t seed);

/// Writes a series CSV and returns its file name.
std::string write_series(const ObservableSeries& series, const std::filesystem::path& dir,
                         const std::string& name);

/// Writes tail_fit.csv (N, mean, std, c_const, c_slope, residual).
void write_tail_fit(const PocSweepResult& result, const std::filesystem::path& path);

}  // namespace kmfl
