#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmfl/dataset.hpp"
#include "kmfl/dynamics.hpp"
#include "kmfl/functional.hpp"
#include "kmfl/gaussian.hpp"

namespace kmfl {

/// Library version string, "<semver>+<git revision>".
const char* version();

struct DatasetSpec {
  std::string source = "synthetic";  ///< "synthetic" or "mnist"
  std::size_t k = 500;               ///< synthetic size, or max_k for MNIST
  std::size_t d_in = 16;             ///< synthetic only
  std::string images;                ///< MNIST image file (raw or gzip)
  std::string labels;                ///< MNIST label file (raw or gzip)
  int class_a = 4;
  int class_b = 6;
  std::uint64_t seed = 0;
};

struct FunctionalSpec {
  std::string kind = "two_layer_net";  ///< "two_layer_net", "curie_weiss" or "zero"
  double threshold = 500.0;            ///< L
  double kappa = 1.0;
  double eps = 0.0;
  Index dimension = 1;                 ///< curie_weiss / zero
  DatasetSpec dataset;
};

struct InitSpec {
  double m0x_std = 0.1;
  double m0v_std = 0.5;
};

/// Particle-vs-oracle validation settings (normalized Curie-Weiss dynamics).
struct OracleSpec {
  double kappa = 1.0;
  double eps = 0.5;
  Index dimension = 1;
  int checkpoints = 10;
  Index subsample = kDefaultSubsample;
  std::vector<double> init_mean;               ///< empty -> displaced default
  std::vector<std::vector<double>> init_cov;   ///< empty -> identity
  double mean_tolerance_factor = 5.0;          ///< mean tolerance = factor / sqrt(N)
  double cov_tolerance_factor = 10.0;          ///< covariance tolerance = factor / sqrt(N)

  static constexpr Index kDefaultSubsample = 512;

  GaussianMoments initial_law() const;
};

/// beta(m, z) = -rate z - mean_coupling mean(m) + offset (componentwise).
struct AffineDrift {
  double rate = 1.0;
  double mean_coupling = 0.0;
  double offset = 0.0;
};

/// Synchronous-coupling check for first-order dynamics dZ = beta dt + sigma dW.
struct CouplingSpec {
  Index n = 1000;
  Index dimension = 1;
  double horizon = 1.0;
  double dt = 1e-3;
  double sigma = 1.0;
  AffineDrift drift;
  AffineDrift drift_prime;
  double lip_measure = 0.0;  ///< M_m
  double lip_space = 1.0;    ///< M_z
  double delta = 0.0;        ///< constant delta_t
  double init_std = 1.0;
  double init_shift = 0.0;   ///< Z'_0 = Z_0 + init_shift (each coordinate)
  std::uint64_t record_every = 10;
};

struct MnistSpec {
  std::string images;
  std::string labels;
  int class_a = 4;
  int class_b = 6;
  std::size_t max_k = 10000;
};

/// Everything an experiment run needs. Parsed from a JSON document whose keys
/// follow the hyperparameter names N, dt, T, m0x_std, m0v_std, L, lambda,
/// alpha, gamma, sigma (see README for the schema).
struct ExperimentConfig {
  FunctionalSpec functional;
  DynamicsParams dynamics;
  std::vector<Index> n_list{16};
  int repetitions = 1;
  std::size_t tail_window = 0;  ///< records; 0 -> last 10% of records
  InitSpec init;
  std::string output_dir;
  std::uint64_t record_every = 1;
  int threads = 0;  ///< concurrent cells; 0 -> hardware concurrency
  OracleSpec oracle;
  CouplingSpec coupling;
  MnistSpec mnist;
  nlohmann::json source;  ///< the document as read, echoed into manifests

  /// Throws Error(Config) on violated invariants.
  void validate() const;
};

/// Parses and validates; every problem is reported as Error(Config).
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the functional described by `spec` (loads datasets as needed).
std::shared_ptr<const MeanFieldFunctional> make_functional(const FunctionalSpec& spec);

/// Loads and filters an MNIST pair into a two-class dataset.
Dataset load_mnist_binary(const std::string& images, const std::string& labels, int class_a,
                          int class_b, std::size_t max_k, std::uint64_t seed);

/// Writes `manifest.json` (command, config echo, seed, version, outputs).
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const ExperimentConfig& config, const std::vector<std::string>& outputs);

}  // namespace kmfl
