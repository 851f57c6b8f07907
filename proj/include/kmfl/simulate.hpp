#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "kmfl/dynamics.hpp"

namespace kmfl {

/// Named scalar diagnostic of a particle state.
struct Observer {
  std::string name;
  std::function<double(const ParticleState&)> fn;
};

/// Time-indexed records of named scalar observables.
class ObservableSeries {
 public:
  ObservableSeries() = default;
  explicit ObservableSeries(std::vector<std::string> names) : names_(std::move(names)) {}

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }

  void append(double t, std::vector<double> values);

  /// Column of values for `name`; throws InvalidParameter if absent.
  std::vector<double> column(const std::string& name) const;
  const std::vector<double>& row(std::size_t k) const { return rows_[k]; }

  /// Header `t,<name1>,...`, one row per record, round-trip precision.
  void write_csv(const std::filesystem::path& path) const;
  static ObservableSeries read_csv(const std::filesystem::path& path);

  bool operator==(const ObservableSeries&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<std::vector<double>> rows_;
};

enum class Model { kUnderdamped, kOverdamped };

struct SimulationOptions {
  std::uint64_t record_every = 1;
  Model model = Model::kUnderdamped;
  int threads = 1;
};

struct SimulationResult {
  ObservableSeries series;
  ParticleState final_state;
};

/// Runs params.step_count() steps from `initial`, evaluating every observer at
/// t = 0, every `record_every` steps and at the final step. Step errors are
/// rethrown with the failing step index. In overdamped mode velocities are
/// carried unchanged and ignored by the dynamics.
SimulationResult simulate(const ParticleState& initial, const DynamicsParams& params,
                          const MeanFieldFunctional& functional,
                          const std::vector<Observer>& observers,
                          const SimulationOptions& options = {});

/// (1/N) * 1/2 sum_i |v_i|^2.
Observer kinetic_observer();
/// F(mu_x) for the given functional; the functional must outlive the observer.
Observer energy_observer(const MeanFieldFunctional& functional, std::string name = "loss");

}  // namespace kmfl
