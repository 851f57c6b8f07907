#include "kmfl/simulate.hpp"

#include <algorithm>

#include "kmfl/csv.hpp"
#include "kmfl/error.hpp"

namespace kmfl {

void ObservableSeries::append(double t, std::vector<double> values) {
  if (values.size() != names_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "observable row width does not match names");
  }
  times_.push_back(t);
  rows_.push_back(std::move(values));
}

std::vector<double> ObservableSeries::column(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw Error(ErrorKind::kInvalidParameter, "no observable named " + name);
  const auto j = static_cast<std::size_t>(it - names_.begin());
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[j]);
  return out;
}

void ObservableSeries::write_csv(const std::filesystem::path& path) const {
  CsvTable table;
  table.header.push_back("t");
  table.header.insert(table.header.end(), names_.begin(), names_.end());
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    std::vector<double> row{times_[k]};
    row.insert(row.end(), rows_[k].begin(), rows_[k].end());
    table.rows.push_back(std::move(row));
  }
  kmfl::write_csv(table, path);
}

ObservableSeries ObservableSeries::read_csv(const std::filesystem::path& path) {
  const CsvTable table = kmfl::read_csv(path);
  if (table.header.empty() || table.header.front() != "t") {
    throw Error(ErrorKind::kIo, path.string() + ": first column must be t");
  }
  ObservableSeries series(std::vector<std::string>(table.header.begin() + 1, table.header.end()));
  for (const auto& row : table.rows) {
    series.append(row.front(), std::vector<double>(row.begin() + 1, row.end()));
  }
  return series;
}

SimulationResult simulate(const ParticleState& initial, const DynamicsParams& params,
                          const MeanFieldFunctional& functional,
                          const std::vector<Observer>& observers,
                          const SimulationOptions& options) {
  params.validate();
  initial.validate();
  if (options.record_every < 1) throw Error(ErrorKind::kInvalidParameter, "record_every must be >= 1");

  std::vector<std::string> names;
  names.reserve(observers.size());
  for (const auto& o : observers) names.push_back(o.name);
  SimulationResult result{ObservableSeries(std::move(names)), initial};

  auto record = [&](const ParticleState& s) {
    std::vector<double> values;
    values.reserve(observers.size());
    for (const auto& o : observers) values.push_back(o.fn(s));
    result.series.append(s.time, std::move(values));
  };

  const NoiseStream noise(params.seed);
  const std::uint64_t steps = params.step_count();
  ParticleState& state = result.final_state;
  record(state);
  for (std::uint64_t step = 0; step < steps; ++step) {
    try {
      if (options.model == Model::kUnderdamped) {
        state = step_underdamped(state, params, functional, noise, step, options.threads);
      } else {
        state.positions =
            step_overdamped(state.positions, params, functional, noise, step, options.threads);
        state.time += params.dt;
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNonFinite) throw;
      throw Error(e.kind(), std::string(e.what()) + " (at step " + std::to_string(step) + ")", step);
    }
    const std::uint64_t done = step + 1;
    if (done % options.record_every == 0 || done == steps) record(state);
  }
  return result;
}

Observer kinetic_observer() {
  return {"kinetic", [](const ParticleState& s) {
            return 0.5 * s.velocities.squaredNorm() / static_cast<double>(s.size());
          }};
}

Observer energy_observer(const MeanFieldFunctional& functional, std::string name) {
  return {std::move(name), [&functional](const ParticleState& s) { return functional.value(s.positions); }};
}

}  // namespace kmfl
