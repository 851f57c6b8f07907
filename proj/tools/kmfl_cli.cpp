// Command-line front end for the kinetic mean-field Langevin experiments.
//
// Exit codes: 0 success, 1 validation failure (or a failed run), 2 config error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kmfl/config.hpp"
#include "kmfl/csv.hpp"
#include "kmfl/error.hpp"
#include "kmfl/experiments.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

kmfl::ExperimentConfig prepare(const CommonArgs& args) {
  if (!std::filesystem::exists(args.config)) {
    throw kmfl::Error(kmfl::ErrorKind::kConfig, "config file not found: " + args.config);
  }
  kmfl::ExperimentConfig config = kmfl::load_config(args.config);
  if (args.seed) {
    config.dynamics.seed = *args.seed;
    config.functional.dataset.seed = *args.seed;
    config.source["seed"] = *args.seed;
  }
  if (!args.out.empty()) config.output_dir = args.out;
  if (config.output_dir.empty()) config.output_dir = "out";
  std::filesystem::create_directories(config.output_dir);
  return config;
}

int cmd_simulate(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto functional = kmfl::make_functional(config.functional);
  kmfl::DynamicsParams params = config.dynamics;
  params.seed = kmfl::derive_seed(config.dynamics.seed, kmfl::Experiment::kSingleRun, 0, 0);
  const auto initial = kmfl::sample_initial_state(config.n_list.front(), functional->dimension(),
                                                  config.init, params.seed);
  const auto result = kmfl::simulate(
      initial, params, *functional,
      {kmfl::energy_observer(*functional, "loss"), kmfl::kinetic_observer()},
      {config.record_every});
  const auto name = kmfl::write_series(result.series, config.output_dir, "series.csv");
  kmfl::write_manifest(config.output_dir, "simulate", config, {name});
  std::cout << "wrote " << result.series.size() << " records to "
            << (std::filesystem::path(config.output_dir) / name).string() << '\n';
  return 0;
}

int cmd_poc_sweep(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto result = kmfl::run_poc_sweep(config);
  std::vector<std::string> outputs;
  for (const auto& cell : result.cells) {
    outputs.push_back("series_N" + std::to_string(cell.n) + "_run" + std::to_string(cell.run) + ".csv");
  }
  if (result.tail_averages.size() >= 2) outputs.push_back("tail_fit.csv");
  kmfl::write_manifest(config.output_dir, "poc-sweep", config, outputs);
  for (const auto& [n, values] : result.tail_averages) {
    double mean = 0.0;
    for (double v : values) mean += v;
    std::cout << "N=" << n << " tail mean " << mean / static_cast<double>(values.size()) << '\n';
  }
  std::cout << "fit C'=" << result.fit.c_const << " C=" << result.fit.c_slope
            << " rss=" << result.fit.residual << '\n';
  return 0;
}

int cmd_compare_momentum(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto result = kmfl::run_momentum_comparison(config);
  const auto a = kmfl::write_series(result.underdamped, config.output_dir, "underdamped.csv");
  const auto b = kmfl::write_series(result.overdamped, config.output_dir, "overdamped.csv");
  kmfl::write_manifest(config.output_dir, "compare-momentum", config, {a, b});
  std::cout << "final loss: underdamped " << result.underdamped.column("loss").back()
            << ", overdamped " << result.overdamped.column("loss").back() << '\n';
  return 0;
}

int cmd_validate_oracle(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto report =
      kmfl::run_oracle_validation(config.oracle, config.dynamics, config.n_list, 1);
  kmfl::CsvTable table;
  table.header = {"N", "t", "mean_deviation", "cov_deviation", "mean_tolerance",
                  "cov_tolerance", "within_tolerance"};
  kmfl::CsvTable w2;
  w2.header = {"N", "sample_size", "w2_squared"};
  for (const auto& run : report.runs) {
    for (const auto& cp : run.checkpoints) {
      table.rows.push_back({static_cast<double>(run.n), cp.time, cp.mean_deviation,
                            cp.cov_deviation, run.mean_tolerance, run.cov_tolerance,
                            cp.within_tolerance ? 1.0 : 0.0});
    }
    w2.rows.push_back({static_cast<double>(run.n), static_cast<double>(run.w2_sample_size),
                       run.w2_final});
    std::cout << "N=" << run.n << (run.passed ? " ok" : " FAILED") << " W2^2=" << run.w2_final
              << '\n';
  }
  const std::filesystem::path dir(config.output_dir);
  kmfl::write_csv(table, dir / "oracle_checkpoints.csv");
  kmfl::write_csv(w2, dir / "oracle_w2.csv");
  kmfl::write_manifest(dir, "validate-oracle", config, {"oracle_checkpoints.csv", "oracle_w2.csv"});
  return report.passed ? 0 : kExitValidation;
}

int cmd_coupling_check(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto report = kmfl::run_synchronous_coupling(config.coupling, config.dynamics.seed);
  kmfl::CsvTable table;
  // coupling_cost = E|Z - Z'|^2 under the synchronous coupling (>= W2^2).
  table.header = {"t", "coupling_cost", "bound"};
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    table.rows.push_back({report.times[k], report.cost[k], report.bound[k]});
  }
  const std::filesystem::path dir(config.output_dir);
  kmfl::write_csv(table, dir / "coupling.csv");
  kmfl::write_manifest(dir, "coupling-check", config, {"coupling.csv"});
  std::cout << (report.holds ? "coupling bound holds" : "coupling bound VIOLATED") << '\n';
  return report.holds ? 0 : kExitValidation;
}

int cmd_parse_mnist(const CommonArgs& args) {
  const auto config = prepare(args);
  const auto& m = config.mnist;
  if (m.images.empty() || m.labels.empty()) {
    throw kmfl::Error(kmfl::ErrorKind::kConfig, "mnist.images and mnist.labels are required");
  }
  const auto data = kmfl::load_mnist_binary(m.images, m.labels, m.class_a, m.class_b, m.max_k,
                                            config.dynamics.seed);
  const std::filesystem::path dir(config.output_dir);
  kmfl::write_dataset_csv(data, dir / "dataset.csv");
  kmfl::write_manifest(dir, "parse-mnist", config, {"dataset.csv"});
  std::cout << "kept " << data.size() << " samples of classes " << m.class_a << "/" << m.class_b
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic mean-field Langevin particle simulator and experiment harness"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const CommonArgs&);
  };
  const std::vector<Command> commands{
      {"simulate", "Single kinetic run; writes series.csv", cmd_simulate},
      {"poc-sweep", "N-sweep with C' + C/N fit of tail averages", cmd_poc_sweep},
      {"compare-momentum", "Underdamped vs overdamped training loss", cmd_compare_momentum},
      {"validate-oracle", "Curie-Weiss particles vs Gaussian oracle", cmd_validate_oracle},
      {"coupling-check", "Synchronous coupling vs Gronwall bound", cmd_coupling_check},
      {"parse-mnist", "Filter MNIST IDX files to a two-class CSV", cmd_parse_mnist},
  };

  CommonArgs args;
  std::uint64_t seed = 0;
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", args.config, "Config file (JSON)")->required();
    sub->add_option("--out", args.out, "Output directory (overrides config)");
    sub->add_option("--seed", seed, "Base seed (overrides config)");
    subs.emplace_back(sub, &c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (const auto& [sub, command] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) args.seed = seed;
    try {
      return command->run(args);
    } catch (const kmfl::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return e.kind() == kmfl::ErrorKind::kConfig ? kExitConfig : kExitValidation;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitValidation;
    }
  }
  return kExitConfig;
}
