// Scenario runner for the entanglement-coordinated swarm simulator.
//
//   qswarm run <config.json>                 execute one scenario
//   qswarm sweep <config.json> --grid f=a,b --seeds 1,2
//   qswarm verify                            run the built-in invariant suite

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qswarm/runner.hpp"
#include "qswarm/scenario.hpp"
#include "qswarm/verify.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::pair<std::string, std::vector<std::string>> parse_grid_spec(
    const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size()) {
    throw std::runtime_error("grid spec must look like field=v1,v2,... : " + spec);
  }
  const std::string field = spec.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(item);
  }
  if (values.empty()) {
    throw std::runtime_error("grid spec has no values: " + spec);
  }
  return {field, values};
}

std::vector<std::uint64_t> parse_seed_list(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  return seeds;
}

int do_run(const std::string& config_path) {
  const qswarm::Scenario scenario = qswarm::parse_scenario(read_file(config_path));
  const qswarm::RunResult result = qswarm::run_scenario(scenario);
  const qswarm::OutputPaths paths = qswarm::write_outputs(result);
  std::cout << "trace: " << paths.trace.string() << "\n"
            << "stats: " << paths.stats.string() << "\n";
  return 0;
}

int do_sweep(const std::string& config_path,
             const std::vector<std::string>& grid_specs,
             const std::string& seed_list) {
  const qswarm::Scenario base = qswarm::parse_scenario(read_file(config_path));
  qswarm::SweepSpec spec;
  for (const std::string& g : grid_specs) {
    spec.fields.push_back(parse_grid_spec(g));
  }
  spec.seeds = parse_seed_list(seed_list);
  const qswarm::Json rows = qswarm::run_sweep(base, spec);

  const std::filesystem::path dir = qswarm::resolve_output_directory(base);
  std::filesystem::create_directories(dir);
  const std::filesystem::path out = dir / (base.name + ".sweep.json");
  qswarm::write_file_atomic(out, rows.dump(2) + "\n");
  std::cout << "sweep: " << out.string() << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entanglement-coordinated swarm simulator"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario config");
  run_cmd->add_option("config", run_config, "scenario config file (JSON)")
      ->required();

  std::string sweep_config, sweep_seeds;
  std::vector<std::string> sweep_grids;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run a scenario over a parameter grid");
  sweep_cmd->add_option("config", sweep_config, "base scenario config file")
      ->required();
  sweep_cmd
      ->add_option("--grid", sweep_grids,
                   "grid spec field=v1,v2,... (repeatable)")
      ->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seed list")
      ->required();

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the built-in invariant suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return do_run(run_config);
    }
    if (sweep_cmd->parsed()) {
      return do_sweep(sweep_config, sweep_grids, sweep_seeds);
    }
    if (verify_cmd->parsed()) {
      return qswarm::run_builtin_verification(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
