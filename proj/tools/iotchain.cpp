// Command-line front end for the scenario runner.
//
//   iotchain run <scenario> [--seed N] [--audit-log PATH] [--gas-report PATH]
//                           [--gas-report-json PATH] [--store DIR] [--digest-only]
//   iotchain replay <scenario> <audit-log> --store DIR [--seed N]
//   iotchain gas [KIND...] [--usd-per-100k X]
//
// Exit codes: 0 success, 1 failed step or replay divergence, 2 bad input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "iotchain/scenario.hpp"

namespace {

using namespace iotchain;

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string audit_log;
  std::string gas_report;
  std::string gas_report_json;
  std::string store;
  bool digest_only = false;
};

int do_run(const RunArgs& args) {
  auto parsed = scenario::load(args.scenario);
  scenario::RunOptions options;
  options.seed = args.seed;
  if (!args.store.empty()) options.store_directory = args.store;
  scenario::Runner runner(std::move(parsed), options);
  auto result = runner.run();

  if (!args.audit_log.empty()) write_file(args.audit_log, result.audit_log());
  if (!args.gas_report.empty()) write_file(args.gas_report, result.gas.to_text());
  if (!args.gas_report_json.empty()) {
    write_file(args.gas_report_json, result.gas.to_json());
  }

  if (args.digest_only) {
    std::cout << result.digest.hex() << "\n";
  } else {
    std::cout << "scenario:     " << args.scenario << "\n"
              << "seed:         " << runner.seed() << "\n"
              << "steps:        " << runner.scenario().steps.size() << "\n"
              << "transactions: " << result.audit.size() << "\n"
              << "final block:  " << runner.ledger().current_block() << "\n\n"
              << result.gas.to_text() << "\n";
    for (const auto& f : result.failures) {
      std::cout << "FAILED line " << f.line << ": " << f.step << "\n  "
                << f.message << "\n";
    }
    std::cout << "digest: " << result.digest.hex() << "\n";
  }
  for (const auto& f : result.failures) {
    if (args.digest_only) {
      std::cerr << "FAILED line " << f.line << ": " << f.message << "\n";
    }
  }
  return result.ok() ? 0 : 1;
}

int do_replay(const std::string& scenario_path, const std::string& log_path,
              const std::string& store_dir,
              std::optional<std::uint64_t> seed) {
  auto parsed = scenario::load(scenario_path);
  auto log = scenario::parse_audit_log(read_file(log_path));
  ResultStore store(store_dir);
  auto result = scenario::replay(log, parsed.genesis,
                                 seed.value_or(parsed.seed), store);
  for (auto seq : result.divergent_entries) {
    std::cout << "divergent entry " << seq << "\n";
  }
  std::cout << "entries: " << log.size() << "\n"
            << "digest: " << result.digest.hex() << "\n";
  return result.ok() ? 0 : 1;
}

int do_gas(const std::vector<std::string>& kinds, double usd_per_100k) {
  GasSchedule schedule(usd_per_100k);
  std::vector<std::string> names = kinds;
  if (names.empty()) {
    for (auto kind : kAllContractKinds) names.emplace_back(to_string(kind));
  }
  std::printf("%-14s %10s %8s\n", "contract", "gas", "usd");
  for (const auto& name : names) {
    auto cost = schedule.instantiation_cost(name);
    std::printf("%-14s %10llu %8.3f\n", name.c_str(),
                static_cast<unsigned long long>(cost.gas), cost.usd);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iotchain scenario runner"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", run_args.scenario, "scenario file")->required();
  run->add_option("--seed", run_args.seed, "override the scenario seed");
  run->add_option("--audit-log", run_args.audit_log, "write the audit log");
  run->add_option("--gas-report", run_args.gas_report,
                  "write the gas report as a text table");
  run->add_option("--gas-report-json", run_args.gas_report_json,
                  "write the gas report as JSON");
  run->add_option("--store", run_args.store,
                  "directory backing the result store");
  run->add_flag("--digest-only", run_args.digest_only,
                "print only the final state digest");

  std::string replay_scenario, replay_log, replay_store;
  std::optional<std::uint64_t> replay_seed;
  auto* replay = app.add_subcommand("replay", "re-apply an audit log");
  replay->add_option("scenario", replay_scenario, "scenario the log came from")
      ->required();
  replay->add_option("audit-log", replay_log, "audit log")->required();
  replay->add_option("--store", replay_store,
                     "result store directory used by the run")
      ->required();
  replay->add_option("--seed", replay_seed, "override the scenario seed");

  std::vector<std::string> gas_kinds;
  double usd_per_100k = kFittedUsdPer100kGas;
  auto* gas = app.add_subcommand("gas", "print instantiation costs");
  gas->add_option("kind", gas_kinds, "contract kinds (default: all)");
  gas->add_option("--usd-per-100k", usd_per_100k, "price constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(run_args);
    if (*replay) {
      return do_replay(replay_scenario, replay_log, replay_store, replay_seed);
    }
    if (*gas) return do_gas(gas_kinds, usd_per_100k);
  } catch (const scenario::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownKind& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
