#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iotchain/device_agent.hpp"
#include "iotchain/ledger.hpp"
#include "iotchain/result_store.hpp"

// Scenario runner: a line-oriented script of actions executed against a
// fresh ledger, producing an audit log, a gas report and a state digest.
// The grammar is documented in docs/scenario-format.md.
namespace iotchain::scenario {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Genesis {
  Tokens token_price = 1;
  Tokens task_fee = 1;
  std::uint64_t respondent_reward_percent = 100;
  double usd_per_100k_gas = kFittedUsdPer100kGas;
  BlockIntervalRange block_interval;
};

struct Step {
  std::size_t line = 0;
  std::string action;
  std::vector<std::string> positional;
  std::map<std::string, std::string, std::less<>> args;
  std::string text;
};

struct Scenario {
  std::uint64_t seed = 0;
  Genesis genesis;
  std::vector<std::string> actors;
  std::vector<Step> steps;
};

/// Parses and validates references. Throws ParseError naming the line.
Scenario parse(std::string_view text);
Scenario load(const std::filesystem::path& path);

struct AuditEntry {
  std::uint64_t seq = 0;
  BlockNumber block = 0;
  std::string actor;
  std::string action;
  Address sender;
  Address target;
  CallArgs args;
  ErrorCode outcome = ErrorCode::Ok;
  std::string reason;
  std::uint64_t gas = 0;
  std::vector<EventRecord> events;
};

/// One JSON object per line, keys in fixed order.
std::string format_audit_entry(const AuditEntry& entry);
std::string format_audit_log(const std::vector<AuditEntry>& entries);
/// Throws ParseError (line = log line) on malformed input.
std::vector<AuditEntry> parse_audit_log(std::string_view text);

struct GasRow {
  ContractKind kind = ContractKind::UserManager;
  std::uint64_t count = 0;
  std::uint64_t unit_gas = 0;
  std::uint64_t total_gas = 0;
  double usd = 0.0;
};

struct GasReport {
  double usd_per_100k_gas = kFittedUsdPer100kGas;
  /// Only kinds instantiated at least once, in declaration order.
  std::vector<GasRow> rows;

  std::string to_text() const;
  std::string to_json() const;
};

GasReport gas_report(const Ledger& ledger);

struct StepFailure {
  std::size_t line = 0;
  std::string step;
  std::string message;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> store_directory;
};

struct RunResult {
  ContentHash digest;
  std::vector<AuditEntry> audit;
  GasReport gas;
  std::vector<StepFailure> failures;

  bool ok() const { return failures.empty(); }
  std::string audit_log() const { return format_audit_log(audit); }
};

// Owns the ledger, result store and device agents of one run. Kept open
// after run() so callers can inspect the final state.
class Runner {
 public:
  explicit Runner(Scenario scenario, RunOptions options = {});
  ~Runner();
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  /// Executes every step once. Throws std::logic_error on a second call.
  RunResult run();

  const Ledger& ledger() const { return *ledger_; }
  ResultStore& store() { return *store_; }
  const Scenario& scenario() const { return scenario_; }
  std::uint64_t seed() const { return seed_; }

  Address address_of(std::string_view actor) const;
  TaskId task_id(std::string_view task) const;
  DeviceIdentifier device_id(std::string_view device) const;
  const agent::DeviceAgent& agent(std::string_view device) const;
  const crypto::KeyPair& creator_key(std::string_view task) const;
  /// Plaintext the agent sealed for the task, if it produced one.
  std::optional<Bytes> plaintext_for(std::string_view task) const;
  const std::vector<agent::AgentAction>& agent_actions() const {
    return actions_;
  }

 private:
  struct DeviceSlot;
  class AuditedPort;

  Receipt submit(const std::string& actor, const Address& sender,
                 const Address& target, Call call);
  void execute(const Step& step);
  void deploy(const Step& step);
  void check_expected(const Step& step, const Receipt& receipt);
  void run_assert(const Step& step);
  DeviceSlot& slot(std::string_view device);
  const DeviceSlot& slot(std::string_view device) const;
  crypto::Seed derive(std::string_view purpose, std::string_view name) const;

  Scenario scenario_;
  RunOptions options_;
  std::uint64_t seed_;
  std::unique_ptr<Ledger> ledger_;
  std::unique_ptr<ResultStore> store_;
  std::map<std::string, Address, std::less<>> actors_;
  std::vector<std::unique_ptr<DeviceSlot>> devices_;
  std::map<std::string, TaskId, std::less<>> tasks_;
  std::map<std::string, crypto::KeyPair, std::less<>> creator_keys_;
  std::map<std::string, std::map<Address, Tokens>, std::less<>> checkpoints_;
  std::vector<agent::AgentAction> actions_;
  std::vector<AuditEntry> audit_;
  std::vector<StepFailure> failures_;
  bool ran_ = false;
};

/// Convenience wrapper: runs a scenario and returns its reports.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

struct ReplayResult {
  ContentHash digest;
  /// Entries whose replayed outcome differs from the logged one.
  std::vector<std::uint64_t> divergent_entries;

  bool ok() const { return divergent_entries.empty(); }
};

/// Re-submits each logged transaction at its logged block. The store answers
/// the content checks that result submissions depend on.
ReplayResult replay(const std::vector<AuditEntry>& log, const Genesis& genesis,
                    std::uint64_t seed, const ResultStore& store);

}  // namespace iotchain::scenario
