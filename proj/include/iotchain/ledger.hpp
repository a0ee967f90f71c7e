#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "iotchain/calls.hpp"
#include "iotchain/errors.hpp"
#include "iotchain/gas.hpp"
#include "iotchain/world.hpp"

namespace iotchain {

struct BlockIntervalRange {
  double min_seconds = 10.0;
  double max_seconds = 19.0;
};

// Block-number clock with a simulated wall time. Each advanced block adds an
// interval drawn uniformly from the configured range.
class BlockClock {
 public:
  explicit BlockClock(std::uint64_t seed = 0, BlockIntervalRange range = {});

  BlockNumber current_block() const { return block_; }
  double elapsed_seconds() const { return elapsed_; }
  const BlockIntervalRange& range() const { return range_; }

  /// Throws std::invalid_argument for n == 0.
  BlockNumber advance(std::uint64_t n);

  double mean_interval() const {
    return (range_.min_seconds + range_.max_seconds) / 2.0;
  }
  double estimated_seconds(std::uint64_t blocks) const {
    return static_cast<double>(blocks) * mean_interval();
  }

 private:
  double sample_interval();

  BlockNumber block_ = 0;
  double elapsed_ = 0.0;
  BlockIntervalRange range_;
  std::mt19937_64 rng_;
};

struct Transaction {
  Address sender;
  /// Zero address for contract creation.
  Address target;
  Call call;
  BlockNumber block_submitted = 0;
};

struct Receipt {
  ErrorCode status = ErrorCode::Ok;
  std::string reason;
  std::vector<EventRecord> events;
  std::uint64_t gas = 0;
  std::optional<Address> created_contract;
  std::optional<TaskId> created_task;

  bool ok() const { return status == ErrorCode::Ok; }
};

struct GenesisConfig {
  std::uint64_t seed = 0;
  BlockIntervalRange block_interval;
  double usd_per_100k_gas = kFittedUsdPer100kGas;
};

using TopicSet = std::set<std::string, std::less<>>;

// Single-writer simulated chain. Transactions apply atomically in arrival
// order; a revert restores the pre-transaction world. Reads take a shared
// lock and may run alongside each other.
class Ledger {
 public:
  explicit Ledger(GenesisConfig config = {});
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  Receipt submit(const Transaction& tx);
  Receipt submit(const Address& sender, const Address& target, Call call);

  BlockNumber advance_blocks(std::uint64_t n);
  BlockNumber current_block() const;
  double elapsed_seconds() const;

  /// Events strictly after `after`, in log order. An empty topic set
  /// matches every topic.
  std::vector<EventRecord> poll_events(EventCursor after,
                                       const TopicSet& topics = {}) const;

  InstantiationCost instantiation_cost(ContractKind kind) const {
    return gas_.instantiation_cost(kind);
  }
  const GasSchedule& gas_schedule() const { return gas_; }
  /// Calibration hook for per-call gas.
  void set_call_cost(std::string_view operation, std::uint64_t gas);

  ContentHash state_digest() const;
  Bytes canonical_state() const;

  /// Tells the TaskManager which content hashes the result store holds.
  void set_content_oracle(ContentOracle oracle);

  std::optional<TaskRecord> task(TaskId id) const;
  std::optional<DeviceRecord> device(const DeviceIdentifier& id) const;
  std::optional<UserRecord> user(const Address& address) const;
  Tokens balance_of(const Address& address) const;
  Address manager_address(ContractKind kind) const;

  /// Direct world access for tests and reporting. Not synchronized with
  /// concurrent submit().
  const WorldState& world() const { return world_; }

  const GenesisConfig& genesis() const { return genesis_; }
  std::uint64_t transaction_count() const;

 private:
  void deploy(ExecutionContext& ctx, const Address& deployer,
              const DeployManager& call, Receipt& receipt);

  mutable std::shared_mutex mutex_;
  GenesisConfig genesis_;
  GasSchedule gas_;
  BlockClock clock_;
  WorldState world_;
  ContentOracle oracle_;
  std::uint64_t tx_count_ = 0;
};

struct SystemAddresses {
  Address user_manager;
  Address device_manager;
  Address task_manager;
  Address token_manager;

  Init init_call() const {
    return Init{user_manager, device_manager, task_manager, token_manager};
  }
};

struct SystemSettings {
  Tokens token_price = 1;
  Tokens task_fee = 1;
  std::uint64_t respondent_reward_percent = 100;
};

/// Deploys the four managers, configures static variables and calls init on
/// each. Throws std::runtime_error if any step reverts.
SystemAddresses deploy_system(Ledger& ledger, const Address& deployer,
                              const SystemSettings& settings = {});

/// Deterministic address for a named actor (first 20 bytes of a hash).
Address address_for(std::string_view label);

}  // namespace iotchain
