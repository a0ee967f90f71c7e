#pragma once

#include <array>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iotchain/ledger.hpp"
#include "iotchain/result_store.hpp"

// Device middleware. The agent is strictly outbound: it polls the ledger,
// writes to the result store and submits transactions through the two
// ports below. It has no listening endpoint and registers no callbacks.
namespace iotchain::agent {

enum class Endpoint { Ledger, ResultStore };

/// The only destinations an agent ever contacts.
inline constexpr std::array<Endpoint, 2> kOutboundWhitelist{
    Endpoint::Ledger, Endpoint::ResultStore};

class LedgerPort {
 public:
  virtual ~LedgerPort() = default;
  virtual std::vector<EventRecord> poll_events(EventCursor after,
                                               const TopicSet& topics) = 0;
  virtual std::optional<TaskRecord> fetch_task(TaskId id) = 0;
  virtual BlockNumber current_block() = 0;
  virtual Address manager_address(ContractKind kind) = 0;
  virtual Receipt submit(const Transaction& tx) = 0;
};

class StorePort {
 public:
  virtual ~StorePort() = default;
  virtual ContentHash put(ByteView blob) = 0;
};

class LedgerUplink final : public LedgerPort {
 public:
  explicit LedgerUplink(Ledger& ledger) : ledger_(ledger) {}
  std::vector<EventRecord> poll_events(EventCursor after,
                                       const TopicSet& topics) override {
    return ledger_.poll_events(after, topics);
  }
  std::optional<TaskRecord> fetch_task(TaskId id) override {
    return ledger_.task(id);
  }
  BlockNumber current_block() override { return ledger_.current_block(); }
  Address manager_address(ContractKind kind) override {
    return ledger_.manager_address(kind);
  }
  Receipt submit(const Transaction& tx) override { return ledger_.submit(tx); }

 private:
  Ledger& ledger_;
};

class StoreUplink final : public StorePort {
 public:
  explicit StoreUplink(ResultStore& store) : store_(store) {}
  ContentHash put(ByteView blob) override { return store_.put(blob); }

 private:
  ResultStore& store_;
};

struct ReadingLimits {
  double min = 0.0;
  double max = 0.0;
};

struct SensorReading {
  std::string channel;
  double value = 0.0;
  BlockNumber timestamp = 0;
};

struct ReadingVerdict {
  bool accepted = false;
  std::string reason;
};

/// Inclusive min/max check.
ReadingVerdict validate_reading(const SensorReading& reading,
                                const ReadingLimits& limits);

class Sensor {
 public:
  virtual ~Sensor() = default;
  virtual std::optional<double> read(std::string_view channel) = 0;
  virtual bool actuate(std::string_view channel, double value) = 0;
};

class SimulatedSensor final : public Sensor {
 public:
  void set_value(std::string_view channel, double value) {
    values_[std::string(channel)] = value;
  }
  std::optional<double> read(std::string_view channel) override;
  bool actuate(std::string_view channel, double value) override;
  std::optional<double> actuator_state(std::string_view channel) const;

 private:
  std::map<std::string, double, std::less<>> values_;
  std::map<std::string, double, std::less<>> actuators_;
};

// Task payload: "<operation> key=value ...", e.g. "read channel=temperature"
// or "set channel=relay value=1".
struct TaskCommand {
  std::string operation;
  std::map<std::string, std::string> params;
};

std::optional<TaskCommand> parse_command(ByteView payload);
Bytes make_read_command(std::string_view channel);
Bytes make_set_command(std::string_view channel, double value);

inline constexpr std::string_view kPlaintextResultMagic = "IOTC-RESULT/1";

struct PlaintextResult {
  TaskId task;
  DeviceIdentifier device;
  std::string operation;
  std::string channel;
  double value = 0.0;
  BlockNumber block = 0;
  friend bool operator==(const PlaintextResult&,
                         const PlaintextResult&) = default;
};

Bytes format_plaintext_result(const PlaintextResult& result);
std::optional<PlaintextResult> parse_plaintext_result(ByteView bytes);

class ProvisioningFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SealingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxProvisioningAttempts = 100;

/// Seals the plaintext to the task creator's key under an ephemeral key
/// (derived from `ephemeral_seed` when given), stores the envelope and signs
/// the result object with the device key. Throws SealingFailure.
TaskResultObject package_result(const TaskRecord& task, ByteView plaintext,
                                const crypto::KeyPair& device_key,
                                const std::optional<crypto::Seed>& ephemeral_seed,
                                StorePort& store);

struct AgentConfig {
  Bytes serial_number;
  Address owner_address;
  /// Pause between cycles when a host loop drives the agent.
  std::chrono::milliseconds poll_interval{1000};
  std::map<std::string, ReadingLimits, std::less<>> reading_limits;
  crypto::KeyPair signing_keypair;
  /// Set once by provisioning and then never changed.
  std::optional<DeviceIdentifier> identifier;
  /// With a root, ephemeral keys are derived per task for reproducible
  /// runs; without one they come from system randomness.
  std::optional<crypto::Seed> ephemeral_seed_root;
};

enum class ActionKind {
  Submitted,
  SubmitRejected,
  OutlierRejected,
  PayloadRejected,
  SensorUnavailable,
  SealingFailed,
  Skipped,
};

std::string_view to_string(ActionKind kind);

struct AgentAction {
  ActionKind kind = ActionKind::Skipped;
  TaskId task;
  std::string detail;
  std::optional<ContentHash> result_hash;
  Bytes plaintext;
};

class DeviceAgent {
 public:
  DeviceAgent(AgentConfig config, std::shared_ptr<Sensor> sensor);

  /// Hashes serial || random salt and registers it, re-salting on
  /// DuplicateIdentifier. Returns the stored identifier if already set.
  /// Throws ProvisioningFailed after kMaxProvisioningAttempts or on any other
  /// registration error.
  DeviceIdentifier provision_identifier(LedgerPort& ledger,
                                        std::mt19937_64& rng);

  /// Polls for backlog assignments after the cursor and executes each new
  /// task addressed to this device. Each task runs at most once.
  std::vector<AgentAction> run_cycle(LedgerPort& ledger, StorePort& store);

  const AgentConfig& config() const { return config_; }
  const std::optional<DeviceIdentifier>& identifier() const {
    return config_.identifier;
  }
  EventCursor cursor() const { return cursor_; }
  const std::set<TaskId>& executed() const { return executed_; }
  std::size_t provisioning_attempts() const { return provisioning_attempts_; }

  /// Versioned, field-tagged local state file (docs/agent-state.md).
  std::string save_state() const;
  /// Throws std::runtime_error on a malformed or unsupported state file.
  static DeviceAgent load_state(std::string_view text,
                                std::shared_ptr<Sensor> sensor);

 private:
  AgentAction execute(LedgerPort& ledger, StorePort& store, TaskId task_id);
  std::optional<crypto::Seed> ephemeral_seed_for(TaskId task) const;

  AgentConfig config_;
  std::shared_ptr<Sensor> sensor_;
  EventCursor cursor_;
  std::set<TaskId> executed_;
  std::size_t provisioning_attempts_ = 0;
};

/// Creator side: opens a stored result envelope. The envelope's ephemeral
/// key must match the one named in the result object.
/// Throws crypto::DecryptionFailure.
Bytes open_task_result(ByteView blob, const TaskResultObject& result,
                       const crypto::SecretKey& creator_key);

}  // namespace iotchain::agent
