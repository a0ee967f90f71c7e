#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "iotchain/types.hpp"

// Contract operations as plain value types. Every call has a stable name and
// a key=value argument encoding, which is what the audit log records and
// what replay decodes.
namespace iotchain {

using CallArgs = std::map<std::string, std::string>;

// Marker for calls that any manager accepts.
inline constexpr std::optional<ContractKind> kAnyManager = std::nullopt;

struct DeployManager {
  static constexpr std::string_view kName = "deploy";
  ContractKind kind = ContractKind::UserManager;
};

/// Sets static variables. Only the deployer may call it, and only before init.
struct Configure {
  static constexpr std::string_view kName = "configure";
  std::map<std::string, std::uint64_t> settings;
};

/// Binds peer manager references and locks configuration.
struct Init {
  static constexpr std::string_view kName = "init";
  Address user_manager;
  Address device_manager;
  Address task_manager;
  Address token_manager;
};

struct RegisterUser {
  static constexpr std::string_view kName = "register_user";
};

struct RegisterDevice {
  static constexpr std::string_view kName = "register_device";
  DeviceIdentifier identifier;
  crypto::PublicKey signing_key;
};

struct SetDeviceActive {
  static constexpr std::string_view kName = "set_device_active";
  DeviceIdentifier identifier;
  bool active = true;
};

struct PurchaseTokens {
  static constexpr std::string_view kName = "purchase_tokens";
  std::uint64_t payment = 0;
};

struct CreateTask {
  static constexpr std::string_view kName = "create_task";
  Tokens reward = 0;
  BlockNumber block_limit = 0;
  std::uint64_t reputation_requirement = 0;
  crypto::PublicKey creator_public_key;
  Bytes payload;
};

struct AcceptTask {
  static constexpr std::string_view kName = "accept_task";
  TaskId task;
  DeviceIdentifier device;
};

struct SubmitResult {
  static constexpr std::string_view kName = "submit_result";
  TaskId task;
  DeviceIdentifier device;
  TaskResultObject result;
};

struct ReleaseExpired {
  static constexpr std::string_view kName = "release_expired";
  TaskId task;
};

// Manager-only operations. Reachable as transactions, but they revert with
// Unauthorized unless msg.sender is the bound TaskManager.

struct AddBacklogEntry {
  static constexpr std::string_view kName = "add_backlog_entry";
  DeviceIdentifier device;
  TaskId task;
};

struct RecordCompletion {
  static constexpr std::string_view kName = "record_completion";
  DeviceIdentifier device;
  TaskId task;
};

struct AddReputation {
  static constexpr std::string_view kName = "add_reputation";
  Address user;
  std::uint64_t points = 0;
};

struct PushNotification {
  static constexpr std::string_view kName = "push_notification";
  Address user;
  TaskId task;
  BlockNumber resolved_block = 0;
};

struct Freeze {
  static constexpr std::string_view kName = "freeze";
  Address from;
  Tokens amount = 0;
  TaskId task;
};

struct Release {
  static constexpr std::string_view kName = "release";
  TaskId task;
  std::vector<std::pair<Address, Tokens>> payouts;
  Tokens burn = 0;
};

struct BurnFee {
  static constexpr std::string_view kName = "burn_fee";
  Address from;
  Tokens amount = 0;
};

using Call =
    std::variant<DeployManager, Configure, Init, RegisterUser, RegisterDevice,
                 SetDeviceActive, PurchaseTokens, CreateTask, AcceptTask,
                 SubmitResult, ReleaseExpired, AddBacklogEntry,
                 RecordCompletion, AddReputation, PushNotification, Freeze,
                 Release, BurnFee>;

std::string_view call_name(const Call& call);

/// Manager kind that implements the call; nullopt for deploy/configure/init.
std::optional<ContractKind> call_target_kind(const Call& call);

CallArgs encode_args(const Call& call);

/// Throws Revert(UnknownOperation) for an unknown name and
/// Revert(MalformedCall) for bad arguments.
Call decode_call(std::string_view name, const CallArgs& args);

}  // namespace iotchain
