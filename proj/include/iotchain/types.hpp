#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "iotchain/bytes.hpp"
#include "iotchain/crypto.hpp"

namespace iotchain {

enum class ContractKind : std::uint8_t {
  UserManager,
  DeviceManager,
  TaskManager,
  TokenManager,
  User,
  Device,
  Task,
};

inline constexpr std::array<ContractKind, 7> kAllContractKinds{
    ContractKind::UserManager, ContractKind::DeviceManager,
    ContractKind::TaskManager, ContractKind::TokenManager,
    ContractKind::User,        ContractKind::Device,
    ContractKind::Task,
};

inline constexpr std::array<ContractKind, 4> kManagerKinds{
    ContractKind::UserManager, ContractKind::DeviceManager,
    ContractKind::TaskManager, ContractKind::TokenManager};

std::string_view to_string(ContractKind kind);
std::optional<ContractKind> contract_kind_from_string(std::string_view name);

inline constexpr bool is_manager(ContractKind kind) {
  return kind == ContractKind::UserManager ||
         kind == ContractKind::DeviceManager ||
         kind == ContractKind::TaskManager ||
         kind == ContractKind::TokenManager;
}

using Tokens = std::uint64_t;
using BlockNumber = std::uint64_t;

struct TaskId {
  std::uint64_t value = 0;
  friend auto operator<=>(const TaskId&, const TaskId&) = default;
};

struct DeviceIdTag {};
/// Salted hash of the device serial number.
using DeviceIdentifier = FixedBytes<32, DeviceIdTag>;

enum class TaskPhase : std::uint8_t { Created, Accepted, Resolved };
std::string_view to_string(TaskPhase phase);
std::optional<TaskPhase> task_phase_from_string(std::string_view name);

/// What a device hands back on completion: where the sealed result lives,
/// the ephemeral key needed to open it, and the device's signature.
struct TaskResultObject {
  ContentHash encrypted_file_hash;
  crypto::PublicKey device_public_key;
  crypto::Signature signature;

  /// task id (8 bytes, big endian) || file hash || device public key
  static Bytes signing_message(TaskId task, const ContentHash& file_hash,
                               const crypto::PublicKey& device_public_key);

  friend bool operator==(const TaskResultObject&,
                         const TaskResultObject&) = default;
};

using EventFields = std::map<std::string, std::string>;

/// Position in the event log. Sequences start at 1 within a block, so the
/// default cursor precedes every event.
struct EventCursor {
  BlockNumber block = 0;
  std::uint32_t sequence = 0;
  friend auto operator<=>(const EventCursor&, const EventCursor&) = default;
};

struct EventRecord {
  std::string topic;
  Address emitter;
  EventFields payload;
  BlockNumber block = 0;
  std::uint32_t sequence = 0;

  EventCursor cursor() const { return {block, sequence}; }
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

namespace topics {
inline constexpr std::string_view kManagerDeployed = "ManagerDeployed";
inline constexpr std::string_view kManagerInitialized = "ManagerInitialized";
inline constexpr std::string_view kUserRegistered = "UserRegistered";
inline constexpr std::string_view kDeviceRegistered = "DeviceRegistered";
inline constexpr std::string_view kDeviceActiveChanged = "DeviceActiveChanged";
inline constexpr std::string_view kTokensPurchased = "TokensPurchased";
inline constexpr std::string_view kTaskCreated = "TaskCreated";
inline constexpr std::string_view kBacklogAssigned = "BacklogAssigned";
inline constexpr std::string_view kTaskCompleted = "TaskCompleted";
inline constexpr std::string_view kTaskReleased = "TaskReleased";
}  // namespace topics

}  // namespace iotchain
