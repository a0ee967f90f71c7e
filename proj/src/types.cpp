#include "iotchain/types.hpp"

namespace iotchain {
namespace {

constexpr std::array<std::string_view, 7> kKindNames{
    "UserManager", "DeviceManager", "TaskManager", "TokenManager",
    "User",        "Device",        "Task"};

constexpr std::array<std::string_view, 3> kPhaseNames{"Created", "Accepted",
                                                      "Resolved"};

}  // namespace

std::string_view to_string(ContractKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<ContractKind> contract_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ContractKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(TaskPhase phase) {
  return kPhaseNames[static_cast<std::size_t>(phase)];
}

std::optional<TaskPhase> task_phase_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (kPhaseNames[i] == name) return static_cast<TaskPhase>(i);
  }
  return std::nullopt;
}

Bytes TaskResultObject::signing_message(
    TaskId task, const ContentHash& file_hash,
    const crypto::PublicKey& device_public_key) {
  Bytes msg;
  msg.reserve(8 + 32 + 32);
  append_u64_be(msg, task.value);
  append(msg, file_hash.view());
  append(msg, device_public_key.view());
  return msg;
}

}  // namespace iotchain
