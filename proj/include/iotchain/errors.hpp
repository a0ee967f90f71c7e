#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace iotchain {

// Outcome codes shared by every contract. `Ok` marks a successful receipt.
enum class ErrorCode {
  Ok,
  UnknownContract,
  UnknownOperation,
  MalformedCall,
  AlreadyDeployed,
  AlreadyInitialized,
  NotInitialized,
  Unauthorized,
  AlreadyRegistered,
  NotRegistered,
  DuplicateIdentifier,
  UnknownDevice,
  DeviceInactive,
  NotDeviceOwner,
  InvalidPayment,
  InsufficientTokens,
  UnbalancedRelease,
  InvalidParams,
  UnknownTask,
  TaskNotOpen,
  TaskExpired,
  InsufficientReputation,
  TaskNotAccepted,
  NotAssignedDevice,
  InvalidSignature,
  ResultNotStored,
  NotCreator,
  TaskNotExpired,
  TaskAlreadyResolved,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

/// Thrown inside contract evaluation; the ledger turns it into a failed
/// receipt and rolls the transaction back.
class Revert : public std::runtime_error {
 public:
  explicit Revert(ErrorCode code, const std::string& detail = {})
      : std::runtime_error(detail.empty()
                               ? std::string(to_string(code))
                               : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iotchain
