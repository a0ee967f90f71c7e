#include "iotchain/errors.hpp"

#include <array>
#include <utility>

namespace iotchain {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 29> kNames{{
    {ErrorCode::Ok, "Ok"},
    {ErrorCode::UnknownContract, "UnknownContract"},
    {ErrorCode::UnknownOperation, "UnknownOperation"},
    {ErrorCode::MalformedCall, "MalformedCall"},
    {ErrorCode::AlreadyDeployed, "AlreadyDeployed"},
    {ErrorCode::AlreadyInitialized, "AlreadyInitialized"},
    {ErrorCode::NotInitialized, "NotInitialized"},
    {ErrorCode::Unauthorized, "Unauthorized"},
    {ErrorCode::AlreadyRegistered, "AlreadyRegistered"},
    {ErrorCode::NotRegistered, "NotRegistered"},
    {ErrorCode::DuplicateIdentifier, "DuplicateIdentifier"},
    {ErrorCode::UnknownDevice, "UnknownDevice"},
    {ErrorCode::DeviceInactive, "DeviceInactive"},
    {ErrorCode::NotDeviceOwner, "NotDeviceOwner"},
    {ErrorCode::InvalidPayment, "InvalidPayment"},
    {ErrorCode::InsufficientTokens, "InsufficientTokens"},
    {ErrorCode::UnbalancedRelease, "UnbalancedRelease"},
    {ErrorCode::InvalidParams, "InvalidParams"},
    {ErrorCode::UnknownTask, "UnknownTask"},
    {ErrorCode::TaskNotOpen, "TaskNotOpen"},
    {ErrorCode::TaskExpired, "TaskExpired"},
    {ErrorCode::InsufficientReputation, "InsufficientReputation"},
    {ErrorCode::TaskNotAccepted, "TaskNotAccepted"},
    {ErrorCode::NotAssignedDevice, "NotAssignedDevice"},
    {ErrorCode::InvalidSignature, "InvalidSignature"},
    {ErrorCode::ResultNotStored, "ResultNotStored"},
    {ErrorCode::NotCreator, "NotCreator"},
    {ErrorCode::TaskNotExpired, "TaskNotExpired"},
    {ErrorCode::TaskAlreadyResolved, "TaskAlreadyResolved"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

}  // namespace iotchain
