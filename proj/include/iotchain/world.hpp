#pragma once

#include <map>
#include <vector>

#include "iotchain/registry.hpp"
#include "iotchain/tasks.hpp"
#include "iotchain/token.hpp"

namespace iotchain {

/// Everything a transaction can change. Copyable so the ledger can snapshot
/// it and roll back a reverted transaction.
struct WorldState {
  UserManager users;
  DeviceManager devices;
  TaskManager tasks;
  TokenManager tokens;
  std::vector<EventRecord> events;
  std::map<ContractKind, std::uint64_t> instantiations;
  std::uint64_t deploy_nonce = 0;

  ManagerBase* manager_at(const Address& address);
  ManagerBase* manager_of(ContractKind kind);
  const ManagerBase* manager_of(ContractKind kind) const;

  /// Canonical encoding of the full state (docs/state-format.md).
  Bytes canonical() const;
};

}  // namespace iotchain
