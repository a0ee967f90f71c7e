#pragma once

#include <map>
#include <vector>

#include "iotchain/manager.hpp"

namespace iotchain {

inline constexpr std::size_t kDeviceSaltSize = 16;

/// hash_content(serial || salt)
DeviceIdentifier device_identifier_for(ByteView serial, ByteView salt);

/// Permanent pointer to an archived task, pushed to the creator on completion.
struct CompletedTaskRef {
  TaskId task;
  BlockNumber resolved_block = 0;
  friend bool operator==(const CompletedTaskRef&,
                         const CompletedTaskRef&) = default;
};

struct UserRecord {
  Address address;
  std::uint64_t reputation = 0;
  std::vector<CompletedTaskRef> notifications;
  BlockNumber registered_block = 0;
};

class UserManager : public ManagerBase {
 public:
  UserManager() : ManagerBase(ContractKind::UserManager, {}) {}

  void init(ExecutionContext& ctx, const Init& call);
  void apply(ExecutionContext& ctx, const RegisterUser& call);
  void apply(ExecutionContext& ctx, const AddReputation& call);
  void apply(ExecutionContext& ctx, const PushNotification& call);

  const UserRecord* find(const Address& address) const;
  bool is_registered(const Address& address) const {
    return find(address) != nullptr;
  }
  const std::map<Address, UserRecord>& users() const { return users_; }

  void write_canonical(CanonicalWriter& w) const;

 private:
  UserRecord& registered(const Address& address);

  Address task_manager_;
  Address device_manager_;
  Address token_manager_;
  std::map<Address, UserRecord> users_;
};

struct DeviceRecord {
  DeviceIdentifier identifier;
  Address owner;
  crypto::PublicKey signing_key;
  bool active = true;
  std::vector<TaskId> backlog;
  std::uint64_t completed_count = 0;
  BlockNumber registered_block = 0;
};

class DeviceManager : public ManagerBase {
 public:
  DeviceManager() : ManagerBase(ContractKind::DeviceManager, {}) {}

  void init(ExecutionContext& ctx, const Init& call);
  void apply(ExecutionContext& ctx, const RegisterDevice& call);
  // Owner-only toggle.
  void apply(ExecutionContext& ctx, const SetDeviceActive& call);
  void apply(ExecutionContext& ctx, const AddBacklogEntry& call);
  void apply(ExecutionContext& ctx, const RecordCompletion& call);

  const DeviceRecord* find(const DeviceIdentifier& id) const;
  const std::map<DeviceIdentifier, DeviceRecord>& devices() const {
    return devices_;
  }

  void write_canonical(CanonicalWriter& w) const;

 private:
  DeviceRecord& existing(const DeviceIdentifier& id);

  Address user_manager_;
  Address task_manager_;
  std::map<DeviceIdentifier, DeviceRecord> devices_;
};

}  // namespace iotchain
