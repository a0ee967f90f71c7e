#include "iotchain/registry.hpp"

#include "iotchain/errors.hpp"
#include "iotchain/world.hpp"

namespace iotchain {

DeviceIdentifier device_identifier_for(ByteView serial, ByteView salt) {
  Bytes material(serial.begin(), serial.end());
  append(material, salt);
  return DeviceIdentifier::from_view(crypto::hash_content(material).view());
}

// UserManager

void UserManager::init(ExecutionContext& ctx, const Init& call) {
  begin_init(ctx);
  require_system_refs(ctx.world(), call);
  task_manager_ = call.task_manager;
  device_manager_ = call.device_manager;
  token_manager_ = call.token_manager;
  finish_init(ctx);
}

void UserManager::apply(ExecutionContext& ctx, const RegisterUser&) {
  require_initialized();
  const Address sender = ctx.sender();
  if (users_.contains(sender)) throw Revert(ErrorCode::AlreadyRegistered);
  users_.emplace(sender, UserRecord{sender, 0, {}, ctx.block()});
  ctx.charge_instantiation(ContractKind::User);
  ctx.emit(topics::kUserRegistered, address(), {{"user", sender.hex()}});
}

void UserManager::apply(ExecutionContext& ctx, const AddReputation& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  if (call.points == 0) {
    throw Revert(ErrorCode::InvalidParams, "points must be positive");
  }
  auto& user = registered(call.user);
  if (user.reputation + call.points < user.reputation) {
    throw Revert(ErrorCode::InvalidParams, "reputation overflow");
  }
  user.reputation += call.points;
}

void UserManager::apply(ExecutionContext& ctx, const PushNotification& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  auto& user = registered(call.user);
  user.notifications.push_back(
      CompletedTaskRef{call.task, call.resolved_block});
  ctx.emit(topics::kTaskCompleted, address(),
           {{"user", call.user.hex()},
            {"task", std::to_string(call.task.value)},
            {"resolved_block", std::to_string(call.resolved_block)},
            {"archive", task_manager_.hex()}});
}

const UserRecord* UserManager::find(const Address& address) const {
  auto it = users_.find(address);
  return it == users_.end() ? nullptr : &it->second;
}

UserRecord& UserManager::registered(const Address& address) {
  auto it = users_.find(address);
  if (it == users_.end()) {
    throw Revert(ErrorCode::NotRegistered, address.hex());
  }
  return it->second;
}

void UserManager::write_canonical(CanonicalWriter& w) const {
  write_base(w);
  w.fixed(task_manager_);
  w.fixed(device_manager_);
  w.fixed(token_manager_);
  w.u32(static_cast<std::uint32_t>(users_.size()));
  for (const auto& [addr, user] : users_) {
    w.fixed(addr);
    w.u64(user.reputation);
    w.u64(user.registered_block);
    w.u32(static_cast<std::uint32_t>(user.notifications.size()));
    for (const auto& n : user.notifications) {
      w.u64(n.task.value);
      w.u64(n.resolved_block);
    }
  }
}

// DeviceManager

void DeviceManager::init(ExecutionContext& ctx, const Init& call) {
  begin_init(ctx);
  require_system_refs(ctx.world(), call);
  user_manager_ = call.user_manager;
  task_manager_ = call.task_manager;
  finish_init(ctx);
}

void DeviceManager::apply(ExecutionContext& ctx, const RegisterDevice& call) {
  require_initialized();
  const Address sender = ctx.sender();
  if (!ctx.world().users.is_registered(sender)) {
    throw Revert(ErrorCode::NotRegistered, sender.hex());
  }
  if (!crypto::is_valid_public_key(call.signing_key)) {
    throw Revert(ErrorCode::InvalidParams, "device signing key is malformed");
  }
  if (devices_.contains(call.identifier)) {
    throw Revert(ErrorCode::DuplicateIdentifier, call.identifier.hex());
  }
  devices_.emplace(call.identifier,
                   DeviceRecord{call.identifier, sender, call.signing_key,
                                true, {}, 0, ctx.block()});
  ctx.charge_instantiation(ContractKind::Device);
  ctx.emit(topics::kDeviceRegistered, address(),
           {{"device", call.identifier.hex()}, {"owner", sender.hex()}});
}

void DeviceManager::apply(ExecutionContext& ctx, const SetDeviceActive& call) {
  require_initialized();
  auto& device = existing(call.identifier);
  if (device.owner != ctx.sender()) throw Revert(ErrorCode::NotDeviceOwner);
  device.active = call.active;
  ctx.emit(topics::kDeviceActiveChanged, address(),
           {{"device", call.identifier.hex()},
            {"active", call.active ? "true" : "false"}});
}

void DeviceManager::apply(ExecutionContext& ctx, const AddBacklogEntry& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  auto& device = existing(call.device);
  if (!device.active) throw Revert(ErrorCode::DeviceInactive);
  device.backlog.push_back(call.task);
  ctx.emit(topics::kBacklogAssigned, address(),
           {{"device", call.device.hex()},
            {"task", std::to_string(call.task.value)},
            {"owner", device.owner.hex()}});
}

void DeviceManager::apply(ExecutionContext& ctx,
                          const RecordCompletion& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  ++existing(call.device).completed_count;
}

const DeviceRecord* DeviceManager::find(const DeviceIdentifier& id) const {
  auto it = devices_.find(id);
  return it == devices_.end() ? nullptr : &it->second;
}

DeviceRecord& DeviceManager::existing(const DeviceIdentifier& id) {
  auto it = devices_.find(id);
  if (it == devices_.end()) throw Revert(ErrorCode::UnknownDevice, id.hex());
  return it->second;
}

void DeviceManager::write_canonical(CanonicalWriter& w) const {
  write_base(w);
  w.fixed(user_manager_);
  w.fixed(task_manager_);
  w.u32(static_cast<std::uint32_t>(devices_.size()));
  for (const auto& [id, d] : devices_) {
    w.fixed(id);
    w.fixed(d.owner);
    w.fixed(d.signing_key);
    w.boolean(d.active);
    w.u64(d.completed_count);
    w.u64(d.registered_block);
    w.u32(static_cast<std::uint32_t>(d.backlog.size()));
    for (auto t : d.backlog) w.u64(t.value);
  }
}

}  // namespace iotchain
