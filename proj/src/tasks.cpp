#include "iotchain/tasks.hpp"

#include "iotchain/errors.hpp"
#include "iotchain/world.hpp"

namespace iotchain {

void TaskManager::init(ExecutionContext& ctx, const Init& call) {
  begin_init(ctx);
  require_system_refs(ctx.world(), call);
  user_manager_ = call.user_manager;
  device_manager_ = call.device_manager;
  token_manager_ = call.token_manager;
  finish_init(ctx);
}

// Phase one: the creator escrows the reward and pays the fee.
void TaskManager::apply(ExecutionContext& ctx, const CreateTask& call) {
  require_initialized();
  const Address creator = ctx.sender();
  const auto& world = ctx.world();
  if (!world.users.is_registered(creator)) {
    throw Revert(ErrorCode::NotRegistered, creator.hex());
  }
  if (call.reward < 1) throw Revert(ErrorCode::InvalidParams, "reward < 1");
  if (call.block_limit < 1) {
    throw Revert(ErrorCode::InvalidParams, "block_limit < 1");
  }
  if (ctx.block() + call.block_limit < ctx.block()) {
    throw Revert(ErrorCode::InvalidParams, "block_limit overflows");
  }
  if (!crypto::is_valid_public_key(call.creator_public_key)) {
    throw Revert(ErrorCode::InvalidParams, "creator public key is malformed");
  }
  const Tokens fee = world.tokens.task_fee();
  if (call.reward + fee < call.reward) {
    throw Revert(ErrorCode::InvalidParams, "reward overflows");
  }
  if (world.tokens.balance_of(creator) < call.reward + fee) {
    throw Revert(ErrorCode::InsufficientTokens,
                 "need " + std::to_string(call.reward + fee));
  }

  const TaskId id{next_id_++};
  if (fee > 0) ctx.call(address(), token_manager_, BurnFee{creator, fee});
  ctx.call(address(), token_manager_, Freeze{creator, call.reward, id});

  TaskRecord task;
  task.id = id;
  task.creator = creator;
  task.params = TaskParams{call.reward, call.block_limit,
                           call.reputation_requirement,
                           call.creator_public_key, call.payload};
  task.created_block = ctx.block();
  task.expiry_block = ctx.block() + call.block_limit;
  task.frozen_total = call.reward;
  tasks_.emplace(id, task);

  ctx.charge_instantiation(ContractKind::Task);
  ctx.emit(topics::kTaskCreated, address(),
           {{"task", std::to_string(id.value)},
            {"creator", creator.hex()},
            {"reward", std::to_string(call.reward)},
            {"expiry_block", std::to_string(task.expiry_block)},
            {"reputation_requirement",
             std::to_string(call.reputation_requirement)}});
}

// Phase two: a respondent stakes and assigns one of their devices.
void TaskManager::apply(ExecutionContext& ctx, const AcceptTask& call) {
  require_initialized();
  auto& task = existing(call.task);
  if (task.phase != TaskPhase::Created) throw Revert(ErrorCode::TaskNotOpen);
  if (task.expired_at(ctx.block())) throw Revert(ErrorCode::TaskExpired);

  const Address respondent = ctx.sender();
  const auto& world = ctx.world();
  const auto* user = world.users.find(respondent);
  if (user == nullptr) throw Revert(ErrorCode::NotRegistered, respondent.hex());
  if (user->reputation < task.params.reputation_requirement) {
    throw Revert(ErrorCode::InsufficientReputation,
                 std::to_string(user->reputation) + " < " +
                     std::to_string(task.params.reputation_requirement));
  }
  const auto* device = world.devices.find(call.device);
  if (device == nullptr) throw Revert(ErrorCode::UnknownDevice);
  if (device->owner != respondent) throw Revert(ErrorCode::NotDeviceOwner);
  if (!device->active) throw Revert(ErrorCode::DeviceInactive);
  const Tokens stake = stake_for(task.params.reward);
  if (world.tokens.balance_of(respondent) < stake) {
    throw Revert(ErrorCode::InsufficientTokens,
                 "stake of " + std::to_string(stake) + " required");
  }

  ctx.call(address(), token_manager_, Freeze{respondent, stake, task.id});
  task.frozen_total += stake;
  task.phase = TaskPhase::Accepted;
  task.respondent = respondent;
  task.device = call.device;
  ctx.call(address(), device_manager_, AddBacklogEntry{call.device, task.id});
}

// Phase three, success path: the assigned device delivers a signed result
// whose sealed content is already in the result store.
void TaskManager::apply(ExecutionContext& ctx, const SubmitResult& call) {
  require_initialized();
  auto& task = existing(call.task);
  if (task.phase != TaskPhase::Accepted) {
    throw Revert(ErrorCode::TaskNotAccepted);
  }
  if (task.expired_at(ctx.block())) throw Revert(ErrorCode::TaskExpired);
  if (call.device != *task.device) throw Revert(ErrorCode::NotAssignedDevice);

  const auto* device = ctx.world().devices.find(call.device);
  if (device == nullptr) throw Revert(ErrorCode::UnknownDevice);
  auto message = TaskResultObject::signing_message(
      task.id, call.result.encrypted_file_hash, call.result.device_public_key);
  if (!crypto::verify(message, call.result.signature, device->signing_key)) {
    throw Revert(ErrorCode::InvalidSignature);
  }
  if (!ctx.content_available(call.result.encrypted_file_hash)) {
    throw Revert(ErrorCode::ResultNotStored,
                 call.result.encrypted_file_hash.hex());
  }

  const Tokens reward = task.params.reward;
  const Tokens stake = task.frozen_total - reward;
  const Tokens respondent_share =
      reward * setting(settings::kRespondentRewardPercent) / 100;
  Release release{task.id, {{*task.respondent, stake + respondent_share}}, 0};
  if (reward > respondent_share) {
    release.payouts.emplace_back(task.creator, reward - respondent_share);
  }
  ctx.call(address(), token_manager_, release);
  ctx.call(address(), user_manager_, AddReputation{task.creator, 1});
  ctx.call(address(), user_manager_, AddReputation{*task.respondent, 2});
  ctx.call(address(), device_manager_, RecordCompletion{call.device, task.id});
  archive_resolution(ctx, task, call.result);
  ctx.call(address(), user_manager_,
           PushNotification{task.creator, task.id, ctx.block()});
}

// Phase three, expiry path: the creator recovers everything frozen.
void TaskManager::apply(ExecutionContext& ctx, const ReleaseExpired& call) {
  require_initialized();
  auto& task = existing(call.task);
  if (task.phase == TaskPhase::Resolved) {
    throw Revert(ErrorCode::TaskAlreadyResolved);
  }
  if (ctx.sender() != task.creator) throw Revert(ErrorCode::NotCreator);
  if (!task.expired_at(ctx.block())) {
    throw Revert(ErrorCode::TaskNotExpired,
                 "expires after block " + std::to_string(task.expiry_block));
  }
  const Tokens refund = task.frozen_total;
  ctx.call(address(), token_manager_,
           Release{task.id, {{task.creator, refund}}, 0});
  archive_resolution(ctx, task, ExpiredMarker{});
  ctx.emit(topics::kTaskReleased, address(),
           {{"task", std::to_string(task.id.value)},
            {"creator", task.creator.hex()},
            {"refund", std::to_string(refund)}});
}

const TaskRecord* TaskManager::find(TaskId id) const {
  auto it = tasks_.find(id);
  return it == tasks_.end() ? nullptr : &it->second;
}

std::vector<OpenTaskSummary> TaskManager::list_open_tasks(
    BlockNumber current_block, const OpenTaskFilter& filter) const {
  std::vector<OpenTaskSummary> out;
  for (const auto& [id, t] : tasks_) {
    if (t.phase == TaskPhase::Resolved) continue;
    if (filter.max_reputation_requirement &&
        t.params.reputation_requirement > *filter.max_reputation_requirement) {
      continue;
    }
    if (filter.min_reward && t.params.reward < *filter.min_reward) continue;
    if (filter.max_reward && t.params.reward > *filter.max_reward) continue;
    out.push_back(OpenTaskSummary{id, t.creator, t.phase, t.params.reward,
                                  t.params.reputation_requirement,
                                  t.expiry_block, t.expired_at(current_block)});
  }
  return out;
}

const CompletedTaskRecord& TaskManager::get_completed(TaskId id) const {
  auto it = archive_.find(id);
  if (it == archive_.end()) {
    throw UnknownTask("task " + std::to_string(id.value) +
                      " has not been resolved");
  }
  return it->second;
}

TaskRecord& TaskManager::existing(TaskId id) {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) {
    throw Revert(ErrorCode::UnknownTask, std::to_string(id.value));
  }
  return it->second;
}

void TaskManager::archive_resolution(
    ExecutionContext& ctx, TaskRecord& task,
    std::variant<TaskResultObject, ExpiredMarker> result) {
  task.phase = TaskPhase::Resolved;
  archive_.emplace(task.id,
                   CompletedTaskRecord{task.id, task.creator, task.respondent,
                                       task.device, std::move(result),
                                       ctx.block()});
}

void TaskManager::write_canonical(CanonicalWriter& w) const {
  write_base(w);
  w.fixed(user_manager_);
  w.fixed(device_manager_);
  w.fixed(token_manager_);
  w.u64(next_id_);
  w.u32(static_cast<std::uint32_t>(tasks_.size()));
  for (const auto& [id, t] : tasks_) {
    w.u64(id.value);
    w.fixed(t.creator);
    w.u64(t.params.reward);
    w.u64(t.params.block_limit);
    w.u64(t.params.reputation_requirement);
    w.fixed(t.params.creator_public_key);
    w.bytes(t.params.payload);
    w.u8(static_cast<std::uint8_t>(t.phase));
    w.boolean(t.respondent.has_value());
    w.fixed(t.respondent.value_or(Address{}));
    w.boolean(t.device.has_value());
    w.fixed(t.device.value_or(DeviceIdentifier{}));
    w.u64(t.created_block);
    w.u64(t.expiry_block);
    w.u64(t.frozen_total);
  }
  w.u32(static_cast<std::uint32_t>(archive_.size()));
  for (const auto& [id, c] : archive_) {
    w.u64(id.value);
    w.fixed(c.creator);
    w.boolean(c.respondent.has_value());
    w.fixed(c.respondent.value_or(Address{}));
    w.boolean(c.device.has_value());
    w.fixed(c.device.value_or(DeviceIdentifier{}));
    w.u64(c.resolved_block);
    if (const auto* r = std::get_if<TaskResultObject>(&c.result)) {
      w.u8(1);
      w.fixed(r->encrypted_file_hash);
      w.fixed(r->device_public_key);
      w.fixed(r->signature);
    } else {
      w.u8(0);
    }
  }
}

}  // namespace iotchain
