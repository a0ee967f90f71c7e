#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "iotchain/manager.hpp"

namespace iotchain {

struct TaskParams {
  Tokens reward = 0;
  BlockNumber block_limit = 0;
  std::uint64_t reputation_requirement = 0;
  crypto::PublicKey creator_public_key;
  Bytes payload;
};

struct TaskRecord {
  TaskId id;
  Address creator;
  TaskParams params;
  TaskPhase phase = TaskPhase::Created;
  std::optional<Address> respondent;
  std::optional<DeviceIdentifier> device;
  BlockNumber created_block = 0;
  BlockNumber expiry_block = 0;
  Tokens frozen_total = 0;

  bool expired_at(BlockNumber block) const { return block > expiry_block; }
};

/// Respondent stake for a reward: half, rounded up.
inline constexpr Tokens stake_for(Tokens reward) { return reward / 2 + reward % 2; }

struct ExpiredMarker {
  friend bool operator==(const ExpiredMarker&, const ExpiredMarker&) = default;
};

struct CompletedTaskRecord {
  TaskId task;
  Address creator;
  std::optional<Address> respondent;
  std::optional<DeviceIdentifier> device;
  std::variant<TaskResultObject, ExpiredMarker> result;
  BlockNumber resolved_block = 0;

  bool completed() const {
    return std::holds_alternative<TaskResultObject>(result);
  }
  friend bool operator==(const CompletedTaskRecord&,
                         const CompletedTaskRecord&) = default;
};

struct OpenTaskSummary {
  TaskId id;
  Address creator;
  TaskPhase phase = TaskPhase::Created;
  Tokens reward = 0;
  std::uint64_t reputation_requirement = 0;
  BlockNumber expiry_block = 0;
  bool expired = false;
};

struct OpenTaskFilter {
  std::optional<std::uint64_t> max_reputation_requirement;
  std::optional<Tokens> min_reward;
  std::optional<Tokens> max_reward;
};

class UnknownTask : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// TaskManager plus the per-task child contracts. A task moves
// Created -> Accepted -> Resolved, or Created -> Resolved on expiry.
class TaskManager : public ManagerBase {
 public:
  TaskManager()
      : ManagerBase(ContractKind::TaskManager,
                    {{std::string(settings::kRespondentRewardPercent), 100}}) {}

  void init(ExecutionContext& ctx, const Init& call);
  void apply(ExecutionContext& ctx, const CreateTask& call);
  void apply(ExecutionContext& ctx, const AcceptTask& call);
  void apply(ExecutionContext& ctx, const SubmitResult& call);
  void apply(ExecutionContext& ctx, const ReleaseExpired& call);

  const TaskRecord* find(TaskId id) const;
  /// Unresolved tasks; expired ones stay listed until released.
  std::vector<OpenTaskSummary> list_open_tasks(
      BlockNumber current_block, const OpenTaskFilter& filter = {}) const;
  /// Throws UnknownTask for ids that were never resolved.
  const CompletedTaskRecord& get_completed(TaskId id) const;
  const std::map<TaskId, TaskRecord>& tasks() const { return tasks_; }
  const std::map<TaskId, CompletedTaskRecord>& archive() const {
    return archive_;
  }
  /// Id the next created task receives.
  TaskId next_task_id() const { return TaskId{next_id_}; }

  void write_canonical(CanonicalWriter& w) const;

 private:
  TaskRecord& existing(TaskId id);
  void archive_resolution(ExecutionContext& ctx, TaskRecord& task,
                          std::variant<TaskResultObject, ExpiredMarker> result);

  Address user_manager_;
  Address device_manager_;
  Address token_manager_;
  std::uint64_t next_id_ = 1;
  std::map<TaskId, TaskRecord> tasks_;
  std::map<TaskId, CompletedTaskRecord> archive_;
};

}  // namespace iotchain
