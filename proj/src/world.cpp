#include "iotchain/world.hpp"

#include <type_traits>

#include "iotchain/errors.hpp"

namespace iotchain {

ExecutionContext::ExecutionContext(WorldState& world, BlockNumber block,
                                   const Address& origin,
                                   const GasSchedule& gas,
                                   const ContentOracle* oracle)
    : world_(world), block_(block), gas_(gas), oracle_(oracle) {
  frames_.push_back(origin);
}

void ExecutionContext::emit(std::string_view topic, const Address& emitter,
                            EventFields payload) {
  auto& log = world_.events;
  std::uint32_t sequence = 1;
  if (!log.empty() && log.back().block == block_) {
    sequence = log.back().sequence + 1;
  }
  log.push_back(EventRecord{std::string(topic), emitter, std::move(payload),
                            block_, sequence});
}

void ExecutionContext::charge_instantiation(ContractKind kind) {
  gas_used_ += gas_.instantiation_gas(kind);
  ++world_.instantiations[kind];
}

void ExecutionContext::call(const Address& from, const Address& target,
                            const Call& call) {
  struct FrameGuard {
    std::vector<Address>& frames;
    ~FrameGuard() { frames.pop_back(); }
  };
  frames_.push_back(from);
  FrameGuard guard{frames_};
  gas_used_ += gas_.call_cost(call_name(call));
  dispatch(*this, target, call);
}

bool ExecutionContext::content_available(const ContentHash& hash) const {
  return oracle_ != nullptr && *oracle_ && (*oracle_)(hash);
}

void dispatch(ExecutionContext& ctx, const Address& target, const Call& call) {
  auto& world = ctx.world();
  ManagerBase* manager = world.manager_at(target);
  if (manager == nullptr) {
    throw Revert(ErrorCode::UnknownContract, "no contract at " + target.hex());
  }
  if (std::holds_alternative<DeployManager>(call)) {
    throw Revert(ErrorCode::UnknownOperation,
                 "deploy must target the zero address");
  }
  if (const auto* c = std::get_if<Configure>(&call)) {
    manager->configure(ctx, *c);
    return;
  }
  if (const auto* c = std::get_if<Init>(&call)) {
    switch (manager->kind()) {
      case ContractKind::UserManager:
        world.users.init(ctx, *c);
        return;
      case ContractKind::DeviceManager:
        world.devices.init(ctx, *c);
        return;
      case ContractKind::TaskManager:
        world.tasks.init(ctx, *c);
        return;
      case ContractKind::TokenManager:
        world.tokens.init(ctx, *c);
        return;
      default:
        break;
    }
    throw Revert(ErrorCode::UnknownOperation);
  }
  if (call_target_kind(call) != manager->kind()) {
    throw Revert(ErrorCode::UnknownOperation,
                 std::string(call_name(call)) + " is not implemented by " +
                     std::string(to_string(manager->kind())));
  }
  std::visit(
      [&](const auto& c) {
        if constexpr (requires { world.users.apply(ctx, c); }) {
          world.users.apply(ctx, c);
        } else if constexpr (requires { world.devices.apply(ctx, c); }) {
          world.devices.apply(ctx, c);
        } else if constexpr (requires { world.tasks.apply(ctx, c); }) {
          world.tasks.apply(ctx, c);
        } else if constexpr (requires { world.tokens.apply(ctx, c); }) {
          world.tokens.apply(ctx, c);
        } else {
          throw Revert(ErrorCode::UnknownOperation);
        }
      },
      call);
}

ManagerBase* WorldState::manager_at(const Address& address) {
  for (auto kind : kManagerKinds) {
    auto* m = manager_of(kind);
    if (m->deployed() && m->address() == address) return m;
  }
  return nullptr;
}

ManagerBase* WorldState::manager_of(ContractKind kind) {
  return const_cast<ManagerBase*>(std::as_const(*this).manager_of(kind));
}

const ManagerBase* WorldState::manager_of(ContractKind kind) const {
  switch (kind) {
    case ContractKind::UserManager:
      return &users;
    case ContractKind::DeviceManager:
      return &devices;
    case ContractKind::TaskManager:
      return &tasks;
    case ContractKind::TokenManager:
      return &tokens;
    default:
      return nullptr;
  }
}

Bytes WorldState::canonical() const {
  CanonicalWriter w;
  w.str("IOTC-STATE");
  w.u8(1);
  w.u64(deploy_nonce);
  users.write_canonical(w);
  devices.write_canonical(w);
  tasks.write_canonical(w);
  tokens.write_canonical(w);

  w.u32(static_cast<std::uint32_t>(events.size()));
  for (const auto& e : events) {
    w.str(e.topic);
    w.fixed(e.emitter);
    w.u64(e.block);
    w.u32(e.sequence);
    w.u32(static_cast<std::uint32_t>(e.payload.size()));
    for (const auto& [k, v] : e.payload) {
      w.str(k);
      w.str(v);
    }
  }

  w.u32(static_cast<std::uint32_t>(instantiations.size()));
  for (const auto& [kind, count] : instantiations) {
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(count);
  }
  return w.buffer();
}

// ManagerBase

std::uint64_t ManagerBase::setting(std::string_view key) const {
  auto it = settings_.find(key);
  return it == settings_.end() ? 0 : it->second;
}

void ManagerBase::deploy(const Address& address, const Address& deployer) {
  address_ = address;
  deployer_ = deployer;
}

void ManagerBase::configure(ExecutionContext& ctx, const Configure& call) {
  if (ctx.sender() != deployer_) {
    throw Revert(ErrorCode::Unauthorized, "only the deployer may configure");
  }
  if (initialized_) {
    throw Revert(ErrorCode::AlreadyInitialized,
                 "static variables are locked by init");
  }
  for (const auto& [key, value] : call.settings) {
    auto it = settings_.find(key);
    if (it == settings_.end()) {
      throw Revert(ErrorCode::InvalidParams, "unknown setting '" + key + "'");
    }
    if (key == settings::kTokenPrice && value == 0) {
      throw Revert(ErrorCode::InvalidParams, "token_price must be positive");
    }
    if (key == settings::kRespondentRewardPercent && value > 100) {
      throw Revert(ErrorCode::InvalidParams,
                   "respondent_reward_percent must be <= 100");
    }
  }
  for (const auto& [key, value] : call.settings) {
    settings_.find(key)->second = value;
  }
}

void ManagerBase::begin_init(ExecutionContext& ctx) const {
  if (ctx.sender() != deployer_) {
    throw Revert(ErrorCode::Unauthorized, "only the deployer may init");
  }
  if (initialized_) throw Revert(ErrorCode::AlreadyInitialized);
}

void ManagerBase::finish_init(ExecutionContext& ctx) {
  initialized_ = true;
  ctx.emit(topics::kManagerInitialized, address(),
           {{"kind", std::string(to_string(kind_))}});
}

void ManagerBase::require_initialized() const {
  if (!initialized_) throw Revert(ErrorCode::NotInitialized);
}

void ManagerBase::require_manager_caller(const ExecutionContext& ctx,
                                         const Address& manager) const {
  if (ctx.sender() != manager) {
    throw Revert(ErrorCode::Unauthorized,
                 "caller " + ctx.sender().hex() + " is not the TaskManager");
  }
}

void ManagerBase::require_ref(const WorldState& world, const Address& ref,
                              ContractKind kind) {
  const auto* m = world.manager_of(kind);
  if (m == nullptr || !m->deployed() || m->address() != ref) {
    throw Revert(ErrorCode::InvalidParams,
                 std::string(to_string(kind)) + " reference does not match");
  }
}

void ManagerBase::require_system_refs(const WorldState& world,
                                      const Init& call) {
  require_ref(world, call.user_manager, ContractKind::UserManager);
  require_ref(world, call.device_manager, ContractKind::DeviceManager);
  require_ref(world, call.task_manager, ContractKind::TaskManager);
  require_ref(world, call.token_manager, ContractKind::TokenManager);
}

void ManagerBase::write_base(CanonicalWriter& w) const {
  w.u8(static_cast<std::uint8_t>(kind_));
  w.boolean(deployed());
  w.fixed(address());
  w.fixed(deployer_);
  w.boolean(initialized_);
  w.u32(static_cast<std::uint32_t>(settings_.size()));
  for (const auto& [k, v] : settings_) {
    w.str(k);
    w.u64(v);
  }
}

}  // namespace iotchain
