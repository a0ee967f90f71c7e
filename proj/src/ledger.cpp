#include "iotchain/ledger.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace iotchain {

BlockClock::BlockClock(std::uint64_t seed, BlockIntervalRange range)
    : range_(range), rng_(seed) {
  if (!(range.min_seconds <= range.max_seconds) || range.min_seconds < 0) {
    throw std::invalid_argument("block interval range must satisfy 0 <= min <= max");
  }
}

double BlockClock::sample_interval() {
  // 53 random mantissa bits; std::uniform_real_distribution is not
  // specified bit-exactly across standard libraries.
  const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return range_.min_seconds + unit * (range_.max_seconds - range_.min_seconds);
}

BlockNumber BlockClock::advance(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("advance requires n >= 1");
  for (std::uint64_t i = 0; i < n; ++i) elapsed_ += sample_interval();
  block_ += n;
  return block_;
}

Ledger::Ledger(GenesisConfig config)
    : genesis_(config),
      gas_(config.usd_per_100k_gas),
      clock_(config.seed, config.block_interval) {}

Receipt Ledger::submit(const Address& sender, const Address& target,
                       Call call) {
  return submit(Transaction{sender, target, std::move(call), current_block()});
}

Receipt Ledger::submit(const Transaction& tx) {
  std::unique_lock lock(mutex_);
  ++tx_count_;
  Receipt receipt;
  WorldState snapshot = world_;
  const std::size_t first_event = world_.events.size();
  ExecutionContext ctx(world_, clock_.current_block(), tx.sender, gas_,
                       &oracle_);
  try {
    ctx.charge(gas_.call_cost(call_name(tx.call)));
    // Contract accounts have no keys; only their own code can act for them.
    if (world_.manager_at(tx.sender) != nullptr) {
      throw Revert(ErrorCode::Unauthorized,
                   "contract address cannot originate a transaction");
    }
    if (tx.target.is_zero()) {
      const auto* deploy_call = std::get_if<DeployManager>(&tx.call);
      if (deploy_call == nullptr) {
        throw Revert(ErrorCode::UnknownContract,
                     "only deploy may target the zero address");
      }
      deploy(ctx, tx.sender, *deploy_call, receipt);
    } else {
      const bool creates_task = std::holds_alternative<CreateTask>(tx.call);
      const TaskId next = world_.tasks.next_task_id();
      dispatch(ctx, tx.target, tx.call);
      if (creates_task) receipt.created_task = next;
    }
  } catch (const Revert& revert) {
    world_ = std::move(snapshot);
    receipt = Receipt{};
    receipt.status = revert.code();
    receipt.reason = revert.what();
    return receipt;
  }
  receipt.events.assign(world_.events.begin() + first_event,
                        world_.events.end());
  receipt.gas = ctx.gas_used();
  return receipt;
}

void Ledger::deploy(ExecutionContext& ctx, const Address& deployer,
                    const DeployManager& call, Receipt& receipt) {
  auto* manager = world_.manager_of(call.kind);
  if (manager == nullptr) {
    throw Revert(ErrorCode::InvalidParams, "only managers are deployable");
  }
  if (manager->deployed()) throw Revert(ErrorCode::AlreadyDeployed);
  Bytes material = to_bytes("iotchain/contract");
  append(material, deployer.view());
  append_u64_be(material, world_.deploy_nonce++);
  auto digest = crypto::hash_content(material);
  auto address = Address::from_view(digest.view().first(Address::kSize));
  manager->deploy(address, deployer);
  ctx.charge_instantiation(call.kind);
  ctx.emit(topics::kManagerDeployed, address,
           {{"kind", std::string(to_string(call.kind))},
            {"deployer", deployer.hex()}});
  receipt.created_contract = address;
}

BlockNumber Ledger::advance_blocks(std::uint64_t n) {
  std::unique_lock lock(mutex_);
  return clock_.advance(n);
}

BlockNumber Ledger::current_block() const {
  std::shared_lock lock(mutex_);
  return clock_.current_block();
}

double Ledger::elapsed_seconds() const {
  std::shared_lock lock(mutex_);
  return clock_.elapsed_seconds();
}

std::vector<EventRecord> Ledger::poll_events(EventCursor after,
                                             const TopicSet& topics) const {
  std::shared_lock lock(mutex_);
  const auto& log = world_.events;
  auto first = std::upper_bound(
      log.begin(), log.end(), after,
      [](const EventCursor& c, const EventRecord& e) { return c < e.cursor(); });
  std::vector<EventRecord> out;
  for (auto it = first; it != log.end(); ++it) {
    if (topics.empty() || topics.contains(it->topic)) out.push_back(*it);
  }
  return out;
}

void Ledger::set_call_cost(std::string_view operation, std::uint64_t gas) {
  std::unique_lock lock(mutex_);
  gas_.set_call_cost(operation, gas);
}

ContentHash Ledger::state_digest() const {
  return crypto::hash_content(canonical_state());
}

Bytes Ledger::canonical_state() const {
  std::shared_lock lock(mutex_);
  return world_.canonical();
}

void Ledger::set_content_oracle(ContentOracle oracle) {
  std::unique_lock lock(mutex_);
  oracle_ = std::move(oracle);
}

std::optional<TaskRecord> Ledger::task(TaskId id) const {
  std::shared_lock lock(mutex_);
  const auto* t = world_.tasks.find(id);
  return t ? std::optional(*t) : std::nullopt;
}

std::optional<DeviceRecord> Ledger::device(const DeviceIdentifier& id) const {
  std::shared_lock lock(mutex_);
  const auto* d = world_.devices.find(id);
  return d ? std::optional(*d) : std::nullopt;
}

std::optional<UserRecord> Ledger::user(const Address& address) const {
  std::shared_lock lock(mutex_);
  const auto* u = world_.users.find(address);
  return u ? std::optional(*u) : std::nullopt;
}

Tokens Ledger::balance_of(const Address& address) const {
  std::shared_lock lock(mutex_);
  return world_.tokens.balance_of(address);
}

Address Ledger::manager_address(ContractKind kind) const {
  std::shared_lock lock(mutex_);
  const auto* m = world_.manager_of(kind);
  return m ? m->address() : Address{};
}

std::uint64_t Ledger::transaction_count() const {
  std::shared_lock lock(mutex_);
  return tx_count_;
}

SystemAddresses deploy_system(Ledger& ledger, const Address& deployer,
                              const SystemSettings& settings) {
  auto require_ok = [](const Receipt& r, std::string_view step) {
    if (!r.ok()) {
      throw std::runtime_error("deploy_system: " + std::string(step) +
                               " failed: " + r.reason);
    }
    return r;
  };
  SystemAddresses sys;
  auto deploy = [&](ContractKind kind) {
    auto r = require_ok(ledger.submit(deployer, Address{}, DeployManager{kind}),
                        to_string(kind));
    return *r.created_contract;
  };
  sys.user_manager = deploy(ContractKind::UserManager);
  sys.device_manager = deploy(ContractKind::DeviceManager);
  sys.task_manager = deploy(ContractKind::TaskManager);
  sys.token_manager = deploy(ContractKind::TokenManager);

  require_ok(ledger.submit(deployer, sys.token_manager,
                           Configure{{{std::string(settings::kTokenPrice),
                                       settings.token_price},
                                      {std::string(settings::kTaskFee),
                                       settings.task_fee}}}),
             "configure TokenManager");
  require_ok(
      ledger.submit(deployer, sys.task_manager,
                    Configure{{{std::string(settings::kRespondentRewardPercent),
                                settings.respondent_reward_percent}}}),
      "configure TaskManager");

  for (const auto& target : {sys.user_manager, sys.device_manager,
                             sys.task_manager, sys.token_manager}) {
    require_ok(ledger.submit(deployer, target, sys.init_call()), "init");
  }
  return sys;
}

Address address_for(std::string_view label) {
  Bytes material = to_bytes("iotchain/actor/");
  append(material, as_bytes(label));
  return Address::from_view(
      crypto::hash_content(material).view().first(Address::kSize));
}

}  // namespace iotchain
