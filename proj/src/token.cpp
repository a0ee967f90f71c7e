#include "iotchain/token.hpp"

#include <numeric>

#include "iotchain/errors.hpp"
#include "iotchain/world.hpp"

namespace iotchain {

void TokenManager::init(ExecutionContext& ctx, const Init& call) {
  begin_init(ctx);
  require_system_refs(ctx.world(), call);
  user_manager_ = call.user_manager;
  task_manager_ = call.task_manager;
  finish_init(ctx);
}

void TokenManager::apply(ExecutionContext& ctx, const PurchaseTokens& call) {
  require_initialized();
  const Address buyer = ctx.sender();
  if (!ctx.world().users.is_registered(buyer)) {
    throw Revert(ErrorCode::NotRegistered, buyer.hex());
  }
  const Tokens price = token_price();
  if (call.payment == 0 || call.payment % price != 0) {
    throw Revert(ErrorCode::InvalidPayment,
                 "payment must be a positive multiple of " +
                     std::to_string(price));
  }
  const Tokens amount = call.payment / price;
  if (minted_ + amount < minted_) {
    throw Revert(ErrorCode::InvalidPayment, "supply overflow");
  }
  balances_[buyer] += amount;
  minted_ += amount;
  ctx.emit(topics::kTokensPurchased, address(),
           {{"buyer", buyer.hex()},
            {"payment", std::to_string(call.payment)},
            {"tokens", std::to_string(amount)}});
}

void TokenManager::apply(ExecutionContext& ctx, const Freeze& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  if (call.amount == 0) {
    throw Revert(ErrorCode::InvalidParams, "freeze amount must be positive");
  }
  debit(call.from, call.amount);
  frozen_[call.task] += call.amount;
}

void TokenManager::apply(ExecutionContext& ctx, const Release& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  auto it = frozen_.find(call.task);
  if (it == frozen_.end()) {
    throw Revert(ErrorCode::UnknownTask, "nothing frozen for task " +
                                             std::to_string(call.task.value));
  }
  Tokens total = call.burn;
  for (const auto& [to, amount] : call.payouts) {
    if (total + amount < total) throw Revert(ErrorCode::UnbalancedRelease);
    total += amount;
  }
  if (total != it->second) {
    throw Revert(ErrorCode::UnbalancedRelease,
                 "release of " + std::to_string(total) + " against frozen " +
                     std::to_string(it->second));
  }
  for (const auto& [to, amount] : call.payouts) balances_[to] += amount;
  burned_ += call.burn;
  frozen_.erase(it);
}

void TokenManager::apply(ExecutionContext& ctx, const BurnFee& call) {
  require_initialized();
  require_manager_caller(ctx, task_manager_);
  debit(call.from, call.amount);
  burned_ += call.amount;
}

Tokens TokenManager::balance_of(const Address& address) const {
  auto it = balances_.find(address);
  return it == balances_.end() ? 0 : it->second;
}

Tokens TokenManager::frozen_for(TaskId task) const {
  auto it = frozen_.find(task);
  return it == frozen_.end() ? 0 : it->second;
}

Tokens TokenManager::total_balances() const {
  return std::accumulate(
      balances_.begin(), balances_.end(), Tokens{0},
      [](Tokens acc, const auto& entry) { return acc + entry.second; });
}

Tokens TokenManager::total_frozen() const {
  return std::accumulate(
      frozen_.begin(), frozen_.end(), Tokens{0},
      [](Tokens acc, const auto& entry) { return acc + entry.second; });
}

void TokenManager::debit(const Address& from, Tokens amount) {
  if (amount == 0) return;
  auto it = balances_.find(from);
  Tokens have = it == balances_.end() ? 0 : it->second;
  if (have < amount) {
    throw Revert(ErrorCode::InsufficientTokens,
                 "balance " + std::to_string(have) + " < " +
                     std::to_string(amount));
  }
  it->second -= amount;
}

void TokenManager::write_canonical(CanonicalWriter& w) const {
  write_base(w);
  w.fixed(user_manager_);
  w.fixed(task_manager_);
  w.u64(minted_);
  w.u64(burned_);
  w.u32(static_cast<std::uint32_t>(balances_.size()));
  for (const auto& [addr, amount] : balances_) {
    w.fixed(addr);
    w.u64(amount);
  }
  w.u32(static_cast<std::uint32_t>(frozen_.size()));
  for (const auto& [task, amount] : frozen_) {
    w.u64(task.value);
    w.u64(amount);
  }
}

}  // namespace iotchain
