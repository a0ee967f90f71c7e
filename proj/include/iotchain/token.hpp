#pragma once

#include <map>

#include "iotchain/manager.hpp"

namespace iotchain {

// Balances, escrow and burned fees. Supply is conserved:
//   minted == sum(balances) + sum(frozen) + burned
class TokenManager : public ManagerBase {
 public:
  TokenManager()
      : ManagerBase(ContractKind::TokenManager,
                    {{std::string(settings::kTokenPrice), 1},
                     {std::string(settings::kTaskFee), 1}}) {}

  void init(ExecutionContext& ctx, const Init& call);
  void apply(ExecutionContext& ctx, const PurchaseTokens& call);
  void apply(ExecutionContext& ctx, const Freeze& call);
  void apply(ExecutionContext& ctx, const Release& call);
  void apply(ExecutionContext& ctx, const BurnFee& call);

  /// Spendable balance; frozen stakes excluded. Unknown addresses hold 0.
  Tokens balance_of(const Address& address) const;
  Tokens frozen_for(TaskId task) const;
  Tokens total_balances() const;
  Tokens total_frozen() const;
  Tokens minted() const { return minted_; }
  Tokens burned() const { return burned_; }
  Tokens token_price() const { return setting(settings::kTokenPrice); }
  Tokens task_fee() const { return setting(settings::kTaskFee); }
  bool conservation_holds() const {
    return minted_ == total_balances() + total_frozen() + burned_;
  }
  const std::map<Address, Tokens>& balances() const { return balances_; }
  const std::map<TaskId, Tokens>& frozen() const { return frozen_; }

  void write_canonical(CanonicalWriter& w) const;

 private:
  void debit(const Address& from, Tokens amount);

  Address user_manager_;
  Address task_manager_;
  std::map<Address, Tokens> balances_;
  std::map<TaskId, Tokens> frozen_;
  Tokens minted_ = 0;
  Tokens burned_ = 0;
};

}  // namespace iotchain
