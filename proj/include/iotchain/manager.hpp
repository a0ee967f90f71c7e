#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "iotchain/calls.hpp"
#include "iotchain/canonical.hpp"
#include "iotchain/context.hpp"

namespace iotchain {

namespace settings {
inline constexpr std::string_view kTokenPrice = "token_price";
inline constexpr std::string_view kTaskFee = "task_fee";
inline constexpr std::string_view kRespondentRewardPercent =
    "respondent_reward_percent";
}  // namespace settings

// Shared lifecycle of the four manager contracts: deployment, pre-init
// configuration, one-shot init and the msg.sender gate.
class ManagerBase {
 public:
  using Settings = std::map<std::string, std::uint64_t, std::less<>>;

  ManagerBase(ContractKind kind, Settings defaults)
      : kind_(kind), settings_(std::move(defaults)) {}

  ContractKind kind() const { return kind_; }
  bool deployed() const { return address_.has_value(); }
  bool initialized() const { return initialized_; }
  // Zero address until deployed.
  Address address() const { return address_.value_or(Address{}); }
  Address deployer() const { return deployer_; }

  std::uint64_t setting(std::string_view key) const;
  const Settings& settings() const { return settings_; }

  void deploy(const Address& address, const Address& deployer);
  void configure(ExecutionContext& ctx, const Configure& call);

 protected:
  void begin_init(ExecutionContext& ctx) const;
  void finish_init(ExecutionContext& ctx);
  void require_initialized() const;
  void require_manager_caller(const ExecutionContext& ctx,
                              const Address& manager) const;
  // Throws InvalidParams unless `ref` is the deployed manager of `kind`.
  static void require_ref(const WorldState& world, const Address& ref,
                          ContractKind kind);
  static void require_system_refs(const WorldState& world, const Init& call);

  void write_base(CanonicalWriter& w) const;

 private:
  ContractKind kind_;
  std::optional<Address> address_;
  Address deployer_;
  bool initialized_ = false;
  Settings settings_;
};

}  // namespace iotchain
