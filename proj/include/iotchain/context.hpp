#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "iotchain/calls.hpp"
#include "iotchain/gas.hpp"
#include "iotchain/types.hpp"

namespace iotchain {

struct WorldState;

/// Answers whether content is retrievable from the result store.
using ContentOracle = std::function<bool(const ContentHash&)>;

// State of one transaction while it is being applied. Tracks the msg.sender
// stack for cross-contract calls and the gas charged so far.
class ExecutionContext {
 public:
  ExecutionContext(WorldState& world, BlockNumber block, const Address& origin,
                   const GasSchedule& gas, const ContentOracle* oracle);

  /// msg.sender of the innermost frame.
  const Address& sender() const { return frames_.back(); }
  const Address& origin() const { return frames_.front(); }
  BlockNumber block() const { return block_; }
  WorldState& world() { return world_; }
  const WorldState& world() const { return world_; }

  void emit(std::string_view topic, const Address& emitter,
            EventFields payload);
  void charge_instantiation(ContractKind kind);
  void charge(std::uint64_t gas) { gas_used_ += gas; }
  std::uint64_t gas_used() const { return gas_used_; }

  /// Cross-contract call; the callee sees `from` as msg.sender.
  void call(const Address& from, const Address& target, const Call& call);

  bool content_available(const ContentHash& hash) const;

 private:
  WorldState& world_;
  BlockNumber block_;
  const GasSchedule& gas_;
  const ContentOracle* oracle_;
  std::vector<Address> frames_;
  std::uint64_t gas_used_ = 0;
};

/// Routes a call to the manager deployed at `target`.
/// Throws Revert(UnknownContract) or Revert(UnknownOperation).
void dispatch(ExecutionContext& ctx, const Address& target, const Call& call);

}  // namespace iotchain
