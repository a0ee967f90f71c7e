#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "iotchain/types.hpp"

namespace iotchain {

/// Least-squares fit of the published dollar figures against their gas
/// values; reproduces every figure to within $0.001.
inline constexpr double kFittedUsdPer100kGas = 0.47777;
/// The rounded figure quoted alongside the published table.
inline constexpr double kQuotedUsdPer100kGas = 0.4787;

class UnknownKind : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InstantiationCost {
  std::uint64_t gas = 0;
  double usd = 0.0;
};

// Gas is metered for contract instantiation only. Calls cost 0 unless a
// per-operation cost is registered through set_call_cost.
class GasSchedule {
 public:
  GasSchedule() : GasSchedule(kFittedUsdPer100kGas) {}
  explicit GasSchedule(double usd_per_100k_gas);

  std::uint64_t instantiation_gas(ContractKind kind) const {
    return gas_[static_cast<std::size_t>(kind)];
  }
  InstantiationCost instantiation_cost(ContractKind kind) const;
  // Throws UnknownKind.
  InstantiationCost instantiation_cost(std::string_view kind_name) const;

  double usd(std::uint64_t gas) const;
  static double round_usd(double usd);
  double usd_per_100k_gas() const { return usd_per_100k_; }

  void set_call_cost(std::string_view operation, std::uint64_t gas);
  std::uint64_t call_cost(std::string_view operation) const;

 private:
  std::array<std::uint64_t, 7> gas_;
  double usd_per_100k_;
  std::map<std::string, std::uint64_t, std::less<>> call_costs_;
};

}  // namespace iotchain
