#include "iotchain/gas.hpp"

#include <cmath>

namespace iotchain {

GasSchedule::GasSchedule(double usd_per_100k_gas)
    : gas_{530'579, 1'097'206, 3'052'709, 413'560, 273'931, 446'652, 554'883},
      usd_per_100k_(usd_per_100k_gas) {}

InstantiationCost GasSchedule::instantiation_cost(ContractKind kind) const {
  auto gas = instantiation_gas(kind);
  return {gas, round_usd(usd(gas))};
}

InstantiationCost GasSchedule::instantiation_cost(
    std::string_view kind_name) const {
  auto kind = contract_kind_from_string(kind_name);
  if (!kind) {
    throw UnknownKind("unknown contract kind '" + std::string(kind_name) + "'");
  }
  return instantiation_cost(*kind);
}

double GasSchedule::usd(std::uint64_t gas) const {
  return static_cast<double>(gas) * usd_per_100k_ / 100'000.0;
}

double GasSchedule::round_usd(double usd) {
  return std::round(usd * 1000.0) / 1000.0;
}

void GasSchedule::set_call_cost(std::string_view operation, std::uint64_t gas) {
  call_costs_[std::string(operation)] = gas;
}

std::uint64_t GasSchedule::call_cost(std::string_view operation) const {
  auto it = call_costs_.find(operation);
  return it == call_costs_.end() ? 0 : it->second;
}

}  // namespace iotchain
