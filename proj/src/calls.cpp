#include "iotchain/calls.hpp"

#include <charconv>
#include <type_traits>

#include "iotchain/errors.hpp"

namespace iotchain {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const std::string& require(const CallArgs& args, const std::string& key) {
  auto it = args.find(key);
  if (it == args.end()) {
    throw Revert(ErrorCode::MalformedCall, "missing argument '" + key + "'");
  }
  return it->second;
}

std::uint64_t parse_u64(std::string_view text, std::string_view key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Revert(ErrorCode::MalformedCall,
                 "argument '" + std::string(key) + "' is not an integer");
  }
  return v;
}

std::uint64_t u64_arg(const CallArgs& args, const std::string& key) {
  return parse_u64(require(args, key), key);
}

template <typename Fixed>
Fixed fixed_arg(const CallArgs& args, const std::string& key) {
  try {
    return Fixed::from_hex(require(args, key));
  } catch (const std::invalid_argument& e) {
    throw Revert(ErrorCode::MalformedCall,
                 "argument '" + key + "': " + e.what());
  }
}

Bytes bytes_arg(const CallArgs& args, const std::string& key) {
  try {
    return from_hex(require(args, key));
  } catch (const std::invalid_argument& e) {
    throw Revert(ErrorCode::MalformedCall,
                 "argument '" + key + "': " + e.what());
  }
}

bool bool_arg(const CallArgs& args, const std::string& key) {
  const auto& v = require(args, key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw Revert(ErrorCode::MalformedCall,
               "argument '" + key + "' must be true or false");
}

std::string encode_payouts(
    const std::vector<std::pair<Address, Tokens>>& payouts) {
  std::string out;
  for (const auto& [addr, amount] : payouts) {
    if (!out.empty()) out += ',';
    out += addr.hex() + ':' + std::to_string(amount);
  }
  return out;
}

std::vector<std::pair<Address, Tokens>> decode_payouts(std::string_view text) {
  std::vector<std::pair<Address, Tokens>> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Revert(ErrorCode::MalformedCall, "payout entry lacks ':'");
    }
    try {
      out.emplace_back(Address::from_hex(item.substr(0, colon)),
                       parse_u64(item.substr(colon + 1), "payouts"));
    } catch (const std::invalid_argument& e) {
      throw Revert(ErrorCode::MalformedCall,
                   std::string("payout address: ") + e.what());
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string kind_name(ContractKind k) { return std::string(to_string(k)); }

}  // namespace

std::string_view call_name(const Call& call) {
  return std::visit(
      [](const auto& c) { return std::decay_t<decltype(c)>::kName; }, call);
}

std::optional<ContractKind> call_target_kind(const Call& call) {
  return std::visit(
      Overloaded{
          [](const DeployManager&) { return kAnyManager; },
          [](const Configure&) { return kAnyManager; },
          [](const Init&) { return kAnyManager; },
          [](const RegisterUser&) {
            return std::optional(ContractKind::UserManager);
          },
          [](const AddReputation&) {
            return std::optional(ContractKind::UserManager);
          },
          [](const PushNotification&) {
            return std::optional(ContractKind::UserManager);
          },
          [](const RegisterDevice&) {
            return std::optional(ContractKind::DeviceManager);
          },
          [](const SetDeviceActive&) {
            return std::optional(ContractKind::DeviceManager);
          },
          [](const AddBacklogEntry&) {
            return std::optional(ContractKind::DeviceManager);
          },
          [](const RecordCompletion&) {
            return std::optional(ContractKind::DeviceManager);
          },
          [](const PurchaseTokens&) {
            return std::optional(ContractKind::TokenManager);
          },
          [](const Freeze&) {
            return std::optional(ContractKind::TokenManager);
          },
          [](const Release&) {
            return std::optional(ContractKind::TokenManager);
          },
          [](const BurnFee&) {
            return std::optional(ContractKind::TokenManager);
          },
          [](const CreateTask&) {
            return std::optional(ContractKind::TaskManager);
          },
          [](const AcceptTask&) {
            return std::optional(ContractKind::TaskManager);
          },
          [](const SubmitResult&) {
            return std::optional(ContractKind::TaskManager);
          },
          [](const ReleaseExpired&) {
            return std::optional(ContractKind::TaskManager);
          },
      },
      call);
}

CallArgs encode_args(const Call& call) {
  return std::visit(
      Overloaded{
          [](const DeployManager& c) {
            return CallArgs{{"kind", kind_name(c.kind)}};
          },
          [](const Configure& c) {
            CallArgs a;
            for (const auto& [k, v] : c.settings) a[k] = std::to_string(v);
            return a;
          },
          [](const Init& c) {
            return CallArgs{{"user_manager", c.user_manager.hex()},
                            {"device_manager", c.device_manager.hex()},
                            {"task_manager", c.task_manager.hex()},
                            {"token_manager", c.token_manager.hex()}};
          },
          [](const RegisterUser&) { return CallArgs{}; },
          [](const RegisterDevice& c) {
            return CallArgs{{"identifier", c.identifier.hex()},
                            {"signing_key", c.signing_key.hex()}};
          },
          [](const SetDeviceActive& c) {
            return CallArgs{{"identifier", c.identifier.hex()},
                            {"active", c.active ? "true" : "false"}};
          },
          [](const PurchaseTokens& c) {
            return CallArgs{{"payment", std::to_string(c.payment)}};
          },
          [](const CreateTask& c) {
            return CallArgs{
                {"reward", std::to_string(c.reward)},
                {"block_limit", std::to_string(c.block_limit)},
                {"reputation_requirement",
                 std::to_string(c.reputation_requirement)},
                {"creator_public_key", c.creator_public_key.hex()},
                {"payload", to_hex(c.payload)}};
          },
          [](const AcceptTask& c) {
            return CallArgs{{"task", std::to_string(c.task.value)},
                            {"device", c.device.hex()}};
          },
          [](const SubmitResult& c) {
            return CallArgs{
                {"task", std::to_string(c.task.value)},
                {"device", c.device.hex()},
                {"file_hash", c.result.encrypted_file_hash.hex()},
                {"device_public_key", c.result.device_public_key.hex()},
                {"signature", c.result.signature.hex()}};
          },
          [](const ReleaseExpired& c) {
            return CallArgs{{"task", std::to_string(c.task.value)}};
          },
          [](const AddBacklogEntry& c) {
            return CallArgs{{"device", c.device.hex()},
                            {"task", std::to_string(c.task.value)}};
          },
          [](const RecordCompletion& c) {
            return CallArgs{{"device", c.device.hex()},
                            {"task", std::to_string(c.task.value)}};
          },
          [](const AddReputation& c) {
            return CallArgs{{"user", c.user.hex()},
                            {"points", std::to_string(c.points)}};
          },
          [](const PushNotification& c) {
            return CallArgs{{"user", c.user.hex()},
                            {"task", std::to_string(c.task.value)},
                            {"resolved_block", std::to_string(c.resolved_block)}};
          },
          [](const Freeze& c) {
            return CallArgs{{"from", c.from.hex()},
                            {"amount", std::to_string(c.amount)},
                            {"task", std::to_string(c.task.value)}};
          },
          [](const Release& c) {
            return CallArgs{{"task", std::to_string(c.task.value)},
                            {"payouts", encode_payouts(c.payouts)},
                            {"burn", std::to_string(c.burn)}};
          },
          [](const BurnFee& c) {
            return CallArgs{{"from", c.from.hex()},
                            {"amount", std::to_string(c.amount)}};
          },
      },
      call);
}

Call decode_call(std::string_view name, const CallArgs& a) {
  auto task_arg = [&](const std::string& key) {
    return TaskId{u64_arg(a, key)};
  };
  if (name == DeployManager::kName) {
    auto kind = contract_kind_from_string(require(a, "kind"));
    if (!kind || !is_manager(*kind)) {
      throw Revert(ErrorCode::MalformedCall, "unknown manager kind");
    }
    return DeployManager{*kind};
  }
  if (name == Configure::kName) {
    Configure c;
    for (const auto& [k, v] : a) c.settings[k] = parse_u64(v, k);
    return c;
  }
  if (name == Init::kName) {
    return Init{fixed_arg<Address>(a, "user_manager"),
                fixed_arg<Address>(a, "device_manager"),
                fixed_arg<Address>(a, "task_manager"),
                fixed_arg<Address>(a, "token_manager")};
  }
  if (name == RegisterUser::kName) return RegisterUser{};
  if (name == RegisterDevice::kName) {
    return RegisterDevice{fixed_arg<DeviceIdentifier>(a, "identifier"),
                          fixed_arg<crypto::PublicKey>(a, "signing_key")};
  }
  if (name == SetDeviceActive::kName) {
    return SetDeviceActive{fixed_arg<DeviceIdentifier>(a, "identifier"),
                           bool_arg(a, "active")};
  }
  if (name == PurchaseTokens::kName) {
    return PurchaseTokens{u64_arg(a, "payment")};
  }
  if (name == CreateTask::kName) {
    return CreateTask{u64_arg(a, "reward"), u64_arg(a, "block_limit"),
                      u64_arg(a, "reputation_requirement"),
                      fixed_arg<crypto::PublicKey>(a, "creator_public_key"),
                      bytes_arg(a, "payload")};
  }
  if (name == AcceptTask::kName) {
    return AcceptTask{task_arg("task"), fixed_arg<DeviceIdentifier>(a, "device")};
  }
  if (name == SubmitResult::kName) {
    return SubmitResult{
        task_arg("task"), fixed_arg<DeviceIdentifier>(a, "device"),
        TaskResultObject{fixed_arg<ContentHash>(a, "file_hash"),
                         fixed_arg<crypto::PublicKey>(a, "device_public_key"),
                         fixed_arg<crypto::Signature>(a, "signature")}};
  }
  if (name == ReleaseExpired::kName) return ReleaseExpired{task_arg("task")};
  if (name == AddBacklogEntry::kName) {
    return AddBacklogEntry{fixed_arg<DeviceIdentifier>(a, "device"),
                           task_arg("task")};
  }
  if (name == RecordCompletion::kName) {
    return RecordCompletion{fixed_arg<DeviceIdentifier>(a, "device"),
                            task_arg("task")};
  }
  if (name == AddReputation::kName) {
    return AddReputation{fixed_arg<Address>(a, "user"), u64_arg(a, "points")};
  }
  if (name == PushNotification::kName) {
    return PushNotification{fixed_arg<Address>(a, "user"), task_arg("task"),
                            u64_arg(a, "resolved_block")};
  }
  if (name == Freeze::kName) {
    return Freeze{fixed_arg<Address>(a, "from"), u64_arg(a, "amount"),
                  task_arg("task")};
  }
  if (name == Release::kName) {
    return Release{task_arg("task"), decode_payouts(require(a, "payouts")),
                   u64_arg(a, "burn")};
  }
  if (name == BurnFee::kName) {
    return BurnFee{fixed_arg<Address>(a, "from"), u64_arg(a, "amount")};
  }
  throw Revert(ErrorCode::UnknownOperation,
               "unknown operation '" + std::string(name) + "'");
}

}  // namespace iotchain
