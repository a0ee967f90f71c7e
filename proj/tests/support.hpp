#pragma once

#include <string>

#include "iotchain/device_agent.hpp"
#include "iotchain/ledger.hpp"
#include "iotchain/registry.hpp"
#include "iotchain/result_store.hpp"

namespace iotchain::testing {

inline crypto::KeyPair keypair_for(std::string_view label) {
  return crypto::generate_keypair(crypto::derive_seed(as_bytes(label)));
}

struct StoreAdapter final : agent::StorePort {
  explicit StoreAdapter(ResultStore& s) : store(s) {}
  ContentHash put(ByteView blob) override { return store.put(blob); }
  ResultStore& store;
};

// A deployed and initialized system with helpers for the common calls.
struct TestChain {
  explicit TestChain(SystemSettings settings = {}, GenesisConfig genesis = {})
      : ledger(genesis) {
    ledger.set_content_oracle(
        [this](const ContentHash& h) { return store.has(h); });
    sys = deploy_system(ledger, deployer, settings);
  }

  Receipt register_user(const Address& who) {
    return ledger.submit(who, sys.user_manager, RegisterUser{});
  }
  Receipt purchase(const Address& who, std::uint64_t payment) {
    return ledger.submit(who, sys.token_manager, PurchaseTokens{payment});
  }
  Receipt register_device(const Address& owner, const DeviceIdentifier& id,
                          const crypto::PublicKey& signing_key) {
    return ledger.submit(owner, sys.device_manager,
                         RegisterDevice{id, signing_key});
  }
  Receipt create_task(const Address& creator, Tokens reward,
                      BlockNumber block_limit, const crypto::PublicKey& pk,
                      std::uint64_t requirement = 0,
                      std::string_view payload = "read channel=temperature") {
    return ledger.submit(creator, sys.task_manager,
                         CreateTask{reward, block_limit, requirement, pk,
                                    to_bytes(payload)});
  }
  Receipt accept(const Address& who, TaskId task, const DeviceIdentifier& d) {
    return ledger.submit(who, sys.task_manager, AcceptTask{task, d});
  }
  Receipt submit_result(const Address& who, TaskId task,
                        const DeviceIdentifier& d,
                        const TaskResultObject& result) {
    return ledger.submit(who, sys.task_manager, SubmitResult{task, d, result});
  }
  Receipt release(const Address& who, TaskId task) {
    return ledger.submit(who, sys.task_manager, ReleaseExpired{task});
  }

  // Seals `plaintext` for the task and stores it, returning a result object
  // signed by `device_key`.
  TaskResultObject make_result(TaskId task, const crypto::KeyPair& device_key,
                               std::string_view plaintext = "reading") {
    auto record = ledger.task(task);
    if (!record) throw std::logic_error("make_result: unknown task");
    StoreAdapter port(store);
    return agent::package_result(*record, as_bytes(plaintext), device_key,
                                 std::nullopt, port);
  }

  ResultStore store;
  Ledger ledger;
  Address deployer = address_for("deployer");
  SystemAddresses sys;
};

}  // namespace iotchain::testing
