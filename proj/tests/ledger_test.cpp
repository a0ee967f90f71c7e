#include <gtest/gtest.h>

#include "iotchain/ledger.hpp"
#include "support.hpp"

namespace iotchain {
namespace {

using testing::TestChain;

TEST(Ledger, FreshDigestDependsOnlyOnGenesis) {
  Ledger a(GenesisConfig{1});
  Ledger b(GenesisConfig{2});
  EXPECT_EQ(a.state_digest(), b.state_digest());
  a.advance_blocks(3);
  // Time is not part of the contract state.
  EXPECT_EQ(a.state_digest(), b.state_digest());
}

TEST(Ledger, DeployCreatesDistinctAddressesAndChargesTableGas) {
  Ledger ledger;
  auto deployer = address_for("deployer");
  auto r1 = ledger.submit(deployer, Address{}, DeployManager{ContractKind::UserManager});
  auto r2 = ledger.submit(deployer, Address{}, DeployManager{ContractKind::TokenManager});
  ASSERT_TRUE(r1.ok());
  ASSERT_TRUE(r2.ok());
  EXPECT_EQ(r1.gas, 530579u);
  EXPECT_EQ(r2.gas, 413560u);
  EXPECT_NE(*r1.created_contract, *r2.created_contract);
  EXPECT_EQ(ledger.manager_address(ContractKind::UserManager), *r1.created_contract);
  ASSERT_EQ(r1.events.size(), 1u);
  EXPECT_EQ(r1.events[0].topic, topics::kManagerDeployed);
}

TEST(Ledger, DeployRejectsDuplicatesAndChildKinds) {
  Ledger ledger;
  auto d = address_for("deployer");
  ASSERT_TRUE(ledger.submit(d, Address{}, DeployManager{ContractKind::TaskManager}).ok());
  EXPECT_EQ(ledger.submit(d, Address{}, DeployManager{ContractKind::TaskManager}).status,
            ErrorCode::AlreadyDeployed);
  EXPECT_EQ(ledger.submit(d, Address{}, DeployManager{ContractKind::Task}).status,
            ErrorCode::InvalidParams);
  EXPECT_EQ(ledger.submit(d, Address{}, RegisterUser{}).status,
            ErrorCode::UnknownContract);
  EXPECT_EQ(ledger.submit(d, address_for("nowhere"), RegisterUser{}).status,
            ErrorCode::UnknownContract);
}

TEST(Ledger, ManagersRejectCallsBeforeInit) {
  Ledger ledger;
  auto d = address_for("deployer");
  auto um = *ledger.submit(d, Address{}, DeployManager{ContractKind::UserManager})
                 .created_contract;
  EXPECT_EQ(ledger.submit(address_for("u"), um, RegisterUser{}).status,
            ErrorCode::NotInitialized);
}

TEST(Ledger, InitIsDeployerOnlyOnceAndChecksReferences) {
  Ledger ledger;
  auto d = address_for("deployer");
  SystemAddresses sys;
  sys.user_manager = *ledger.submit(d, Address{}, DeployManager{ContractKind::UserManager}).created_contract;
  sys.device_manager = *ledger.submit(d, Address{}, DeployManager{ContractKind::DeviceManager}).created_contract;
  sys.task_manager = *ledger.submit(d, Address{}, DeployManager{ContractKind::TaskManager}).created_contract;
  sys.token_manager = *ledger.submit(d, Address{}, DeployManager{ContractKind::TokenManager}).created_contract;

  EXPECT_EQ(ledger.submit(address_for("mallory"), sys.user_manager, sys.init_call()).status,
            ErrorCode::Unauthorized);
  Init swapped = sys.init_call();
  std::swap(swapped.task_manager, swapped.token_manager);
  EXPECT_EQ(ledger.submit(d, sys.user_manager, swapped).status,
            ErrorCode::InvalidParams);
  EXPECT_TRUE(ledger.submit(d, sys.user_manager, sys.init_call()).ok());
  EXPECT_EQ(ledger.submit(d, sys.user_manager, sys.init_call()).status,
            ErrorCode::AlreadyInitialized);
}

TEST(Ledger, ConfigureLocksAtInit) {
  Ledger ledger;
  auto d = address_for("deployer");
  auto sys = deploy_system(ledger, d, SystemSettings{2, 3, 100});
  EXPECT_EQ(ledger.world().tokens.token_price(), 2u);
  EXPECT_EQ(ledger.world().tokens.task_fee(), 3u);
  EXPECT_EQ(ledger.submit(d, sys.token_manager, Configure{{{"task_fee", 0}}}).status,
            ErrorCode::AlreadyInitialized);
}

TEST(Ledger, ConfigureValidatesKeysAndSender) {
  Ledger ledger;
  auto d = address_for("deployer");
  auto tm = *ledger.submit(d, Address{}, DeployManager{ContractKind::TokenManager}).created_contract;
  EXPECT_EQ(ledger.submit(address_for("x"), tm, Configure{{{"task_fee", 2}}}).status,
            ErrorCode::Unauthorized);
  EXPECT_EQ(ledger.submit(d, tm, Configure{{{"block_reward", 2}}}).status,
            ErrorCode::InvalidParams);
  EXPECT_EQ(ledger.submit(d, tm, Configure{{{"token_price", 0}}}).status,
            ErrorCode::InvalidParams);
  EXPECT_TRUE(ledger.submit(d, tm, Configure{{{"task_fee", 0}}}).ok());
}

TEST(Ledger, RevertRestoresState) {
  TestChain chain;
  auto u = address_for("u");
  auto before = chain.ledger.state_digest();
  auto r = chain.purchase(u, 10);  // not registered
  EXPECT_EQ(r.status, ErrorCode::NotRegistered);
  EXPECT_TRUE(r.events.empty());
  EXPECT_EQ(chain.ledger.state_digest(), before);
  ASSERT_TRUE(chain.register_user(u).ok());
  EXPECT_NE(chain.ledger.state_digest(), before);
}

TEST(Ledger, RevertsMidwayThroughNestedCallsLeaveNoTrace) {
  TestChain chain;
  auto c = address_for("c");
  ASSERT_TRUE(chain.register_user(c).ok());
  ASSERT_TRUE(chain.purchase(c, 5).ok());
  auto before = chain.ledger.state_digest();
  // The key check fails after balance checks but before any transfer; a
  // reward above the balance fails before the fee is burned.
  auto pk = testing::keypair_for("c").public_key;
  EXPECT_EQ(chain.create_task(c, 5, 3, pk).status, ErrorCode::InsufficientTokens);
  EXPECT_EQ(chain.create_task(c, 2, 3, crypto::PublicKey{}).status,
            ErrorCode::InvalidParams);
  EXPECT_EQ(chain.ledger.state_digest(), before);
  EXPECT_EQ(chain.ledger.world().tokens.burned(), 0u);
}

TEST(Ledger, EventPollingIsCursorBased) {
  TestChain chain;
  auto all = chain.ledger.poll_events({});
  ASSERT_EQ(all.size(), 8u);  // 4 deployed + 4 initialized
  EXPECT_EQ(all.front().sequence, 1u);
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_LT(all[i - 1].cursor(), all[i].cursor());
  }
  auto last = all.back().cursor();
  EXPECT_TRUE(chain.ledger.poll_events(last).empty());

  chain.ledger.advance_blocks(1);
  ASSERT_TRUE(chain.register_user(address_for("a")).ok());
  ASSERT_TRUE(chain.register_user(address_for("b")).ok());
  auto fresh = chain.ledger.poll_events(last);
  ASSERT_EQ(fresh.size(), 2u);
  EXPECT_EQ(fresh[0].block, 1u);
  EXPECT_EQ(fresh[0].sequence, 1u);
  EXPECT_EQ(fresh[1].sequence, 2u);

  EXPECT_EQ(chain.ledger.poll_events({}, {std::string(topics::kUserRegistered)}).size(), 2u);
  EXPECT_TRUE(chain.ledger.poll_events(fresh[1].cursor()).empty());
}

TEST(BlockClock, AdvanceRequiresPositiveCount) {
  BlockClock clock;
  EXPECT_THROW(clock.advance(0), std::invalid_argument);
  EXPECT_EQ(clock.advance(3), 3u);
  EXPECT_EQ(clock.current_block(), 3u);
}

TEST(BlockClock, IntervalsStayInRangeAndAreSeedDeterministic) {
  BlockClock a(11), b(11), c(12);
  double prev = 0;
  for (int i = 0; i < 1000; ++i) {
    a.advance(1);
    b.advance(1);
    c.advance(1);
    double step = a.elapsed_seconds() - prev;
    prev = a.elapsed_seconds();
    EXPECT_GE(step, 10.0);
    EXPECT_LE(step, 19.0);
  }
  EXPECT_EQ(a.elapsed_seconds(), b.elapsed_seconds());
  EXPECT_NE(a.elapsed_seconds(), c.elapsed_seconds());
  EXPECT_DOUBLE_EQ(a.estimated_seconds(100), 1450.0);
}

TEST(BlockClock, RejectsInvertedRange) {
  EXPECT_THROW(BlockClock(0, BlockIntervalRange{5, 4}), std::invalid_argument);
  BlockClock fixed(0, BlockIntervalRange{12, 12});
  fixed.advance(10);
  EXPECT_DOUBLE_EQ(fixed.elapsed_seconds(), 120.0);
}

TEST(Ledger, CallCostHookChargesPerOperation) {
  TestChain chain;
  chain.ledger.set_call_cost("register_user", 21000);
  auto r = chain.register_user(address_for("a"));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.gas, 21000u + 273931u);
}

TEST(Addresses, ActorAddressesAreDistinct) {
  EXPECT_NE(address_for("alice"), address_for("bob"));
  EXPECT_EQ(address_for("alice"), address_for("alice"));
  EXPECT_FALSE(address_for("").is_zero());
}

}  // namespace
}  // namespace iotchain
