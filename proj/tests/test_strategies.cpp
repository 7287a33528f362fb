#include <gtest/gtest.h>

#include "allowlab/strategy.hpp"
#include "support.hpp"

using namespace allowlab;
using namespace allowlab::testing;

namespace {

struct Ledger {
  StrategyPtr s;
  LedgerState state = funded();
  TxFactory f;
  std::uint64_t index = 0;

  explicit Ledger(std::string_view name) : s(strategy(name)) {}

  Receipt exec(Transaction const& tx) {
    auto out = s->execute(state, tx, index++);
    state = std::move(out.state);
    return out.receipt;
  }
  Receipt approve(std::uint64_t v) { return exec(f.approve(v)); }
  Receipt pull(std::uint64_t v) { return exec(f.pull(v)); }
  Receipt owner(Call c) { return exec(f.make(alice, std::move(c))); }
  Amount view() const { return s->allowance_view(state, ab); }
};

}  // namespace

TEST(Catalog, HasElevenStrategiesInFixedOrder) {
  std::vector<std::string> const expected = {
      "standard-erc20",     "minime",         "monolith-dao",   "transfer-flag",
      "transfer-flag-reset", "residual-tracking", "overloaded-approve", "safe-approve",
      "minimum-viable",     "proposal1-cas-approve", "proposal2-lifetime"};
  EXPECT_EQ(strategy_names(), expected);
  EXPECT_EQ(find_strategy("erc20-classic"), nullptr);
}

TEST(StandardErc20, ApproveOverwritesAndTransferFromDecrements) {
  Ledger r("standard-erc20");
  EXPECT_TRUE(r.approve(100).ok());
  EXPECT_TRUE(r.approve(30).ok());
  EXPECT_EQ(r.view(), amt(30));
  auto rc = r.pull(20);
  ASSERT_TRUE(rc.ok());
  EXPECT_EQ(rc.events, (std::vector<Event>{TransferEvent{alice, bob, amt(20)}}));
  EXPECT_EQ(r.view(), amt(10));
  EXPECT_EQ(r.state.transferred(ab), amt(20));
  EXPECT_EQ(r.pull(11).reason, std::string(reason::kInsufficientAllowance));
}

TEST(StandardErc20, BalanceShortfallRevertsAtomically) {
  Ledger r("standard-erc20");
  r.state = funded(10);
  r.approve(100);
  auto const before = r.state;
  auto rc = r.pull(50);
  EXPECT_EQ(rc.status, Status::Revert);
  EXPECT_EQ(rc.reason, std::string(reason::kInsufficientBalance));
  EXPECT_TRUE(rc.events.empty());
  EXPECT_EQ(r.state, before);
}

TEST(StandardErc20, QueriesReturnValuesWithoutChangingState) {
  Ledger r("standard-erc20");
  r.approve(42);
  auto const before = r.state;
  auto q = r.exec(r.f.make(carol, call::QueryAllowance{alice, bob}));
  EXPECT_EQ(q.output, amt(42));
  auto b = r.exec(r.f.make(carol, call::QueryBalance{alice}));
  EXPECT_EQ(b.output, amt(1000));
  EXPECT_EQ(r.state, before);
}

TEST(StandardErc20, UnsupportedMethodReverts) {
  Ledger r("standard-erc20");
  auto rc = r.owner(call::IncreaseApproval{bob, amt(5)});
  EXPECT_EQ(rc.reason, std::string(reason::kUnsupportedMethod));
}

TEST(MiniMe, RefusesNonzeroToNonzero) {
  Ledger r("minime");
  EXPECT_TRUE(r.approve(100).ok());
  EXPECT_EQ(r.approve(50).reason, std::string(reason::kNonzeroToNonzero));
  EXPECT_TRUE(r.approve(0).ok());
  EXPECT_TRUE(r.approve(50).ok());
  EXPECT_EQ(r.view(), amt(50));
}

TEST(MonolithDao, RelativeAdjustmentsFloorAtZero) {
  Ledger r("monolith-dao");
  r.approve(100);
  auto inc = r.owner(call::IncreaseApproval{bob, amt(20)});
  EXPECT_EQ(inc.events, (std::vector<Event>{ApprovalEvent{alice, bob, amt(120)}}));
  r.pull(100);
  r.owner(call::DecreaseApproval{bob, amt(50)});
  EXPECT_EQ(r.view(), amt(0));
  EXPECT_EQ(r.approve(5).ok(), true);
  EXPECT_EQ(r.approve(6).reason, std::string(reason::kNonzeroToNonzero));
}

TEST(TransferFlag, LocksNonzeroApproveAfterTransfer) {
  Ledger r("transfer-flag");
  r.approve(100);
  EXPECT_TRUE(r.approve(60).ok());  // no transfer yet
  r.pull(10);
  EXPECT_TRUE(r.state.used_flag(ab));
  EXPECT_EQ(r.approve(60).reason, std::string(reason::kFlagLocked));
  EXPECT_TRUE(r.approve(0).ok());
  EXPECT_EQ(r.approve(60).reason, std::string(reason::kFlagLocked));
}

TEST(TransferFlagReset, ZeroApproveClearsTheFlag) {
  Ledger r("transfer-flag-reset");
  r.approve(100);
  r.pull(100);
  EXPECT_EQ(r.approve(50).reason, std::string(reason::kFlagLocked));
  EXPECT_TRUE(r.approve(0).ok());
  EXPECT_FALSE(r.state.used_flag(ab));
  EXPECT_TRUE(r.approve(50).ok());
}

TEST(ResidualTracking, ApproveNeedsAnUntouchedPair) {
  Ledger r("residual-tracking");
  r.approve(100);
  EXPECT_EQ(r.state.residual(ab), (ResidualEntry{amt(100), amt(100)}));
  r.pull(30);
  EXPECT_EQ(r.state.residual(ab), (ResidualEntry{amt(100), amt(70)}));
  EXPECT_EQ(r.view(), amt(70));
  EXPECT_EQ(r.approve(50).reason, std::string(reason::kNonzeroToNonzero));
  EXPECT_TRUE(r.approve(0).ok());
  EXPECT_TRUE(r.approve(50).ok());
  EXPECT_EQ(r.state.residual(ab), (ResidualEntry{amt(50), amt(50)}));
}

TEST(CompareAndSet, OnlySucceedsOnExpectedValue) {
  for (auto name : {"overloaded-approve", "safe-approve"}) {
    Ledger r(name);
    auto cas = [&](std::uint64_t e, std::uint64_t v) -> Call {
      if (std::string_view(name) == "safe-approve") return call::SafeApprove{bob, amt(e), amt(v)};
      return call::OverloadedApprove{bob, amt(e), amt(v)};
    };
    EXPECT_TRUE(r.owner(cas(0, 100)).ok()) << name;
    r.pull(100);
    EXPECT_EQ(r.owner(cas(100, 50)).reason, std::string(reason::kCasMismatch)) << name;
    EXPECT_TRUE(r.owner(cas(0, 50)).ok()) << name;
    EXPECT_TRUE(r.approve(7).ok()) << name;  // legacy approve still present
  }
}

TEST(MinimumViable, OnlyTransfersExist) {
  Ledger r("minimum-viable");
  EXPECT_EQ(r.approve(100).reason, std::string(reason::kUnsupportedMethod));
  EXPECT_EQ(r.pull(0).reason, std::string(reason::kUnsupportedMethod));
  EXPECT_TRUE(r.owner(call::Transfer{bob, amt(10)}).ok());
  EXPECT_EQ(r.state.balance(bob), amt(10));
}

TEST(Proposal1, ApproveSubtractsWhatWasAlreadyMoved) {
  Ledger r("proposal1-cas-approve");
  r.approve(100);
  r.pull(100);
  auto rc = r.approve(120);
  EXPECT_EQ(rc.events, (std::vector<Event>{ApprovalEvent{alice, bob, amt(20)}}));
  EXPECT_EQ(r.view(), amt(20));
  r.approve(10);
  EXPECT_EQ(r.view(), amt(0));
}

TEST(Proposal2, AllowedIsALifetimeCap) {
  Ledger r("proposal2-lifetime");
  r.approve(100);
  r.pull(60);
  EXPECT_EQ(r.view(), amt(100));
  EXPECT_EQ(r.s->capacity(r.state, ab), amt(40));
  EXPECT_EQ(r.pull(41).reason, std::string(reason::kLifetimeExceeded));
  EXPECT_TRUE(r.pull(40).ok());
  r.approve(70);
  EXPECT_EQ(r.pull(1).reason, std::string(reason::kLifetimeExceeded));
  EXPECT_EQ(lifetime_remaining(r.state, ab), amt(0));
}

TEST(AllStrategies, ZeroValueTransferFromEmitsEvent) {
  for (auto const& s : catalog()) {
    if (!s->supported_calls().contains(CallKind::TransferFrom)) continue;
    auto out = s->execute(funded(), Transaction{bob, call::TransferFrom{alice, bob, amt(0)}, 10, 0});
    EXPECT_TRUE(out.receipt.ok()) << s->name();
    EXPECT_EQ(out.receipt.events, (std::vector<Event>{TransferEvent{alice, bob, amt(0)}})) << s->name();
  }
}

TEST(AllStrategies, EventsAreLoggedWithTransactionIndex) {
  auto s = strategy("standard-erc20");
  auto out = s->execute(funded(), Transaction{alice, call::Approve{bob, amt(1)}, 10, 0}, 7);
  ASSERT_EQ(out.state.event_log().size(), 1U);
  EXPECT_EQ(out.state.event_log()[0].tx_index, 7U);
}
