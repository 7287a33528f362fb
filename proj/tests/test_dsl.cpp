#include <gtest/gtest.h>

#include <random>

#include "allowlab/scenario_dsl.hpp"
#include "support.hpp"

using namespace allowlab;
using namespace allowlab::testing;

namespace {

constexpr char kCanonical[] = R"(# canonical attack
strategy standard-erc20
actor alice balance 1000 owner
actor bob front-runner   # reacts to alice's approvals
allow bob 100
allow bob 50
)";

std::size_t error_line(std::string const& doc) {
  try {
    parse_scenario(doc);
  } catch (ParseError const& e) {
    return e.line();
  }
  ADD_FAILURE() << "no parse error for:\n" << doc;
  return 0;
}

std::string error_text(std::string const& doc) {
  try {
    parse_scenario(doc);
  } catch (ParseError const& e) {
    return e.what();
  }
  return {};
}

/// Random well-formed scenario over a small vocabulary.
Scenario random_scenario(std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto value = [&] { return amt(std::uniform_int_distribution<std::uint64_t>(0, 500)(rng)); };
  auto names = strategy_names();
  Scenario sc;
  sc.strategy = names[pick(names.size())];
  sc.surface = pick(2) ? Surface::Erc20 : Surface::Native;
  sc.intent = pick(2) ? IntentMode::Cumulative : IntentMode::Absolute;
  std::vector<Address> people{alice, bob, carol, Address{"dave"}};
  people.resize(2 + pick(3));
  for (auto const& p : people) {
    ActorDecl a{p, value(), {}, {}, kDefaultPriority};
    a.owner.kind = pick(2) ? OwnerPolicy::Kind::ZeroFirst : OwnerPolicy::Kind::DirectAdjust;
    a.owner.abort_rule = static_cast<AbortRule>(pick(3));
    if (pick(2)) {
      a.adversary.kind = AdversaryPolicy::Kind::FrontRunner;
      a.adversary.priority_boost = pick(30);
      if (pick(2)) a.adversary.recipient = people[pick(people.size())];
      a.adversary.drain = pick(2) == 0;
    } else if (pick(3) == 0) {
      sc.trusted.insert(p);
    }
    if (pick(2)) a.priority = pick(50);
    sc.actors.push_back(std::move(a));
  }
  auto who = [&] { return people[pick(people.size())]; };
  for (std::size_t i = 0, n = 1 + pick(6); i < n; ++i) {
    switch (pick(3)) {
      case 0:
        sc.script.emplace_back(step::Allow{who(), who(), value()});
        break;
      case 1: {
        step::Spend s{who(), who(), who(), value(), std::nullopt, pick(2) == 0};
        if (pick(2)) s.priority = pick(40);
        sc.script.emplace_back(std::move(s));
        break;
      }
      default:
        sc.script.emplace_back(step::Transfer{who(), who(), value()});
    }
  }
  if (pick(2)) sc.bounds[{who(), who()}] = value();
  switch (pick(3)) {
    case 0:
      sc.interleave = InterleaveDirective{InterleaveDirective::Mode::Exhaustive, 0, 0};
      break;
    case 1:
      sc.interleave = InterleaveDirective{InterleaveDirective::Mode::Sample, 1 + pick(100), rng()};
      break;
    default:
      break;
  }
  return sc;
}

}  // namespace

TEST(ParseScenario, CanonicalAttackDocument) {
  auto sc = parse_scenario(kCanonical);
  auto expected = canonical_attack("standard-erc20", 100, 50);
  expected.actors[0].owner.abort_rule = AbortRule::Provable;
  EXPECT_EQ(sc, expected);
}

TEST(ParseScenario, ActorOptions) {
  auto sc = parse_scenario(R"(strategy minime
actor alice balance 7 owner zero-first abort any priority 3
actor carol
actor bob front-runner boost 4 recipient carol no-drain
trusted carol
surface erc20
intent cumulative
bound bob 90 by alice
allow bob 100
spend bob alice carol 5 priority 99 pending
transfer alice carol 1
interleave sample 12 seed 34
)");
  auto const& a = *sc.actor(alice);
  EXPECT_EQ(a.balance, amt(7));
  EXPECT_EQ(a.owner, (OwnerPolicy{OwnerPolicy::Kind::ZeroFirst, AbortRule::AnyTransfer}));
  EXPECT_EQ(a.priority, 3U);
  auto const& b = *sc.actor(bob);
  EXPECT_EQ(b.adversary.kind, AdversaryPolicy::Kind::FrontRunner);
  EXPECT_EQ(b.adversary.priority_boost, 4U);
  EXPECT_EQ(b.adversary.recipient, carol);
  EXPECT_FALSE(b.adversary.drain);
  EXPECT_TRUE(sc.trusted.contains(carol));
  EXPECT_EQ(sc.surface, Surface::Erc20);
  EXPECT_EQ(sc.intent, IntentMode::Cumulative);
  EXPECT_EQ(sc.bounds.at(ab), amt(90));
  EXPECT_EQ(sc.script[1], (ScriptStep{step::Spend{bob, alice, carol, amt(5), 99, true}}));
  EXPECT_EQ(sc.interleave, (InterleaveDirective{InterleaveDirective::Mode::Sample, 12, 34}));
}

TEST(ParseScenario, UnknownStrategyListsAllNames) {
  auto msg = error_text("strategy erc20-classic\n");
  EXPECT_NE(msg.find("line 1"), std::string::npos);
  for (auto const& n : strategy_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("strategy minime\nactor alice owner\nallow bob 5\n"), 3U);           // undeclared
  EXPECT_EQ(error_line("strategy minime\nactor alice owner\nactor bob\nallow bob 5x\n"), 4U);  // amount
  EXPECT_EQ(error_line("strategy minime\nactor alice\nactor alice\n"), 3U);                   // duplicate
  EXPECT_EQ(error_line("strategy minime\n\n# note\nfrobnicate\n"), 4U);                        // directive
  EXPECT_EQ(error_line("strategy minime\nactor alice owner nonsense\n"), 2U);
  EXPECT_EQ(error_line("strategy minime\nactor a owner\nactor b owner\nactor c\nallow c 1\n"), 5U);
  EXPECT_EQ(error_line("strategy minime\nactor a front-runner recipient zed\n"), 2U);
  EXPECT_EQ(error_line("strategy minime\nactor a front-runner\ntrusted a\n"), 3U);
  EXPECT_EQ(error_line("strategy minime\ninterleave sample 0 seed 1\n"), 2U);
  EXPECT_EQ(error_line("strategy minime\nactor a balance -3\n"), 2U);
  EXPECT_EQ(error_line("actor a\n"), 0U);  // no strategy at all
  EXPECT_NE(error_text("strategy minime\nactor alice balance ten\n").find("non-numeric amount"),
            std::string::npos);
}

TEST(ParseScenario, SerializeThenParseIsIdentity) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    auto sc = random_scenario(rng);
    auto text = serialize_scenario(sc);
    Scenario back;
    ASSERT_NO_THROW(back = parse_scenario(text)) << text;
    EXPECT_EQ(back, sc) << text;
    EXPECT_EQ(serialize_scenario(back), text);
  }
}

TEST(ParseScenario, ParseSerializeParseOnHandWrittenDocuments) {
  for (std::string doc : {std::string(kCanonical),
                          std::string("strategy proposal2-lifetime\nintent cumulative\nactor o balance 5 owner\n"
                                      "actor s front-runner\nallow s 1\nallow s 2\nbound s 3\n")}) {
    auto a = parse_scenario(doc);
    EXPECT_EQ(parse_scenario(serialize_scenario(a)), a);
  }
}
