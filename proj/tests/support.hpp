#pragma once

#include <map>
#include <string>

#include "allowlab/scheduler.hpp"

namespace allowlab::testing {

inline Address addr(char const* s) { return Address{s}; }
inline Amount amt(std::uint64_t v) { return Amount{v}; }

inline Address const alice{"alice"};
inline Address const bob{"bob"};
inline Address const carol{"carol"};
inline AccountPair const ab{alice, bob};

inline LedgerState funded(std::uint64_t alice_balance = 1000) {
  return credit(LedgerState{}, alice, amt(alice_balance));
}

/// Hands out consecutive nonces per sender.
class TxFactory {
 public:
  Transaction make(Address const& sender, Call c, std::uint64_t priority = kDefaultPriority) {
    return Transaction{sender, std::move(c), priority, nonces_[sender]++};
  }
  Transaction approve(std::uint64_t v) { return make(alice, call::Approve{bob, amt(v)}); }
  Transaction pull(std::uint64_t v) { return make(bob, call::TransferFrom{alice, bob, amt(v)}); }

 private:
  std::map<Address, std::uint64_t> nonces_;
};

inline StrategyPtr strategy(std::string_view name) {
  auto s = find_strategy(name);
  if (!s) throw std::invalid_argument("no strategy " + std::string(name));
  return s;
}

inline ActorDecl owner_actor(Address name, std::uint64_t balance,
                             OwnerPolicy::Kind kind = OwnerPolicy::Kind::DirectAdjust,
                             AbortRule rule = AbortRule::Provable) {
  return ActorDecl{std::move(name), amt(balance), {kind, rule}, {}, kDefaultPriority};
}

inline ActorDecl front_runner(Address name) {
  ActorDecl a{std::move(name), Amount{}, {}, {}, kDefaultPriority};
  a.adversary.kind = AdversaryPolicy::Kind::FrontRunner;
  return a;
}

inline ActorDecl passive(Address name) { return ActorDecl{std::move(name), Amount{}, {}, {}, kDefaultPriority}; }

/// alice grants bob `n`, then changes it to `m`, with bob front-running.
inline Scenario canonical_attack(std::string strategy_name, std::uint64_t n, std::uint64_t m,
                                 OwnerPolicy::Kind kind = OwnerPolicy::Kind::DirectAdjust) {
  Scenario sc;
  sc.strategy = std::move(strategy_name);
  sc.actors = {owner_actor(alice, 1000, kind, AbortRule::Never), front_runner(bob)};
  sc.script = {step::Allow{alice, bob, amt(n)}, step::Allow{alice, bob, amt(m)}};
  return sc;
}

}  // namespace allowlab::testing
