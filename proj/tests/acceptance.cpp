// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "allowlab/compliance.hpp"
#include "allowlab/scenario_dsl.hpp"
#include "invariants.hpp"

using namespace allowlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool cond, std::string const& what) {
    if (!cond && first_.empty()) first_ = what;
  }
  [[nodiscard]] bool ok() const { return first_.empty(); }
  [[nodiscard]] std::string const& failure() const { return first_; }

 private:
  std::string first_;
};

Address const alice{"alice"};
Address const bob{"bob"};
AccountPair const ab{alice, bob};

Scenario load(std::string const& name) {
  auto const path = std::filesystem::path(ALLOWLAB_SCENARIO_DIR) / (name + ".scn");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing scenario " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

struct Judged {
  Trace trace;
  OracleVerdict verdict;
};

Judged run_and_judge(std::string const& name) {
  auto const sc = load(name);
  auto const strategy = find_strategy(sc.strategy);
  auto trace = run_scenario(sc, *strategy);
  auto const verdicts = judge_scenario(sc, *strategy, trace);
  for (auto const& v : verdicts) {
    if (v.pair == ab) return {std::move(trace), v.verdict};
  }
  throw std::runtime_error(name + ": no verdict for alice->bob");
}

template <class C>
bool has_call(Trace const& t, Address const& sender, std::function<bool(C const&)> const& pred) {
  return std::any_of(t.entries.begin(), t.entries.end(), [&](TraceEntry const& e) {
    auto const* c = std::get_if<C>(&e.tx.call);
    return e.tx.sender == sender && c && e.receipt.ok() && pred(*c);
  });
}

Transaction tx(Address const& sender, Call c, std::uint64_t nonce) {
  return Transaction{sender, std::move(c), kDefaultPriority, nonce};
}

LedgerState funded_with_allowance(Strategy const& s, std::uint64_t allowance) {
  LedgerState st = credit(LedgerState{}, alice, Amount{1000});
  auto out = s.execute(st, tx(alice, call::Approve{bob, Amount{allowance}}, 0), 0);
  if (!out.receipt.ok()) throw std::runtime_error(std::string(s.name()) + ": initial approve reverted");
  return out.state;
}

// ---------------------------------------------------------------------------

void canonical_attack(Check& c) {
  auto const t0 = Clock::now();
  auto const r = run_and_judge("s2-1-basic-attack");
  auto const elapsed = seconds_since(t0);
  c.expect(r.trace.strategy == "standard-erc20", "strategy is standard-erc20");
  c.expect(r.verdict.violated, "verdict violated");
  c.expect(r.verdict.cumulative == Amount{150}, "cumulative 150, got " + r.verdict.cumulative.str());
  c.expect(r.verdict.bound == Amount{100}, "bound 100, got " + r.verdict.bound.str());
  c.expect(r.verdict.str() == "Violated cumulative=150 bound=100", "verdict text");
  c.expect(elapsed < 1.0, "runs in under 1 s");
}

void zero_first_ambiguity(Check& c) {
  auto const attack = run_and_judge("s3-1-zero-first-minime");
  auto const benign = run_and_judge("s3-1-ambiguous-benign");
  c.expect(attack.verdict.violated && attack.verdict.cumulative == Amount{150},
           "zero-first attack reaches 150, got " + attack.verdict.str());
  c.expect(!benign.verdict.violated && benign.verdict.cumulative == Amount{50},
           "benign run is safe at 50, got " + benign.verdict.str());
  auto const strategy = find_strategy("minime");
  auto const seen_attack = observe_trace(*strategy, attack.trace.entries, alice, bob);
  auto const seen_benign = observe_trace(*strategy, benign.trace.entries, alice, bob);
  c.expect(!seen_attack.visible_events.empty(), "owner sees events");
  c.expect(seen_attack == seen_benign, "owner observations are identical");
  c.expect(attack.verdict != benign.verdict, "oracle tells the runs apart");
}

void monolith_increase(Check& c) {
  auto const r = run_and_judge("s3-3-monolith-increase");
  c.expect(has_call<call::IncreaseApproval>(r.trace, alice,
                                            [](call::IncreaseApproval const& x) { return x.delta == Amount{20}; }),
           "owner sent increaseApproval(bob,20)");
  c.expect(r.verdict.cumulative == Amount{120}, "cumulative 120, got " + r.verdict.cumulative.str());
  c.expect(!r.verdict.violated, "safe within max(100,120)");
  auto const strategy = find_strategy("monolith-dao");
  auto const res = check_criterion(*strategy, Criterion::Interoperable);
  c.expect(res.verdict == Verdict::Fail, "interoperability column fails");
}

void transfer_flag(Check& c) {
  auto const s = find_strategy("transfer-flag");
  auto start = funded_with_allowance(*s, 100);
  auto pulled = s->execute(start, tx(bob, call::TransferFrom{alice, bob, Amount{40}}, 0), 1);
  c.expect(pulled.receipt.ok(), "legitimate transfer succeeds");

  std::vector<Transaction> alphabet;
  for (std::uint64_t v : {0, 1, 40, 50, 100, 500}) alphabet.push_back(tx(alice, call::Approve{bob, Amount{v}}, 0));
  for (std::uint64_t v : {1, 60}) alphabet.push_back(tx(bob, call::TransferFrom{alice, bob, Amount{v}}, 0));
  alphabet.push_back(tx(alice, call::Transfer{bob, Amount{10}}, 0));
  alphabet.push_back(tx(bob, call::Transfer{alice, Amount{5}}, 0));

  std::size_t approvals = 0;
  std::size_t bad = 0;
  auto const visited = explore_sequences(*s, pulled.state, alphabet, 6, [&](ExploreStep const& step) {
    auto const& last = step.path.back();
    if (auto const* a = std::get_if<call::Approve>(&last.call); a && !a->value.is_zero()) {
      ++approvals;
      if (step.outcome.receipt.ok()) ++bad;
    }
    return ExploreControl::Continue;
  });
  c.expect(visited > 0 && approvals > 0, "exploration reached nonzero approvals");
  c.expect(bad == 0, std::to_string(bad) + " nonzero approvals succeeded after a transfer");
  c.expect(check_criterion(*s, Criterion::DeadlockFree).verdict == Verdict::Fail, "deadlock column fails");

  auto const reset = run_and_judge("s3-4-flag-reset-attack");
  c.expect(reset.trace.strategy == "transfer-flag-reset", "flag-reset strategy");
  c.expect(reset.verdict.violated && reset.verdict.cumulative == Amount{150},
           "flag-reset canonical attack violated at 150, got " + reset.verdict.str());
}

void proposal1_scenarios(Check& c) {
  auto const s = find_strategy("proposal1-cas-approve");
  auto const a = run_and_judge("s4-1-scenario-a");
  auto const& fa = a.trace.final_state();
  c.expect(fa.allowed(ab) == Amount{20}, "scenario A allowance 20, got " + fa.allowed(ab).str());
  c.expect(fa.transferred(ab) == Amount{100}, "scenario A transferred 100");
  c.expect(a.verdict.cumulative == Amount{120} && !a.verdict.violated, "scenario A cumulative 120");
  auto const b = run_and_judge("s4-1-scenario-b");
  auto const& fb = b.trace.final_state();
  c.expect(fb.allowed(ab).is_zero(), "scenario B allowance 0, got " + fb.allowed(ab).str());
  c.expect(b.verdict.cumulative == Amount{100} && !b.verdict.violated, "scenario B cumulative 100");
  c.expect(s->allowance_view(fb, ab).is_zero(), "scenario B view 0");
}

void proposal2_lifetime(Check& c) {
  auto const r = run_and_judge("s4-2-lifetime");
  auto const s = find_strategy("proposal2-lifetime");
  bool reverted = false;
  for (auto const& e : r.trace.entries) {
    auto const* x = std::get_if<call::TransferFrom>(&e.tx.call);
    if (x && x->value == Amount{70} && !e.receipt.ok()) {
      reverted = e.receipt.reason && *e.receipt.reason == "lifetime-exceeded";
    }
  }
  c.expect(reverted, "transferFrom(70) reverts with lifetime-exceeded");
  auto const& f = r.trace.final_state();
  c.expect(s->allowance_view(f, ab) == Amount{70}, "allowance reads 70");
  c.expect(f.transferred(ab) == Amount{100}, "transferred 100");
  c.expect(!r.verdict.violated && r.verdict.cumulative == Amount{100}, "cumulative 100");
}

void canonical_race_set(Check& c) {
  struct Expectation {
    std::string_view name;
    bool violates;
  };
  constexpr Expectation kExpect[] = {
      {"standard-erc20", true}, {"minime", true},
      {"transfer-flag-reset", true}, {"residual-tracking", true},
      {"proposal1-cas-approve", false}, {"proposal2-lifetime", false},
  };
  std::vector<Transaction> const pending = {
      tx(alice, call::Approve{bob, Amount{0}}, 1),
      tx(alice, call::Approve{bob, Amount{50}}, 2),
      tx(bob, call::TransferFrom{alice, bob, Amount{100}}, 0),
  };
  std::vector<Adjustment> const adj = {{Amount{100}, Amount{50}}};

  for (auto const& e : kExpect) {
    auto const s = find_strategy(e.name);
    auto const initial = funded_with_allowance(*s, 100);
    auto const traces = enumerate_interleavings(*s, initial, pending);
    std::size_t violating = 0;
    for (auto const& t : traces) violating += attack_oracle(*s, t, ab, adj).violated ? 1 : 0;

    // Brute force: every permutation, keeping only those where alice's
    // approvals run in nonce order.
    std::vector<std::size_t> perm(pending.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t valid = 0;
    std::size_t brute_violating = 0;
    do {
      auto const pos0 = std::find(perm.begin(), perm.end(), 0);
      auto const pos1 = std::find(perm.begin(), perm.end(), 1);
      if (pos0 > pos1) continue;
      ++valid;
      std::vector<Transaction> order;
      for (auto i : perm) order.push_back(pending[i]);
      auto const t = execute_sequence(*s, initial, order);
      brute_violating += attack_oracle(*s, t, ab, adj).violated ? 1 : 0;
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::string const name(e.name);
    c.expect(traces.size() == valid, name + ": enumerated " + std::to_string(traces.size()) +
                                         " orderings, brute force " + std::to_string(valid));
    c.expect(violating == brute_violating, name + ": violation count disagrees with brute force");
    c.expect(e.violates ? violating >= 1 : violating == 0,
             name + ": " + std::to_string(violating) + " violating orderings");
  }
}

void compliance_matrix(Check& c) {
  auto const t0 = Clock::now();
  auto const first = build_matrix(catalog());
  auto const second = build_matrix(catalog());
  auto const elapsed = seconds_since(t0) / 2;

  std::vector<std::string> all_pass;
  for (auto const& r : first.rows) {
    if (r.all_pass()) all_pass.push_back(r.strategy);
  }
  c.expect(all_pass == std::vector<std::string>{"proposal2-lifetime"}, "only proposal2-lifetime passes every column");
  auto const p1 = std::find_if(first.rows.begin(), first.rows.end(),
                               [](auto const& r) { return r.strategy == "proposal1-cas-approve"; });
  c.expect(p1 != first.rows.end(), "proposal1 row present");
  if (p1 != first.rows.end()) {
    c.expect(p1->result(Criterion::Overwrite).verdict == Verdict::Fail, "proposal1 fails the overwrite column");
    c.expect(p1->mitigates.value == Mitigation::Yes, "proposal1 mitigates the attack");
  }
  c.expect(format_table(first) == format_table(second), "table identical across runs");
  c.expect(report_to_json(first).dump(2) == report_to_json(second).dump(2), "report identical across runs");
  c.expect(elapsed < 30.0, "matrix builds in under 30 s");
}

void invariant_suite(Check& c) {
  constexpr std::size_t kSteps = 10000;
  constexpr std::uint64_t kSeed = 20171127;
  auto const walks = testing::random_walks(kSteps, kSeed);
  auto const nonces = testing::nonce_ordering(kSteps, kSeed);
  auto const p1 = testing::proposal1_agreement(kSteps, kSeed);
  auto report = [&](std::string const& name, testing::PropertyResult const& r) {
    c.expect(r.steps >= kSteps, name + ": only " + std::to_string(r.steps) + " steps");
    c.expect(r.ok(), name + ": " + (r.ok() ? "" : r.failures.front()));
  };
  report("conservation", walks.conservation);
  report("revert atomicity", walks.atomicity);
  report("monotone transferred", walks.monotone);
  report("nonce ordering", nonces);
  report("proposal1 closed form", p1);
}

struct Criterion_ {
  std::string_view description;
  void (*run)(Check&);
};

constexpr Criterion_ kCriteria[] = {
    {"canonical attack on standard-erc20 is violated at 150 over 100", canonical_attack},
    {"zero-first on minime is exploitable and indistinguishable from a benign run", zero_first_ambiguity},
    {"monolith-dao increaseApproval keeps the spender at 120 and breaks interoperability", monolith_increase},
    {"transfer-flag deadlocks after a transfer; flag-reset is exploitable", transfer_flag},
    {"proposal1-cas-approve subtracts what was already transferred", proposal1_scenarios},
    {"proposal2-lifetime caps lifetime withdrawals", proposal2_lifetime},
    {"canonical race set: enumeration agrees with brute force per strategy", canonical_race_set},
    {"compliance matrix has one all-pass row and is deterministic", compliance_matrix},
    {"randomized invariants hold over 10000 steps each", invariant_suite},
};

}  // namespace

int main() {
  auto const t0 = Clock::now();
  int failed = 0;
  int n = 0;
  for (auto const& crit : kCriteria) {
    ++n;
    Check check;
    try {
      crit.run(check);
    } catch (std::exception const& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (check.ok() ? "PASS " : "FAIL ") << n << ' ' << crit.description;
    if (!check.ok()) {
      std::cout << " (" << check.failure() << ')';
      ++failed;
    }
    std::cout << '\n';
  }
  auto const total = seconds_since(t0);
  bool const fast = total < 30.0;
  std::cout << (fast ? "PASS" : "FAIL") << " total runtime " << total << " s under 30 s\n";
  if (!fast) ++failed;
  std::cout << (failed ? "acceptance FAILED\n" : "acceptance passed\n");
  return failed == 0 ? 0 : 1;
}
