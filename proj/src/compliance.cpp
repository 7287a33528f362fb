#include "allowlab/compliance.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

namespace allowlab {

// ---------------------------------------------------------------------------
// Attack oracle

std::string OracleVerdict::str() const {
  std::ostringstream os;
  os << (violated ? "Violated" : "Safe") << " cumulative=" << cumulative << " bound=" << bound;
  return os.str();
}

Amount spender_outflow(Trace const& trace, AccountPair const& pair) {
  Amount total;
  for (auto const& e : trace.entries) {
    if (e.tx.sender != pair.spender || !e.receipt.ok()) continue;
    if (auto const* tf = std::get_if<call::TransferFrom>(&e.tx.call); tf && tf->from == pair.owner) {
      total += tf->value;
    }
  }
  return total;
}

OracleVerdict attack_oracle(Strategy const& strategy, Trace const& trace, AccountPair const& pair,
                            std::span<Adjustment const> adjustments, std::optional<Amount> bound) {
  if (adjustments.empty()) throw OracleConfigError("attack oracle needs at least one adjustment");
  if (!bound) {
    if (adjustments.size() > 1) {
      throw OracleConfigError("several adjustments of " + pair.owner.label() + "->" +
                              pair.spender.label() + " need an explicit bound");
    }
    bound = max(adjustments.front().from, adjustments.front().to);
  }
  OracleVerdict v;
  v.cumulative = spender_outflow(trace, pair) + strategy.capacity(trace.final_state(), pair);
  v.bound = *bound;
  v.violated = v.cumulative > v.bound;
  return v;
}

std::vector<PairVerdict> judge_scenario(Scenario const& scenario, Strategy const& strategy,
                                        Trace const& trace) {
  std::vector<PairVerdict> out;
  for (auto const& [pair, adj] : adjustments(scenario)) {
    std::optional<Amount> bound;
    if (auto it = scenario.bounds.find(pair); it != scenario.bounds.end()) bound = it->second;
    out.push_back({pair, attack_oracle(strategy, trace, pair, adj, bound)});
  }
  return out;
}

bool any_violated(std::span<PairVerdict const> verdicts) {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [](PairVerdict const& p) { return p.verdict.violated; });
}

// ---------------------------------------------------------------------------
// Names

std::string_view criterion_id(Criterion c) {
  switch (c) {
    case Criterion::AbsoluteInput: return "C1";
    case Criterion::Overwrite: return "C2";
    case Criterion::ZeroTransfer: return "C3";
    case Criterion::SplitWithdrawal: return "C4";
    case Criterion::InitialLegit: return "C5";
    case Criterion::Interoperable: return "C6";
    case Criterion::RaceFree: return "C7";
    case Criterion::DeadlockFree: return "deadlockFree";
  }
  return "?";
}

std::string_view criterion_title(Criterion c) {
  switch (c) {
    case Criterion::AbsoluteInput: return "approve takes an absolute value";
    case Criterion::Overwrite: return "approve overwrites the allowance";
    case Criterion::ZeroTransfer: return "zero-value transfers behave normally";
    case Criterion::SplitWithdrawal: return "allowance can be spent in parts";
    case Criterion::InitialLegit: return "initial allowance is always withdrawable";
    case Criterion::Interoperable: return "legacy ERC20 calls suffice and are safe";
    case Criterion::RaceFree: return "no interleaving of the attack set violates the bound";
    case Criterion::DeadlockFree: return "owner can re-grant after a withdrawal";
  }
  return "?";
}

Criterion parse_criterion_id(std::string_view id) {
  for (auto c : kAllCriteria) {
    if (criterion_id(c) == id) return c;
  }
  throw std::invalid_argument("unknown criterion '" + std::string(id) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::NotApplicable: return "N/A";
    case Verdict::Error: return "Error";
  }
  return "?";
}

std::string_view to_string(Mitigation m) {
  switch (m) {
    case Mitigation::Yes: return "Yes";
    case Mitigation::No: return "No";
    case Mitigation::OnlyViaNonStandardMethods: return "OnlyViaNonStandardMethods";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Probes

namespace {

Address const kOwner{"alice"};
Address const kSpender{"bob"};
AccountPair const kPair{kOwner, kSpender};
constexpr std::uint64_t kOwnerBalance = 1000;
constexpr std::uint64_t kCanonicalN = 100;
constexpr std::array<std::uint64_t, 2> kCanonicalM = {50, 120};

/// Straight-line transaction sequence from a funded owner.
class Probe {
 public:
  explicit Probe(Strategy const& strategy) : strategy_(strategy) {
    trace_.strategy = std::string(strategy.name());
    trace_.initial_state = credit(LedgerState{}, kOwner, Amount{kOwnerBalance});
  }

  Receipt const& send(Address const& sender, Call c) {
    execute_into(trace_, strategy_, Transaction{sender, std::move(c), kDefaultPriority,
                                                nonce_[sender]++});
    return trace_.entries.back().receipt;
  }
  Receipt const& approve(std::uint64_t v) { return send(kOwner, call::Approve{kSpender, Amount{v}}); }
  Receipt const& pull(std::uint64_t v) {
    return send(kSpender, call::TransferFrom{kOwner, kSpender, Amount{v}});
  }

  [[nodiscard]] LedgerState const& state() const { return trace_.final_state(); }
  [[nodiscard]] Trace const& trace() const { return trace_; }
  [[nodiscard]] Amount view() const { return strategy_.allowance_view(state(), kPair); }
  [[nodiscard]] Amount capacity() const { return strategy_.capacity(state(), kPair); }

 private:
  Strategy const& strategy_;
  Trace trace_;
  std::map<Address, std::uint64_t> nonce_;
};

CriterionResult pass(std::string detail) { return {Verdict::Pass, std::move(detail), std::nullopt}; }
CriterionResult fail(std::string detail, Trace witness) {
  return {Verdict::Fail, std::move(detail), std::move(witness)};
}

std::string describe(Receipt const& r) {
  return r.ok() ? "success" : "revert " + r.reason.value_or("?");
}

CriterionResult check_absolute_input(Strategy const& strategy) {
  constexpr std::uint64_t v = 70;
  for (std::uint64_t prior : {30, 150}) {
    Probe p(strategy);
    if (!p.approve(prior).ok()) {
      return fail("approve(" + std::to_string(prior) + ") from a fresh pair: " +
                      describe(p.trace().entries.back().receipt),
                  p.trace());
    }
    if (!p.approve(v).ok()) {
      p.approve(0);
      p.approve(v);
    }
    if (p.capacity() != Amount{v}) {
      return fail("after approve(" + std::to_string(v) + ") from allowance " +
                      std::to_string(prior) + " the spender may move " + p.capacity().str(),
                  p.trace());
    }
  }
  return pass("approve(70) from priors 30 and 150 grants exactly 70");
}

CriterionResult check_overwrite(Strategy const& strategy) {
  using Step = std::pair<bool, std::uint64_t>;  // (is approve, value)
  std::vector<std::vector<Step>> const priors = {
      {},
      {{true, 100}},
      {{true, 100}, {false, 100}},
      {{true, 100}, {false, 40}},
      {{true, 100}, {false, 100}, {true, 0}},
  };
  std::size_t successes = 0;
  std::optional<Trace> last;
  for (auto const& prior : priors) {
    for (std::uint64_t v : {120, 50, 0}) {
      Probe p(strategy);
      for (auto const& [is_approve, x] : prior) is_approve ? p.approve(x) : p.pull(x);
      auto const& r = p.approve(v);
      last = p.trace();
      if (!r.ok()) continue;
      ++successes;
      if (p.view() != Amount{v}) {
        return fail("approve(" + std::to_string(v) + ") succeeded but allowance reads " +
                        p.view().str(),
                    p.trace());
      }
    }
  }
  if (successes == 0) return fail("approve never succeeds", *last);
  return pass("every successful approve(v) reads back v");
}

CriterionResult check_zero_transfer(Strategy const& strategy) {
  for (bool granted : {false, true}) {
    Probe p(strategy);
    if (granted) p.approve(kCanonicalN);
    auto const& r = p.pull(0);
    Event const expected = TransferEvent{kOwner, kSpender, Amount{}};
    if (!r.ok() || std::find(r.events.begin(), r.events.end(), expected) == r.events.end()) {
      return fail(std::string("transferFrom(0)") + (granted ? " with allowance 100: " : ": ") +
                      describe(r),
                  p.trace());
    }
  }
  return pass("transferFrom(0) succeeds and emits Transfer(alice,bob,0)");
}

CriterionResult check_split_withdrawal(Strategy const& strategy) {
  Probe p(strategy);
  p.approve(kCanonicalN);
  for (std::uint64_t part : {40, 35, 25}) {
    auto const& r = p.pull(part);
    if (!r.ok()) {
      return fail("transferFrom(" + std::to_string(part) + ") against allowance 100: " + describe(r),
                  p.trace());
    }
  }
  return pass("40 + 35 + 25 against allowance 100 all succeed");
}

CriterionResult check_initial_legit(Strategy const& strategy) {
  {
    Probe p(strategy);
    p.approve(kCanonicalN);
    auto const& r = p.pull(kCanonicalN);
    if (!r.ok()) return fail("full withdrawal of a fresh grant: " + describe(r), p.trace());
  }
  for (auto m : kCanonicalM) {
    // Withdrawal racing ahead of the owner's adjustment.
    Probe p(strategy);
    p.approve(kCanonicalN);
    Receipt const r = p.pull(kCanonicalN);
    p.approve(m);
    if (!r.ok()) return fail("withdrawal ahead of approve(" + std::to_string(m) + "): " + describe(r), p.trace());
  }
  return pass("the granted amount can always be withdrawn in full");
}

Scenario legacy_attack(Strategy const& strategy, std::uint64_t m, Surface surface,
                       OwnerPolicy::Kind kind) {
  Scenario sc;
  sc.strategy = std::string(strategy.name());
  sc.surface = surface;
  ActorDecl owner{kOwner, Amount{kOwnerBalance}, {kind, AbortRule::Never}, {}, kDefaultPriority};
  ActorDecl spender{kSpender, Amount{}, {}, {}, kDefaultPriority};
  spender.adversary.kind = AdversaryPolicy::Kind::FrontRunner;
  sc.actors = {owner, spender};
  sc.script = {step::Allow{kOwner, kSpender, Amount{kCanonicalN}},
               step::Allow{kOwner, kSpender, Amount{m}}};
  return sc;
}

struct AttackOutcome {
  bool safe = true;
  std::string detail;
  std::optional<Trace> witness;
};

AttackOutcome attack_batch(Strategy const& strategy, Surface surface,
                           std::initializer_list<OwnerPolicy::Kind> kinds) {
  for (auto kind : kinds) {
    for (auto m : kCanonicalM) {
      auto const sc = legacy_attack(strategy, m, surface, kind);
      auto trace = run_scenario(sc, strategy);
      auto const verdicts = judge_scenario(sc, strategy, trace);
      if (any_violated(verdicts)) {
        std::string policy = kind == OwnerPolicy::Kind::ZeroFirst ? "zero-first" : "direct";
        return {false,
                policy + " change 100->" + std::to_string(m) + ": " + verdicts.front().verdict.str(),
                std::move(trace)};
      }
    }
  }
  return {true, {}, std::nullopt};
}

AttackOutcome legacy_safety(Strategy const& strategy) {
  return attack_batch(strategy, Surface::Erc20,
                      {OwnerPolicy::Kind::DirectAdjust, OwnerPolicy::Kind::ZeroFirst});
}

CriterionResult check_interoperable(Strategy const& strategy) {
  Probe p(strategy);
  auto expect_ok = [&](Receipt const& r, std::string const& what) -> std::optional<CriterionResult> {
    if (r.ok()) return std::nullopt;
    return fail(what + " through the ERC20 surface: " + describe(r), p.trace());
  };
  if (auto f = expect_ok(p.approve(kCanonicalN), "approve(bob,100)")) return *f;
  auto const& q = p.send(kOwner, call::QueryAllowance{kOwner, kSpender});
  if (!q.ok() || q.output != Amount{kCanonicalN}) {
    return fail("allowance(alice,bob) after approve(bob,100): " + describe(q), p.trace());
  }
  if (auto f = expect_ok(p.pull(60), "transferFrom 60")) return *f;
  if (auto f = expect_ok(p.pull(40), "transferFrom 40")) return *f;

  auto legacy = legacy_safety(strategy);
  if (!legacy.safe) return fail("legacy callers stay exposed: " + legacy.detail, *legacy.witness);
  return pass("standard calls cover the lifecycle and resist the attack");
}

struct RaceOutcome {
  std::size_t orderings = 0;
  std::size_t violating = 0;
  std::optional<Trace> witness;
  std::string detail;
};

RaceOutcome race_search(Strategy const& strategy) {
  RaceOutcome out;
  Probe setup(strategy);
  setup.approve(kCanonicalN);
  for (auto m : kCanonicalM) {
    for (bool zero_first : {true, false}) {
      std::vector<Transaction> pending;
      std::uint64_t owner_nonce = 0;
      if (zero_first) {
        pending.push_back({kOwner, call::Approve{kSpender, Amount{}}, kDefaultPriority, owner_nonce++});
      }
      pending.push_back({kOwner, call::Approve{kSpender, Amount{m}}, kDefaultPriority, owner_nonce++});
      pending.push_back(
          {kSpender, call::TransferFrom{kOwner, kSpender, Amount{kCanonicalN}}, kDefaultPriority, 0});
      std::array<Adjustment, 1> const adj{Adjustment{Amount{kCanonicalN}, Amount{m}}};
      for (auto& t : enumerate_interleavings(strategy, setup.state(), pending)) {
        ++out.orderings;
        auto const v = attack_oracle(strategy, t, kPair, adj);
        if (!v.violated) continue;
        ++out.violating;
        if (!out.witness) {
          out.detail = std::string(zero_first ? "approve(0), " : "") + "approve(" +
                       std::to_string(m) + "), transferFrom(100): " + v.str();
          out.witness = std::move(t);
        }
      }
    }
  }
  return out;
}

CriterionResult check_race_free(Strategy const& strategy) {
  auto r = race_search(strategy);
  if (r.witness) {
    return fail(std::to_string(r.violating) + " of " + std::to_string(r.orderings) +
                    " orderings violate; first: " + r.detail,
                *r.witness);
  }
  return pass("all " + std::to_string(r.orderings) + " orderings stay within the bound");
}

std::vector<Transaction> owner_alphabet(Strategy const& strategy) {
  std::vector<Transaction> out;
  auto const calls = strategy.supported_calls();
  auto add = [&](Call c) { out.push_back({kOwner, std::move(c), kDefaultPriority, 0}); };
  for (std::uint64_t v : {0, 50, 100, 200}) add(call::Approve{kSpender, Amount{v}});
  if (calls.contains(CallKind::IncreaseApproval)) add(call::IncreaseApproval{kSpender, Amount{50}});
  if (calls.contains(CallKind::DecreaseApproval)) add(call::DecreaseApproval{kSpender, Amount{50}});
  for (std::uint64_t e : {0, 100}) {
    if (calls.contains(CallKind::OverloadedApprove)) {
      add(call::OverloadedApprove{kSpender, Amount{e}, Amount{50}});
    }
    if (calls.contains(CallKind::SafeApprove)) add(call::SafeApprove{kSpender, Amount{e}, Amount{50}});
  }
  return out;
}

CriterionResult check_deadlock_free(Strategy const& strategy) {
  Probe p(strategy);
  if (!p.approve(kCanonicalN).ok() || !p.pull(kCanonicalN).ok()) {
    return {Verdict::NotApplicable, "the grant-and-withdraw setup cannot run", std::nullopt};
  }
  auto const alphabet = owner_alphabet(strategy);
  std::optional<std::string> found;
  explore_sequences(strategy, p.state(), alphabet, 3, [&](ExploreStep const& s) {
    if (!s.outcome.receipt.ok() || strategy.capacity(s.outcome.state, kPair).is_zero()) {
      return ExploreControl::Continue;
    }
    std::string path;
    for (auto const& tx : s.path) path += (path.empty() ? "" : ", ") + to_string(tx.call);
    found = path;
    return ExploreControl::Stop;
  });
  if (found) return pass("re-granted via " + *found);
  p.approve(50);
  return fail("no sequence of up to 3 owner calls restores a nonzero allowance", p.trace());
}

}  // namespace

CriterionResult check_criterion(Strategy const& strategy, Criterion c) {
  switch (c) {
    case Criterion::AbsoluteInput: return check_absolute_input(strategy);
    case Criterion::Overwrite: return check_overwrite(strategy);
    case Criterion::ZeroTransfer: return check_zero_transfer(strategy);
    case Criterion::SplitWithdrawal: return check_split_withdrawal(strategy);
    case Criterion::InitialLegit: return check_initial_legit(strategy);
    case Criterion::Interoperable: return check_interoperable(strategy);
    case Criterion::RaceFree: return check_race_free(strategy);
    case Criterion::DeadlockFree: return check_deadlock_free(strategy);
  }
  throw std::invalid_argument("unknown criterion");
}

MitigationResult check_mitigation(Strategy const& strategy) {
  auto legacy = legacy_safety(strategy);
  if (legacy.safe) {
    auto race = race_search(strategy);
    if (!race.witness) return {Mitigation::Yes, "legacy callers and every ordering are safe", std::nullopt};
    return {Mitigation::No, "race: " + race.detail, std::move(race.witness)};
  }
  auto const extra = strategy.supported_calls().kinds();
  bool const has_own_methods = std::any_of(extra.begin(), extra.end(), [](CallKind k) {
    return is_allowance_adjustment(k) && !erc20_surface().contains(k);
  });
  if (has_own_methods &&
      attack_batch(strategy, Surface::Native, {OwnerPolicy::Kind::DirectAdjust}).safe) {
    return {Mitigation::OnlyViaNonStandardMethods, "legacy: " + legacy.detail,
            std::move(legacy.witness)};
  }
  return {Mitigation::No, "legacy: " + legacy.detail, std::move(legacy.witness)};
}

// ---------------------------------------------------------------------------
// Matrix

CriterionResult const& StrategyRow::result(Criterion c) const {
  auto it = std::find_if(criteria.begin(), criteria.end(), [&](auto const& kv) { return kv.first == c; });
  if (it == criteria.end()) throw std::out_of_range("criterion not evaluated");
  return it->second;
}

Verdict StrategyRow::approve_semantics() const {
  auto const a = result(Criterion::AbsoluteInput).verdict;
  auto const b = result(Criterion::Overwrite).verdict;
  if (a == Verdict::Error || b == Verdict::Error) return Verdict::Error;
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Pass && b == Verdict::Pass) return Verdict::Pass;
  return Verdict::NotApplicable;
}

bool StrategyRow::all_pass() const {
  return mitigates.value == Mitigation::Yes &&
         std::all_of(criteria.begin(), criteria.end(),
                     [](auto const& kv) { return kv.second.verdict == Verdict::Pass; });
}

ComplianceReport build_matrix(std::span<StrategyPtr const> strategies) {
  ComplianceReport report;
  for (auto const& s : strategies) {
    StrategyRow row;
    row.strategy = std::string(s->name());
    try {
      row.mitigates = check_mitigation(*s);
    } catch (std::exception const& e) {
      row.mitigates = {std::nullopt, e.what(), std::nullopt};
    }
    for (auto c : kAllCriteria) {
      CriterionResult r;
      try {
        r = check_criterion(*s, c);
      } catch (std::exception const& e) {
        r = {Verdict::Error, e.what(), std::nullopt};
      }
      row.criteria.emplace_back(c, std::move(r));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string witness_id(std::string_view strategy, std::string_view cell) {
  return std::string(strategy) + "/" + std::string(cell);
}

std::string format_table(ComplianceReport const& report) {
  std::vector<std::string> const headers = {"strategy", "mitigates", "approve-sem", "C1", "C2",
                                            "C3",       "C4",        "C5",          "C6", "C7",
                                            "deadlock-free"};
  std::vector<std::vector<std::string>> rows;
  for (auto const& r : report.rows) {
    std::vector<std::string> cells{r.strategy,
                                   r.mitigates.value ? std::string(to_string(*r.mitigates.value))
                                                     : "Error",
                                   std::string(to_string(r.approve_semantics()))};
    for (auto c : kAllCriteria) cells.emplace_back(to_string(r.result(c).verdict));
    rows.push_back(std::move(cells));
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) {
    width[i] = headers[i].size();
    for (auto const& row : rows) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  auto line = [&](std::vector<std::string> const& cells) {
    std::string text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      std::ostringstream cell;
      cell << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
      text += cell.str();
      if (i + 1 < cells.size()) text += "  ";
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    os << text << '\n';
  };
  line(headers);
  std::size_t total = 0;
  for (auto w : width) total += w;
  os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (auto const& row : rows) line(row);
  return os.str();
}

Json report_to_json(ComplianceReport const& report) {
  Json strategies = Json::object();
  for (auto const& r : report.rows) {
    Json row = Json::object();
    auto cell = [&](std::string_view id, std::string_view verdict, std::string const& detail,
                    bool has_witness) {
      return Json{{"verdict", verdict},
                  {"detail", detail},
                  {"witness", has_witness ? Json(witness_id(r.strategy, id)) : Json(nullptr)}};
    };
    row["mitigatesAttack"] =
        cell("mitigatesAttack", r.mitigates.value ? to_string(*r.mitigates.value) : "Error",
             r.mitigates.detail, r.mitigates.witness.has_value());
    row["erc20ApproveSemantics"] = Json{{"verdict", to_string(r.approve_semantics())},
                                        {"from", Json::array({"C1", "C2"})}};
    for (auto const& [c, res] : r.criteria) {
      row[std::string(criterion_id(c))] =
          cell(criterion_id(c), to_string(res.verdict), res.detail, res.witness.has_value());
    }
    row["allPass"] = r.all_pass();
    strategies[r.strategy] = std::move(row);
  }
  return Json{{"strategies", std::move(strategies)}};
}

}  // namespace allowlab
