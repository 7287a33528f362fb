#include "allowlab/scheduler.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_map>

namespace allowlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// (sender, nonce) lexical order used for tie-breaking.
bool sender_nonce_less(Transaction const& a, Transaction const& b) {
  if (a.sender != b.sender) return a.sender < b.sender;
  return a.nonce < b.nonce;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mempool

void Mempool::submit(Transaction tx) { pending_.push_back(std::move(tx)); }

Transaction Mempool::pop_next() {
  if (pending_.empty()) throw std::logic_error("pop_next on empty mempool");
  // Eligible: lowest pending nonce of its sender.
  auto eligible = [&](Transaction const& tx) {
    return std::none_of(pending_.begin(), pending_.end(), [&](Transaction const& other) {
      return other.sender == tx.sender && other.nonce < tx.nonce;
    });
  };
  auto best = pending_.end();
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    if (!eligible(*it)) continue;
    if (best == pending_.end() || it->priority > best->priority ||
        (it->priority == best->priority && sender_nonce_less(*it, *best))) {
      best = it;
    }
  }
  Transaction next = std::move(*best);
  pending_.erase(best);
  return next;
}

// ---------------------------------------------------------------------------
// Policies

bool should_abort(AbortRule rule, Observation const& window, std::size_t authorized_spenders) {
  bool const saw_transfer = std::any_of(
      window.visible_events.begin(), window.visible_events.end(),
      [](Event const& e) { return std::holds_alternative<TransferEvent>(e); });
  switch (rule) {
    case AbortRule::Never:
      return false;
    case AbortRule::AnyTransfer:
      return saw_transfer;
    case AbortRule::Provable:
      // A transfer out of the account can only be pinned on the spender when
      // nobody else is authorized to move the owner's tokens.
      return saw_transfer && authorized_spenders == 1;
  }
  return false;
}

CallSet default_front_run_triggers() {
  return {CallKind::Approve, CallKind::IncreaseApproval, CallKind::DecreaseApproval,
          CallKind::OverloadedApprove, CallKind::SafeApprove};
}

// ---------------------------------------------------------------------------
// Scenario helpers

ActorDecl const* Scenario::actor(Address const& name) const {
  auto it = std::find_if(actors.begin(), actors.end(),
                         [&](ActorDecl const& a) { return a.name == name; });
  return it == actors.end() ? nullptr : &*it;
}

namespace {

void validate_actors(Scenario const& scenario) {
  std::set<Address> seen;
  for (auto const& a : scenario.actors) {
    if (!seen.insert(a.name).second) throw ScenarioError("duplicate actor '" + a.name.label() + "'");
  }
  auto require_declared = [&](Address const& who) {
    if (!seen.contains(who)) throw ScenarioError("undeclared actor '" + who.label() + "'");
  };
  for (auto const& a : scenario.actors) {
    if (a.adversary.recipient) require_declared(*a.adversary.recipient);
  }
  for (auto const& s : scenario.script) {
    std::visit(Overloaded{
                   [&](step::Allow const& x) {
                     require_declared(x.owner);
                     require_declared(x.spender);
                   },
                   [&](step::Spend const& x) {
                     require_declared(x.spender);
                     require_declared(x.owner);
                     require_declared(x.to);
                   },
                   [&](step::Transfer const& x) {
                     require_declared(x.from);
                     require_declared(x.to);
                   },
               },
               s);
  }
  for (auto const& t : scenario.trusted) {
    require_declared(t);
    if (scenario.actor(t)->adversary.kind == AdversaryPolicy::Kind::FrontRunner) {
      throw ScenarioError("trusted spender '" + t.label() + "' cannot be a front-runner");
    }
  }
  for (auto const& [pair, _] : scenario.bounds) {
    require_declared(pair.owner);
    require_declared(pair.spender);
  }
}

}  // namespace

void validate(Scenario const& scenario) {
  if (!find_strategy(scenario.strategy)) {
    std::ostringstream os;
    os << "unknown strategy '" << scenario.strategy << "'; valid names:";
    for (auto const& n : strategy_names()) os << ' ' << n;
    throw ScenarioError(os.str());
  }
  validate_actors(scenario);
}

std::map<AccountPair, std::vector<Amount>> intended_targets(Scenario const& scenario) {
  std::map<AccountPair, std::vector<Amount>> out;
  for (auto const& s : scenario.script) {
    auto const* allow = std::get_if<step::Allow>(&s);
    if (!allow) continue;
    auto& series = out[{allow->owner, allow->spender}];
    if (scenario.intent == IntentMode::Cumulative && !series.empty()) {
      series.push_back(series.back() + allow->amount);
    } else {
      series.push_back(allow->amount);
    }
  }
  return out;
}

std::map<AccountPair, std::vector<Adjustment>> adjustments(Scenario const& scenario) {
  std::map<AccountPair, std::vector<Adjustment>> out;
  for (auto const& [pair, series] : intended_targets(scenario)) {
    for (std::size_t i = 1; i < series.size(); ++i) {
      out[pair].push_back({series[i - 1], series[i]});
    }
  }
  return out;
}

LedgerState initial_state(Scenario const& scenario) {
  LedgerState state;
  for (auto const& a : scenario.actors) state = credit(std::move(state), a.name, a.balance);
  return state;
}

// ---------------------------------------------------------------------------
// Traces

void execute_into(Trace& trace, Strategy const& strategy, Transaction const& tx) {
  auto const index = static_cast<std::uint64_t>(trace.entries.size());
  auto outcome = strategy.execute(trace.final_state(), tx, index);
  TraceEntry entry{index, tx, std::move(outcome.receipt), state_hash(outcome.state),
                   std::move(outcome.state)};
  trace.entries.push_back(std::move(entry));
}

Trace execute_sequence(Strategy const& strategy, LedgerState const& initial,
                       std::span<Transaction const> txs) {
  Trace trace;
  trace.strategy = std::string(strategy.name());
  trace.initial_state = initial;
  for (auto const& tx : txs) execute_into(trace, strategy, tx);
  return trace;
}

Observation observe_trace(Strategy const& strategy, std::span<TraceEntry const> entries,
                          Address const& reader, Address const& watched) {
  std::vector<ObservedStep> steps;
  steps.reserve(entries.size());
  for (auto const& e : entries) {
    steps.push_back({e.index, e.tx, e.receipt,
                     strategy.allowance_view(e.post_state, {reader, watched})});
  }
  return observe(steps, reader, watched);
}

namespace {

/// How an owner turns "set the allowance to X" into calls.
enum class AdjustStyle : std::uint8_t { Overwrite, Relative, OverloadedCas, SafeCas };

AdjustStyle adjust_style(Strategy const& strategy, Surface surface) {
  if (surface == Surface::Erc20) return AdjustStyle::Overwrite;
  auto const calls = strategy.supported_calls();
  if (calls.contains(CallKind::IncreaseApproval) && calls.contains(CallKind::DecreaseApproval)) {
    return AdjustStyle::Relative;
  }
  if (calls.contains(CallKind::OverloadedApprove)) return AdjustStyle::OverloadedCas;
  if (calls.contains(CallKind::SafeApprove)) return AdjustStyle::SafeCas;
  return AdjustStyle::Overwrite;
}

/// Calls that move the owner's known allowance from `known` to `value`
/// under the direct-adjust policy. Empty when there is nothing to do.
std::vector<Call> direct_calls(AdjustStyle style, Address const& spender, Amount const& known,
                               Amount const& value) {
  switch (style) {
    case AdjustStyle::Overwrite:
      return {call::Approve{spender, value}};
    case AdjustStyle::Relative:
      if (known.is_zero()) return {call::Approve{spender, value}};
      if (value > known) return {call::IncreaseApproval{spender, *value.checked_sub(known)}};
      if (value < known) return {call::DecreaseApproval{spender, *known.checked_sub(value)}};
      return {};
    case AdjustStyle::OverloadedCas:
      return {call::OverloadedApprove{spender, known, value}};
    case AdjustStyle::SafeCas:
      return {call::SafeApprove{spender, known, value}};
  }
  return {};
}

std::string intent_text(step::Allow const& a, IntentMode mode) {
  std::ostringstream os;
  os << a.owner.label() << (mode == IntentMode::Cumulative ? " grants " : " allows ")
     << a.spender.label() << ' ' << a.amount;
  return os.str();
}

/// Owner-side bookkeeping while lowering intents: the value each allowance
/// was last set to and the cumulative target.
struct OwnerBook {
  std::map<AccountPair, Amount> known;   // value the owner last sent
  std::map<AccountPair, Amount> target;  // intended cumulative target

  Amount known_of(AccountPair const& p) const {
    auto it = known.find(p);
    return it == known.end() ? Amount{} : it->second;
  }
  Amount target_of(AccountPair const& p) const {
    auto it = target.find(p);
    return it == target.end() ? Amount{} : it->second;
  }
  std::size_t authorized_spenders(Address const& owner) const {
    return static_cast<std::size_t>(std::count_if(known.begin(), known.end(), [&](auto const& kv) {
      return kv.first.owner == owner && !kv.second.is_zero();
    }));
  }
};

/// Value the owner passes to approve-family calls for an Allow step, and
/// the new cumulative target.
std::pair<Amount, Amount> call_value(Scenario const& sc, Strategy const& strategy,
                                     OwnerBook const& book, step::Allow const& allow) {
  AccountPair const pair{allow.owner, allow.spender};
  if (sc.intent == IntentMode::Absolute) return {allow.amount, allow.amount};
  auto const target = book.target_of(pair) + allow.amount;
  if (strategy.approve_semantics() == ApproveSemantics::Lifetime) return {target, target};
  return {allow.amount, target};
}

class ScenarioRunner {
 public:
  ScenarioRunner(Scenario const& sc, Strategy const& strategy) : sc_(sc), strategy_(strategy) {
    trace_.strategy = std::string(strategy.name());
    trace_.initial_state = initial_state(sc);
  }

  Trace run() && {
    for (std::size_t i = 0; i < sc_.script.size(); ++i) {
      std::visit(Overloaded{
                     [&](step::Allow const& a) { lower_allow(i, a); },
                     [&](step::Spend const& s) { spend(s); },
                     [&](step::Transfer const& t) {
                       broadcast({make_tx(t.from, call::Transfer{t.to, t.amount},
                                          priority_of(t.from))});
                     },
                 },
                 sc_.script[i]);
    }
    if (!held_.empty()) broadcast({});
    drain();
    return std::move(trace_);
  }

 private:
  std::uint64_t priority_of(Address const& who) const { return sc_.actor(who)->priority; }

  Transaction make_tx(Address const& sender, Call c, std::uint64_t priority) {
    auto& nonce = next_nonce_[sender];
    return Transaction{sender, std::move(c), priority, nonce++};
  }

  void spend(step::Spend const& s) {
    auto tx = make_tx(s.spender, call::TransferFrom{s.owner, s.to, s.amount},
                      s.priority.value_or(priority_of(s.spender)));
    if (s.pending) {
      held_.push_back(std::move(tx));
    } else {
      broadcast({std::move(tx)});
    }
  }

  /// Broadcasts `txs` (plus held transactions), lets front-runners react to
  /// what they see pending, then executes the whole pool.
  void broadcast(std::vector<Transaction> txs) {
    for (auto& h : held_) txs.push_back(std::move(h));
    held_.clear();
    for (auto const& tx : txs) pool_.submit(tx);
    react(txs);
    while (!pool_.empty()) execute_into(trace_, strategy_, pool_.pop_next());
  }

  void react(std::vector<Transaction> const& visible) {
    for (auto const& actor : sc_.actors) {
      auto const& adv = actor.adversary;
      if (adv.kind != AdversaryPolicy::Kind::FrontRunner) continue;
      std::set<Address> reacted;
      for (auto const& tx : visible) {
        if (tx.sender == actor.name || !adv.triggers.contains(kind_of(tx.call))) continue;
        auto spender = adjusted_spender(tx.call);
        if (!spender || *spender != actor.name || reacted.contains(tx.sender)) continue;
        auto const& state = trace_.final_state();
        AccountPair const pair{tx.sender, actor.name};
        auto const value = min(strategy_.allowance_view(state, pair), state.balance(tx.sender));
        if (value.is_zero()) continue;
        reacted.insert(tx.sender);
        pool_.submit(make_tx(actor.name,
                             call::TransferFrom{tx.sender, adv.recipient.value_or(actor.name),
                                                value},
                             tx.priority + adv.priority_boost));
      }
    }
  }

  void drain() {
    std::set<AccountPair> pairs;
    for (auto const& s : sc_.script) {
      if (auto const* a = std::get_if<step::Allow>(&s)) pairs.insert({a->owner, a->spender});
    }
    for (auto const& actor : sc_.actors) {
      auto const& adv = actor.adversary;
      if (adv.kind != AdversaryPolicy::Kind::FrontRunner || !adv.drain) continue;
      for (auto const& pair : pairs) {
        if (pair.spender != actor.name) continue;
        auto const& state = trace_.final_state();
        auto const value = min(strategy_.allowance_view(state, pair), state.balance(pair.owner));
        if (value.is_zero()) continue;
        broadcast({make_tx(actor.name,
                           call::TransferFrom{pair.owner, adv.recipient.value_or(actor.name), value},
                           priority_of(actor.name))});
      }
    }
  }

  void lower_allow(std::size_t step_index, step::Allow const& allow) {
    AccountPair const pair{allow.owner, allow.spender};
    auto const& policy = sc_.actor(allow.owner)->owner;
    auto const [value, target] = call_value(sc_, strategy_, book_, allow);
    auto const known = book_.known_of(pair);
    auto const priority = priority_of(allow.owner);

    Lowering low{step_index, intent_text(allow, sc_.intent), {}, {}};
    auto send = [&](Call c) {
      low.calls.push_back(to_string(c));
      broadcast({make_tx(allow.owner, std::move(c), priority)});
    };

    if (policy.kind == OwnerPolicy::Kind::ZeroFirst && !known.is_zero()) {
      low.note = "zero-first";
      auto const authorized = book_.authorized_spenders(allow.owner);
      auto const window_start = trace_.entries.size();
      send(call::Approve{allow.spender, Amount{}});
      book_.known.insert_or_assign(pair, Amount{});
      auto const window = std::span(trace_.entries).subspan(window_start);
      auto const obs = observe_trace(strategy_, window, allow.owner, allow.spender);
      if (should_abort(policy.abort_rule, obs, authorized)) {
        low.note = "zero-first; aborted after observing a transfer";
      } else if (!value.is_zero()) {
        send(call::Approve{allow.spender, value});
        book_.known.insert_or_assign(pair, value);
      }
    } else {
      auto const style = adjust_style(strategy_, sc_.surface);
      auto calls = direct_calls(style, allow.spender, known, value);
      low.note = calls.empty() ? "no change" : "direct";
      for (auto& c : calls) send(std::move(c));
      book_.known.insert_or_assign(pair, value);
    }
    book_.target.insert_or_assign(pair, target);
    trace_.lowerings.push_back(std::move(low));
  }

  Scenario const& sc_;
  Strategy const& strategy_;
  Trace trace_;
  Mempool pool_;
  std::vector<Transaction> held_;
  std::map<Address, std::uint64_t> next_nonce_;
  OwnerBook book_;
};

StrategyPtr strategy_or_throw(std::string_view name) {
  auto s = find_strategy(name);
  if (!s) throw ScenarioError("unknown strategy '" + std::string(name) + "'");
  return s;
}

}  // namespace

Trace run_scenario(Scenario const& scenario) {
  validate(scenario);
  return ScenarioRunner(scenario, *strategy_or_throw(scenario.strategy)).run();
}

Trace run_scenario(Scenario const& scenario, Strategy const& strategy) {
  validate_actors(scenario);
  return ScenarioRunner(scenario, strategy).run();
}

// ---------------------------------------------------------------------------
// Interleavings

namespace {

/// Pending transactions grouped into per-sender chains in nonce order.
/// Chains are ordered by the pending index of their first element.
struct Chains {
  std::vector<std::vector<std::size_t>> chains;

  explicit Chains(std::span<Transaction const> pending) {
    std::map<Address, std::vector<std::size_t>> by_sender;
    for (std::size_t i = 0; i < pending.size(); ++i) by_sender[pending[i].sender].push_back(i);
    for (auto& [sender, idx] : by_sender) {
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return pending[a].nonce < pending[b].nonce; });
      for (std::size_t k = 1; k < idx.size(); ++k) {
        if (pending[idx[k - 1]].nonce == pending[idx[k]].nonce) {
          throw std::invalid_argument("duplicate nonce for sender '" + sender.label() + "'");
        }
      }
      chains.push_back(std::move(idx));
    }
  }
};

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

Trace trace_for_ordering(Strategy const& strategy, LedgerState const& initial,
                         std::span<Transaction const> pending, std::vector<std::size_t> ordering) {
  Trace trace;
  trace.strategy = std::string(strategy.name());
  trace.initial_state = initial;
  for (auto i : ordering) execute_into(trace, strategy, pending[i]);
  trace.ordering = std::move(ordering);
  return trace;
}

}  // namespace

std::uint64_t count_valid_orderings(std::span<Transaction const> pending) {
  Chains const c(pending);
  std::uint64_t n = factorial(pending.size());
  for (auto const& ch : c.chains) n /= factorial(ch.size());
  return n;
}

std::vector<Trace> enumerate_interleavings(Strategy const& strategy, LedgerState const& initial,
                                           std::span<Transaction const> pending,
                                           std::size_t bound) {
  if (pending.size() > bound) {
    throw InterleavingBoundExceeded("pending set of " + std::to_string(pending.size()) +
                                    " transactions exceeds the exhaustive bound of " +
                                    std::to_string(bound) + "; use random sampling instead");
  }
  Chains const c(pending);
  std::vector<std::size_t> cursor(c.chains.size(), 0);
  std::vector<std::size_t> ordering;
  std::vector<std::vector<std::size_t>> orderings;

  // Candidates at each depth are the chain heads, tried in increasing
  // pending index so results come out in lexicographic order.
  std::function<void()> rec = [&] {
    if (ordering.size() == pending.size()) {
      orderings.push_back(ordering);
      return;
    }
    std::vector<std::size_t> heads;
    for (std::size_t k = 0; k < c.chains.size(); ++k) {
      if (cursor[k] < c.chains[k].size()) heads.push_back(k);
    }
    std::sort(heads.begin(), heads.end(), [&](std::size_t a, std::size_t b) {
      return c.chains[a][cursor[a]] < c.chains[b][cursor[b]];
    });
    for (auto k : heads) {
      ordering.push_back(c.chains[k][cursor[k]++]);
      rec();
      --cursor[k];
      ordering.pop_back();
    }
  };
  rec();

  std::vector<Trace> traces;
  traces.reserve(orderings.size());
  for (auto& o : orderings) traces.push_back(trace_for_ordering(strategy, initial, pending, std::move(o)));
  return traces;
}

std::vector<Trace> enumerate_interleavings(std::string_view strategy_name,
                                           LedgerState const& initial,
                                           std::span<Transaction const> pending,
                                           std::size_t bound) {
  return enumerate_interleavings(*strategy_or_throw(strategy_name), initial, pending, bound);
}

std::vector<Trace> sample_interleavings(Strategy const& strategy, LedgerState const& initial,
                                        std::span<Transaction const> pending, std::size_t count,
                                        std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample count must be at least 1");
  Chains const c(pending);
  std::mt19937_64 rng(seed);
  std::vector<Trace> traces;
  traces.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    // Picking the next chain with probability proportional to its remaining
    // length yields every valid merge with equal probability.
    std::vector<std::size_t> cursor(c.chains.size(), 0);
    std::vector<std::size_t> ordering;
    std::size_t left = pending.size();
    while (left > 0) {
      std::uniform_int_distribution<std::size_t> pick(0, left - 1);
      auto r = pick(rng);
      for (std::size_t k = 0; k < c.chains.size(); ++k) {
        auto const remaining = c.chains[k].size() - cursor[k];
        if (r < remaining) {
          ordering.push_back(c.chains[k][cursor[k]++]);
          break;
        }
        r -= remaining;
      }
      --left;
    }
    traces.push_back(trace_for_ordering(strategy, initial, pending, std::move(ordering)));
  }
  return traces;
}

std::vector<Trace> sample_interleavings(std::string_view strategy_name,
                                        LedgerState const& initial,
                                        std::span<Transaction const> pending, std::size_t count,
                                        std::uint64_t seed) {
  return sample_interleavings(*strategy_or_throw(strategy_name), initial, pending, count, seed);
}

PendingSet build_pending_set(Scenario const& scenario) {
  validate(scenario);
  return build_pending_set(scenario, *strategy_or_throw(scenario.strategy));
}

PendingSet build_pending_set(Scenario const& scenario, Strategy const& strategy) {
  validate_actors(scenario);

  // The setup prefix ends at the first intent that changes an existing grant.
  std::size_t split = scenario.script.size();
  {
    std::set<AccountPair> granted;
    for (std::size_t i = 0; i < scenario.script.size(); ++i) {
      auto const* a = std::get_if<step::Allow>(&scenario.script[i]);
      if (!a) continue;
      if (!granted.insert({a->owner, a->spender}).second) {
        split = i;
        break;
      }
    }
  }

  Scenario setup = scenario;
  setup.script.resize(split);
  for (auto& actor : setup.actors) actor.adversary.kind = AdversaryPolicy::Kind::Passive;
  auto const prefix = run_scenario(setup, strategy);

  PendingSet out{prefix.final_state(), {}};
  std::map<Address, std::uint64_t> nonce;
  auto make_tx = [&](Address const& sender, Call c) {
    return Transaction{sender, std::move(c), scenario.actor(sender)->priority, nonce[sender]++};
  };

  OwnerBook book;
  for (std::size_t i = 0; i < split; ++i) {
    if (auto const* a = std::get_if<step::Allow>(&scenario.script[i])) {
      auto const [value, target] = call_value(scenario, strategy, book, *a);
      book.known.insert_or_assign({a->owner, a->spender}, value);
      book.target.insert_or_assign({a->owner, a->spender}, target);
    }
  }

  for (std::size_t i = split; i < scenario.script.size(); ++i) {
    std::visit(
        Overloaded{
            [&](step::Allow const& a) {
              AccountPair const pair{a.owner, a.spender};
              auto const [value, target] = call_value(scenario, strategy, book, a);
              auto const known = book.known_of(pair);
              auto const& spender = *scenario.actor(a.spender);
              if (spender.adversary.kind == AdversaryPolicy::Kind::FrontRunner &&
                  !known.is_zero()) {
                out.pending.push_back(
                    make_tx(a.spender, call::TransferFrom{a.owner,
                                                          spender.adversary.recipient.value_or(
                                                              a.spender),
                                                          known}));
              }
              if (scenario.actor(a.owner)->owner.kind == OwnerPolicy::Kind::ZeroFirst &&
                  !known.is_zero()) {
                out.pending.push_back(make_tx(a.owner, call::Approve{a.spender, Amount{}}));
                out.pending.push_back(make_tx(a.owner, call::Approve{a.spender, value}));
              } else {
                auto const style = adjust_style(strategy, scenario.surface);
                for (auto& c : direct_calls(style, a.spender, known, value)) {
                  out.pending.push_back(make_tx(a.owner, std::move(c)));
                }
              }
              book.known.insert_or_assign(pair, value);
              book.target.insert_or_assign(pair, target);
            },
            [&](step::Spend const& s) {
              out.pending.push_back(
                  make_tx(s.spender, call::TransferFrom{s.owner, s.to, s.amount}));
            },
            [&](step::Transfer const& t) {
              out.pending.push_back(make_tx(t.from, call::Transfer{t.to, t.amount}));
            },
        },
        scenario.script[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounded exploration

std::size_t explore_sequences(Strategy const& strategy, LedgerState const& initial,
                              std::span<Transaction const> alphabet, std::size_t depth,
                              std::function<ExploreControl(ExploreStep const&)> const& visit) {
  std::unordered_map<std::string, std::size_t> expanded;  // state key -> remaining depth
  std::vector<Transaction> path;
  std::map<Address, std::uint64_t> nonce;
  std::size_t executed = 0;
  bool stop = false;

  std::function<void(LedgerState const&, std::size_t)> rec = [&](LedgerState const& state,
                                                                 std::size_t remaining) {
    if (remaining == 0 || stop) return;
    auto key = state_key(state);
    if (auto it = expanded.find(key); it != expanded.end() && it->second >= remaining) return;
    expanded[std::move(key)] = remaining;

    for (auto const& letter : alphabet) {
      Transaction tx = letter;
      tx.nonce = nonce[tx.sender]++;
      path.push_back(tx);
      auto const outcome = strategy.execute(state, tx, path.size() - 1);
      ++executed;
      if (visit(ExploreStep{path, state, outcome}) == ExploreControl::Stop) stop = true;
      if (!stop && outcome.receipt.ok()) rec(outcome.state, remaining - 1);
      path.pop_back();
      --nonce[tx.sender];
      if (stop) return;
    }
  };
  rec(initial, depth);
  return executed;
}

}  // namespace allowlab
