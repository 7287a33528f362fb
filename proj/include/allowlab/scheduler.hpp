#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "allowlab/ledger.hpp"
#include "allowlab/strategy.hpp"

namespace allowlab {

/// Malformed scenario or inconsistent configuration. Never accompanied by a
/// partial trace.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Mempool

/// Broadcast-but-unexecuted transactions. Release order: highest priority
/// first, ties broken by (sender label, nonce); a sender's transaction is
/// only eligible once all of that sender's lower nonces have left the pool.
class Mempool {
 public:
  void submit(Transaction tx);
  [[nodiscard]] bool empty() const { return pending_.empty(); }
  [[nodiscard]] std::size_t size() const { return pending_.size(); }
  [[nodiscard]] std::vector<Transaction> const& pending() const { return pending_; }
  Transaction pop_next();

 private:
  std::vector<Transaction> pending_;
};

// ---------------------------------------------------------------------------
// Policies

/// When a zero-first owner sees its approve(0) confirmed, decides whether to
/// go ahead with the second approval. Inputs are the observation window and
/// the number of spenders the owner has authorized (its own knowledge).
enum class AbortRule : std::uint8_t {
  Never,        ///< always sends the second approval
  Provable,     ///< aborts only when a visible transfer can only be the spender's
  AnyTransfer,  ///< aborts on any visible outgoing transfer
};

bool should_abort(AbortRule rule, Observation const& window, std::size_t authorized_spenders);

struct OwnerPolicy {
  enum class Kind : std::uint8_t { DirectAdjust, ZeroFirst };
  Kind kind = Kind::DirectAdjust;
  AbortRule abort_rule = AbortRule::Provable;
  friend bool operator==(OwnerPolicy const&, OwnerPolicy const&) = default;
};

CallSet default_front_run_triggers();

struct AdversaryPolicy {
  enum class Kind : std::uint8_t { Passive, FrontRunner };
  Kind kind = Kind::Passive;
  CallSet triggers = default_front_run_triggers();
  std::uint64_t priority_boost = 10;
  std::optional<Address> recipient;  ///< defaults to the adversary itself
  bool drain = true;                 ///< withdraw whatever is left at the end
  friend bool operator==(AdversaryPolicy const&, AdversaryPolicy const&) = default;
};

inline constexpr std::uint64_t kDefaultPriority = 10;

struct ActorDecl {
  Address name;
  Amount balance;
  OwnerPolicy owner;
  AdversaryPolicy adversary;
  std::uint64_t priority = kDefaultPriority;
  friend bool operator==(ActorDecl const&, ActorDecl const&) = default;
};

// ---------------------------------------------------------------------------
// Scenario

namespace step {
/// Owner intent: set the spender's allowance to `amount` (absolute intent)
/// or grant `amount` more (cumulative intent).
struct Allow {
  Address owner;
  Address spender;
  Amount amount;
  friend bool operator==(Allow const&, Allow const&) = default;
};
/// Scripted transferFrom by a spender. A pending spend is held back and
/// broadcast together with the next owner transaction.
struct Spend {
  Address spender;
  Address owner;
  Address to;
  Amount amount;
  std::optional<std::uint64_t> priority;
  bool pending = false;
  friend bool operator==(Spend const&, Spend const&) = default;
};
struct Transfer {
  Address from;
  Address to;
  Amount amount;
  friend bool operator==(Transfer const&, Transfer const&) = default;
};
}  // namespace step

using ScriptStep = std::variant<step::Allow, step::Spend, step::Transfer>;

/// Which methods the owner's intents are lowered to. Native uses whatever
/// the strategy adds for safe adjustment (increase/decrease, compare-and-set
/// approve); Erc20 restricts the owner to the standard approve.
enum class Surface : std::uint8_t { Native, Erc20 };
enum class IntentMode : std::uint8_t { Absolute, Cumulative };

struct InterleaveDirective {
  enum class Mode : std::uint8_t { Exhaustive, Sample };
  Mode mode = Mode::Exhaustive;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  friend bool operator==(InterleaveDirective const&, InterleaveDirective const&) = default;
};

struct Scenario {
  std::string strategy;
  std::vector<ActorDecl> actors;
  std::vector<ScriptStep> script;
  std::set<Address> trusted;
  Surface surface = Surface::Native;
  IntentMode intent = IntentMode::Absolute;
  std::map<AccountPair, Amount> bounds;
  std::optional<InterleaveDirective> interleave;

  [[nodiscard]] ActorDecl const* actor(Address const& name) const;
  friend bool operator==(Scenario const&, Scenario const&) = default;
};

/// Throws ScenarioError on unknown strategy, duplicate or undeclared actors,
/// or a trusted front-runner.
void validate(Scenario const& scenario);

/// Intended allowance targets per pair, in script order. Under cumulative
/// intent each target is the running total of grants.
std::map<AccountPair, std::vector<Amount>> intended_targets(Scenario const& scenario);

struct Adjustment {
  Amount from;
  Amount to;
  friend bool operator==(Adjustment const&, Adjustment const&) = default;
};
/// Consecutive intended targets, i.e. every N -> M change per pair.
std::map<AccountPair, std::vector<Adjustment>> adjustments(Scenario const& scenario);

// ---------------------------------------------------------------------------
// Traces

struct TraceEntry {
  std::uint64_t index = 0;
  Transaction tx;
  Receipt receipt;
  std::string state_hash;
  LedgerState post_state;
};

/// How one owner intent became transactions.
struct Lowering {
  std::size_t script_step = 0;
  std::string intent;
  std::vector<std::string> calls;
  std::string note;
};

struct Trace {
  std::string strategy;
  LedgerState initial_state;
  std::vector<TraceEntry> entries;
  std::vector<Lowering> lowerings;
  std::vector<std::size_t> ordering;  ///< pending-set indices, for interleavings

  [[nodiscard]] LedgerState const& final_state() const {
    return entries.empty() ? initial_state : entries.back().post_state;
  }
};

/// Appends the execution of `tx` to `trace`.
void execute_into(Trace& trace, Strategy const& strategy, Transaction const& tx);
/// Executes `txs` in the given order from `initial`.
Trace execute_sequence(Strategy const& strategy, LedgerState const& initial,
                       std::span<Transaction const> txs);

/// Observation of a trace (or a slice of it) by `reader` watching `watched`.
Observation observe_trace(Strategy const& strategy, std::span<TraceEntry const> entries,
                          Address const& reader, Address const& watched);

/// Initial balances of the scenario, credited in declaration order.
LedgerState initial_state(Scenario const& scenario);

/// Lowers the script, lets adversaries react to broadcasts and executes
/// everything in mempool order.
Trace run_scenario(Scenario const& scenario);
/// Same, against an explicit strategy; `scenario.strategy` is ignored.
Trace run_scenario(Scenario const& scenario, Strategy const& strategy);

// ---------------------------------------------------------------------------
// Interleavings

inline constexpr std::size_t kDefaultExhaustiveBound = 8;

class InterleavingBoundExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Number of orderings of `pending` that keep each sender's nonces
/// increasing: n! / prod(k_s!).
std::uint64_t count_valid_orderings(std::span<Transaction const> pending);

/// One trace per valid ordering, enumerated in lexicographic order of the
/// chosen pending indices. Throws InterleavingBoundExceeded above `bound`.
std::vector<Trace> enumerate_interleavings(Strategy const& strategy, LedgerState const& initial,
                                           std::span<Transaction const> pending,
                                           std::size_t bound = kDefaultExhaustiveBound);
std::vector<Trace> enumerate_interleavings(std::string_view strategy_name,
                                           LedgerState const& initial,
                                           std::span<Transaction const> pending,
                                           std::size_t bound = kDefaultExhaustiveBound);

/// `count` orderings drawn uniformly (with replacement) from the valid ones.
std::vector<Trace> sample_interleavings(Strategy const& strategy, LedgerState const& initial,
                                        std::span<Transaction const> pending, std::size_t count,
                                        std::uint64_t seed);
std::vector<Trace> sample_interleavings(std::string_view strategy_name,
                                        LedgerState const& initial,
                                        std::span<Transaction const> pending, std::size_t count,
                                        std::uint64_t seed);

struct PendingSet {
  LedgerState initial;
  std::vector<Transaction> pending;
};

/// Static race set of a scenario: everything before the first adjustment is
/// executed as setup; the remaining intents are lowered without waiting for
/// confirmations and each front-runner contributes one withdrawal of the
/// pre-adjustment allowance per adjustment that names it.
PendingSet build_pending_set(Scenario const& scenario);
PendingSet build_pending_set(Scenario const& scenario, Strategy const& strategy);

// ---------------------------------------------------------------------------
// Bounded exploration

struct ExploreStep {
  std::span<Transaction const> path;  ///< includes the transaction just run
  LedgerState const& before;
  Outcome const& outcome;
};

enum class ExploreControl : std::uint8_t { Continue, Stop };

/// Depth-first search over every sequence of up to `depth` transactions
/// drawn from `alphabet` (nonces are reassigned along the path). States
/// already expanded with at least as much remaining depth are skipped.
/// Returns the number of executed transactions.
std::size_t explore_sequences(Strategy const& strategy, LedgerState const& initial,
                              std::span<Transaction const> alphabet, std::size_t depth,
                              std::function<ExploreControl(ExploreStep const&)> const& visit);

}  // namespace allowlab
