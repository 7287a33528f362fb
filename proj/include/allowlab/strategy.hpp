#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "allowlab/ledger.hpp"

namespace allowlab {

struct Outcome {
  LedgerState state;
  Receipt receipt;
};

/// Mutable working copy for a single transaction. Strategy hooks modify it
/// freely; `Strategy::execute` discards it when any hook reverts.
class Execution {
 public:
  Execution(LedgerState const& base, std::uint64_t tx_index) : state_(base), tx_index_(tx_index) {}

  LedgerState& state() { return state_; }
  [[nodiscard]] LedgerState const& state() const { return state_; }

  /// Aborts the transaction with `reason` unless `condition` holds.
  void require(bool condition, std::string_view reason) const;
  [[noreturn]] void revert(std::string_view reason) const;

  void emit(Event event);
  /// Balance move with the standard Transfer event; reverts on shortfall.
  void move_tokens(Address const& from, Address const& to, Amount const& value);
  /// Adds `value` to the spender's lifetime counter.
  void record_transfer(AccountPair const& pair, Amount const& value);
  void set_output(Amount value) { output_ = std::move(value); }

  [[nodiscard]] std::vector<Event> const& events() const { return events_; }
  [[nodiscard]] std::optional<Amount> const& output() const { return output_; }

 private:
  LedgerState state_;
  std::uint64_t tx_index_;
  std::vector<Event> events_;
  std::optional<Amount> output_;
};

/// How a strategy interprets the value passed to approve: the allowance
/// available from now on, or a cap on everything the spender ever moves.
enum class ApproveSemantics : std::uint8_t { Current, Lifetime };

/// An allowance-management mechanism: a deterministic transition function
/// over LedgerState with a declared method surface. Subclasses override the
/// hooks for the calls they change; anything outside `supported_calls()`
/// reverts with "unsupported-method".

class Strategy {
 public:
  virtual ~Strategy() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual CallSet supported_calls() const { return erc20_surface(); }
  [[nodiscard]] virtual ApproveSemantics approve_semantics() const {
    return ApproveSemantics::Current;
  }

  /// Executes `tx` against `state` atomically. `tx_index` tags emitted events
  /// in the event log.
  [[nodiscard]] Outcome execute(LedgerState const& state, Transaction const& tx,
                                std::uint64_t tx_index = 0) const;

  /// Value returned by the public allowance(owner, spender) query.
  [[nodiscard]] virtual Amount allowance_view(LedgerState const& state,
                                              AccountPair const& pair) const;
  /// Largest transferFrom the spender is authorized to make right now,
  /// ignoring the owner's balance. Ground truth for the attack oracle.
  [[nodiscard]] virtual Amount capacity(LedgerState const& state, AccountPair const& pair) const;

 protected:
  virtual void approve(Execution& ex, AccountPair const& pair, Amount const& value) const;
  virtual void transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                             Amount const& value) const;
  virtual void increase_approval(Execution& ex, AccountPair const& pair,
                                 Amount const& delta) const;
  virtual void decrease_approval(Execution& ex, AccountPair const& pair,
                                 Amount const& delta) const;
  virtual void overloaded_approve(Execution& ex, AccountPair const& pair, Amount const& expected,
                                  Amount const& value) const;
  virtual void safe_approve(Execution& ex, AccountPair const& pair, Amount const& expected,
                            Amount const& value) const;

  // Building blocks shared by several strategies.
  static void overwrite_allowance(Execution& ex, AccountPair const& pair, Amount const& value);
  static void standard_transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                                     Amount const& value);
  static void compare_and_set(Execution& ex, AccountPair const& pair, Amount const& expected,
                              Amount const& value);
  static void require_zero_first(Execution& ex, Amount const& current, Amount const& value);
};

/// Thrown by a strategy hook that has no implementation. Distinct from a
/// Revert: it marks a broken strategy, not a contract-level failure.
class NotImplemented : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using StrategyPtr = std::shared_ptr<Strategy const>;

/// The fixed, ordered list of all strategies.
std::span<StrategyPtr const> catalog();
std::vector<std::string> strategy_names();
/// Null when `name` is not in the catalog.
StrategyPtr find_strategy(std::string_view name);

namespace strategy_name {
inline constexpr std::string_view kStandard = "standard-erc20";
inline constexpr std::string_view kMiniMe = "minime";
inline constexpr std::string_view kMonolithDao = "monolith-dao";
inline constexpr std::string_view kTransferFlag = "transfer-flag";
inline constexpr std::string_view kTransferFlagReset = "transfer-flag-reset";
inline constexpr std::string_view kResidual = "residual-tracking";
inline constexpr std::string_view kOverloaded = "overloaded-approve";
inline constexpr std::string_view kSafeApprove = "safe-approve";
inline constexpr std::string_view kMinimumViable = "minimum-viable";
inline constexpr std::string_view kProposal1 = "proposal1-cas-approve";
inline constexpr std::string_view kProposal2 = "proposal2-lifetime";
}  // namespace strategy_name

/// Non-standard diagnostic for lifetime allowances: allowed - transferred,
/// floored at zero. Not part of any strategy's ERC20 surface.
Amount lifetime_remaining(LedgerState const& state, AccountPair const& pair);

}  // namespace allowlab
