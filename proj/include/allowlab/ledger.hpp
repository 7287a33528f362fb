#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "allowlab/amount.hpp"

namespace allowlab {

class Address {
 public:
  Address() = default;
  explicit Address(std::string label);

  [[nodiscard]] std::string const& label() const { return label_; }

  friend auto operator<=>(Address const&, Address const&) = default;
  friend bool operator==(Address const&, Address const&) = default;

 private:
  std::string label_;
};

struct AccountPair {
  Address owner;
  Address spender;

  friend auto operator<=>(AccountPair const&, AccountPair const&) = default;
  friend bool operator==(AccountPair const&, AccountPair const&) = default;
};

// ---------------------------------------------------------------------------
// Events. A Transfer carries no initiator: whoever sent the transaction is not
// part of the payload, exactly as in the token standard.

struct TransferEvent {
  Address from;
  Address to;
  Amount value;
  friend bool operator==(TransferEvent const&, TransferEvent const&) = default;
};

struct ApprovalEvent {
  Address owner;
  Address spender;
  Amount value;
  friend bool operator==(ApprovalEvent const&, ApprovalEvent const&) = default;
};

using Event = std::variant<TransferEvent, ApprovalEvent>;

std::string to_string(Event const& event);

// ---------------------------------------------------------------------------
// Calls

namespace call {
struct Approve {
  Address spender;
  Amount value;
  friend bool operator==(Approve const&, Approve const&) = default;
};
struct TransferFrom {
  Address from;
  Address to;
  Amount value;
  friend bool operator==(TransferFrom const&, TransferFrom const&) = default;
};
struct Transfer {
  Address to;
  Amount value;
  friend bool operator==(Transfer const&, Transfer const&) = default;
};
struct IncreaseApproval {
  Address spender;
  Amount delta;
  friend bool operator==(IncreaseApproval const&, IncreaseApproval const&) = default;
};
struct DecreaseApproval {
  Address spender;
  Amount delta;
  friend bool operator==(DecreaseApproval const&, DecreaseApproval const&) = default;
};
struct OverloadedApprove {
  Address spender;
  Amount expected;
  Amount value;
  friend bool operator==(OverloadedApprove const&, OverloadedApprove const&) = default;
};
struct SafeApprove {
  Address spender;
  Amount expected;
  Amount value;
  friend bool operator==(SafeApprove const&, SafeApprove const&) = default;
};
struct QueryAllowance {
  Address owner;
  Address spender;
  friend bool operator==(QueryAllowance const&, QueryAllowance const&) = default;
};
struct QueryBalance {
  Address owner;
  friend bool operator==(QueryBalance const&, QueryBalance const&) = default;
};
}  // namespace call

// Alternative order matches CallKind.
using Call = std::variant<call::Approve, call::TransferFrom, call::Transfer,
                          call::IncreaseApproval, call::DecreaseApproval,
                          call::OverloadedApprove, call::SafeApprove,
                          call::QueryAllowance, call::QueryBalance>;

enum class CallKind : std::uint8_t {
  Approve,
  TransferFrom,
  Transfer,
  IncreaseApproval,
  DecreaseApproval,
  OverloadedApprove,
  SafeApprove,
  QueryAllowance,
  QueryBalance,
};
inline constexpr std::size_t kCallKindCount = 9;

CallKind kind_of(Call const& c);
std::string_view method_name(CallKind kind);
std::optional<CallKind> parse_method_name(std::string_view name);
std::string to_string(Call const& c);

/// True for queries: they never mutate state and never emit events.
bool is_query(CallKind kind);
/// True for calls that set or adjust an allowance.
bool is_allowance_adjustment(CallKind kind);
/// Spender named by an allowance-adjusting call.
std::optional<Address> adjusted_spender(Call const& c);

/// Small value-type set of call kinds.
class CallSet {
 public:
  CallSet() = default;
  CallSet(std::initializer_list<CallKind> kinds);

  [[nodiscard]] bool contains(CallKind k) const {
    return (bits_ >> static_cast<unsigned>(k)) & 1U;
  }
  CallSet& insert(CallKind k) {
    bits_ |= 1U << static_cast<unsigned>(k);
    return *this;
  }
  [[nodiscard]] std::vector<CallKind> kinds() const;

  friend bool operator==(CallSet const&, CallSet const&) = default;

 private:
  std::uint32_t bits_ = 0;
};

/// The six ERC20 methods (approve, transferFrom, transfer, allowance,
/// balanceOf; totalSupply is implicit in the state).
CallSet erc20_surface();

// ---------------------------------------------------------------------------

struct Transaction {
  Address sender;
  Call call;
  std::uint64_t priority = 0;
  std::uint64_t nonce = 0;
  friend bool operator==(Transaction const&, Transaction const&) = default;
};

enum class Status : std::uint8_t { Success, Revert };

struct Receipt {
  Status status = Status::Success;
  std::vector<Event> events;      // empty on Revert
  std::optional<std::string> reason;
  std::optional<Amount> output;   // return value of queries

  [[nodiscard]] bool ok() const { return status == Status::Success; }
  friend bool operator==(Receipt const&, Receipt const&) = default;
};

/// Revert reason codes.
namespace reason {
inline constexpr std::string_view kInsufficientBalance = "insufficient-balance";
inline constexpr std::string_view kInsufficientAllowance = "insufficient-allowance";
inline constexpr std::string_view kNonzeroToNonzero = "nonzero-to-nonzero";
inline constexpr std::string_view kFlagLocked = "flag-locked";
inline constexpr std::string_view kCasMismatch = "cas-mismatch";
inline constexpr std::string_view kLifetimeExceeded = "lifetime-exceeded";
inline constexpr std::string_view kUnsupportedMethod = "unsupported-method";
}  // namespace reason

struct ResidualEntry {
  Amount initial;
  Amount residual;
  friend bool operator==(ResidualEntry const&, ResidualEntry const&) = default;
};

struct LoggedEvent {
  std::uint64_t tx_index = 0;
  Event event;
  friend bool operator==(LoggedEvent const&, LoggedEvent const&) = default;
};

/// Full token-contract state shared by every strategy. Missing map entries
/// read as zero/false, and setters erase entries that are set back to the
/// default, so two states that read identically compare equal.
class LedgerState {
 public:
  [[nodiscard]] Amount balance(Address const& who) const;
  [[nodiscard]] Amount allowed(AccountPair const& pair) const;
  [[nodiscard]] Amount transferred(AccountPair const& pair) const;
  [[nodiscard]] bool used_flag(AccountPair const& pair) const;
  [[nodiscard]] ResidualEntry residual(AccountPair const& pair) const;
  [[nodiscard]] Amount const& total_supply() const { return total_supply_; }
  [[nodiscard]] std::vector<LoggedEvent> const& event_log() const { return event_log_; }

  void set_balance(Address const& who, Amount value);
  void set_allowed(AccountPair const& pair, Amount value);
  void set_transferred(AccountPair const& pair, Amount value);
  void set_used_flag(AccountPair const& pair, bool value);
  void set_residual(AccountPair const& pair, ResidualEntry value);
  void set_total_supply(Amount value) { total_supply_ = std::move(value); }
  void append_event(std::uint64_t tx_index, Event event);

  [[nodiscard]] std::map<Address, Amount> const& balances() const { return balances_; }
  [[nodiscard]] std::map<AccountPair, Amount> const& allowances() const { return allowed_; }
  [[nodiscard]] std::map<AccountPair, Amount> const& transferred_counters() const {
    return transferred_;
  }
  [[nodiscard]] std::map<AccountPair, bool> const& used_flags() const { return used_; }
  [[nodiscard]] std::map<AccountPair, ResidualEntry> const& residuals() const {
    return residual_;
  }

  /// Sum of balances equals total supply.
  [[nodiscard]] bool conserves_supply() const;

  friend bool operator==(LedgerState const&, LedgerState const&) = default;

 private:
  std::map<Address, Amount> balances_;
  std::map<AccountPair, Amount> allowed_;
  std::map<AccountPair, Amount> transferred_;
  std::map<AccountPair, bool> used_;
  std::map<AccountPair, ResidualEntry> residual_;
  std::vector<LoggedEvent> event_log_;
  Amount total_supply_;
};

/// Canonical text rendering of a state; the input to both digests.
std::string canonical_form(LedgerState const& state, bool include_event_log = true);
/// Hex SHA-256 over the canonical form, event log included.
std::string state_hash(LedgerState const& state);
/// Digest without the event log: identifies states that behave identically.
std::string state_key(LedgerState const& state);

/// Mints `amount` to `who` (scenario setup).
LedgerState credit(LedgerState state, Address const& who, Amount const& amount);

struct InsufficientBalance {
  Amount available;
};

struct TransferResult {
  LedgerState state;
  TransferEvent event;
};

/// Moves `value` from `from` to `to`; zero-value transfers still emit.
std::variant<TransferResult, InsufficientBalance> base_transfer(
    LedgerState state, Address const& from, Address const& to, Amount const& value);

// ---------------------------------------------------------------------------
// External-observer view

struct AllowanceRead {
  std::uint64_t time = 0;
  Address owner;
  Address spender;
  Amount value;
  friend bool operator==(AllowanceRead const&, AllowanceRead const&) = default;
};

/// What a lightweight monitor sees: public reads of one allowance and the
/// Transfer events leaving the reader's account. Never a transaction sender.
struct Observation {
  std::vector<AllowanceRead> allowance_reads;
  std::vector<Event> visible_events;
  friend bool operator==(Observation const&, Observation const&) = default;
};

/// One executed transaction and the watched allowance read right after it.
struct ObservedStep {
  std::uint64_t index = 0;
  Transaction tx;
  Receipt receipt;
  Amount watched_allowance;
};

/// Builds the reader's view of a trace. Allowance reads are taken at the
/// reader's own confirmation points only (after each transaction the reader
/// sent), for the single watched pair (reader, watched).
Observation observe(std::span<ObservedStep const> steps, Address const& reader,
                    Address const& watched);

std::string to_string(Observation const& obs);

}  // namespace allowlab
