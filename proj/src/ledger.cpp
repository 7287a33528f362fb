#include "allowlab/ledger.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace allowlab {

// ---------------------------------------------------------------------------
// Amount

std::optional<Amount> Amount::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (!std::all_of(text.begin(), text.end(),
                   [](unsigned char c) { return std::isdigit(c) != 0; })) {
    return std::nullopt;
  }
  return Amount(Rep(std::string(text)));
}

std::optional<Amount> Amount::checked_sub(Amount const& rhs) const {
  if (value_ < rhs.value_) return std::nullopt;
  return Amount(Rep(value_ - rhs.value_));
}

Amount Amount::saturating_sub(Amount const& rhs) const {
  if (value_ <= rhs.value_) return Amount{};
  return Amount(Rep(value_ - rhs.value_));
}

// ---------------------------------------------------------------------------
// Address and calls

Address::Address(std::string label) : label_(std::move(label)) {
  if (label_.empty()) throw std::invalid_argument("address label must be non-empty");
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::array<std::string_view, kCallKindCount> kMethodNames = {
    "approve",         "transferFrom",      "transfer",
    "increaseApproval", "decreaseApproval", "overloadedApprove",
    "safeApprove",     "allowance",         "balanceOf",
};

}  // namespace

CallKind kind_of(Call const& c) { return static_cast<CallKind>(c.index()); }

std::string_view method_name(CallKind kind) {
  return kMethodNames.at(static_cast<std::size_t>(kind));
}

std::optional<CallKind> parse_method_name(std::string_view name) {
  for (std::size_t i = 0; i < kMethodNames.size(); ++i) {
    if (kMethodNames[i] == name) return static_cast<CallKind>(i);
  }
  return std::nullopt;
}

bool is_query(CallKind kind) {
  return kind == CallKind::QueryAllowance || kind == CallKind::QueryBalance;
}

bool is_allowance_adjustment(CallKind kind) {
  switch (kind) {
    case CallKind::Approve:
    case CallKind::IncreaseApproval:
    case CallKind::DecreaseApproval:
    case CallKind::OverloadedApprove:
    case CallKind::SafeApprove:
      return true;
    default:
      return false;
  }
}

std::optional<Address> adjusted_spender(Call const& c) {
  return std::visit(
      Overloaded{
          [](call::Approve const& a) -> std::optional<Address> { return a.spender; },
          [](call::IncreaseApproval const& a) -> std::optional<Address> { return a.spender; },
          [](call::DecreaseApproval const& a) -> std::optional<Address> { return a.spender; },
          [](call::OverloadedApprove const& a) -> std::optional<Address> { return a.spender; },
          [](call::SafeApprove const& a) -> std::optional<Address> { return a.spender; },
          [](auto const&) -> std::optional<Address> { return std::nullopt; },
      },
      c);
}

std::string to_string(Call const& c) {
  std::ostringstream os;
  os << method_name(kind_of(c)) << '(';
  std::visit(Overloaded{
                 [&](call::Approve const& a) { os << a.spender.label() << ',' << a.value; },
                 [&](call::TransferFrom const& a) {
                   os << a.from.label() << ',' << a.to.label() << ',' << a.value;
                 },
                 [&](call::Transfer const& a) { os << a.to.label() << ',' << a.value; },
                 [&](call::IncreaseApproval const& a) {
                   os << a.spender.label() << ',' << a.delta;
                 },
                 [&](call::DecreaseApproval const& a) {
                   os << a.spender.label() << ',' << a.delta;
                 },
                 [&](call::OverloadedApprove const& a) {
                   os << a.spender.label() << ',' << a.expected << ',' << a.value;
                 },
                 [&](call::SafeApprove const& a) {
                   os << a.spender.label() << ',' << a.expected << ',' << a.value;
                 },
                 [&](call::QueryAllowance const& a) {
                   os << a.owner.label() << ',' << a.spender.label();
                 },
                 [&](call::QueryBalance const& a) { os << a.owner.label(); },
             },
             c);
  os << ')';
  return os.str();
}

std::string to_string(Event const& event) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](TransferEvent const& e) {
                   os << "Transfer(" << e.from.label() << ',' << e.to.label() << ','
                      << e.value << ')';
                 },
                 [&](ApprovalEvent const& e) {
                   os << "Approval(" << e.owner.label() << ',' << e.spender.label()
                      << ',' << e.value << ')';
                 },
             },
             event);
  return os.str();
}

CallSet::CallSet(std::initializer_list<CallKind> kinds) {
  for (auto k : kinds) insert(k);
}

std::vector<CallKind> CallSet::kinds() const {
  std::vector<CallKind> out;
  for (std::size_t i = 0; i < kCallKindCount; ++i) {
    auto const k = static_cast<CallKind>(i);
    if (contains(k)) out.push_back(k);
  }
  return out;
}

CallSet erc20_surface() {
  return {CallKind::Approve, CallKind::TransferFrom, CallKind::Transfer,
          CallKind::QueryAllowance, CallKind::QueryBalance};
}

// ---------------------------------------------------------------------------
// LedgerState

namespace {

template <class Map, class Key>
auto read_or(Map const& m, Key const& k, typename Map::mapped_type fallback) {
  auto it = m.find(k);
  return it == m.end() ? fallback : it->second;
}

template <class Map, class Key, class Value>
void write_or_erase(Map& m, Key const& k, Value value, bool is_default) {
  if (is_default) {
    m.erase(k);
  } else {
    m.insert_or_assign(k, std::move(value));
  }
}

}  // namespace

Amount LedgerState::balance(Address const& who) const {
  return read_or(balances_, who, Amount{});
}
Amount LedgerState::allowed(AccountPair const& pair) const {
  return read_or(allowed_, pair, Amount{});
}
Amount LedgerState::transferred(AccountPair const& pair) const {
  return read_or(transferred_, pair, Amount{});
}
bool LedgerState::used_flag(AccountPair const& pair) const {
  return read_or(used_, pair, false);
}
ResidualEntry LedgerState::residual(AccountPair const& pair) const {
  return read_or(residual_, pair, ResidualEntry{});
}

void LedgerState::set_balance(Address const& who, Amount value) {
  bool const z = value.is_zero();
  write_or_erase(balances_, who, std::move(value), z);
}
void LedgerState::set_allowed(AccountPair const& pair, Amount value) {
  bool const z = value.is_zero();
  write_or_erase(allowed_, pair, std::move(value), z);
}
void LedgerState::set_transferred(AccountPair const& pair, Amount value) {
  bool const z = value.is_zero();
  write_or_erase(transferred_, pair, std::move(value), z);
}
void LedgerState::set_used_flag(AccountPair const& pair, bool value) {
  write_or_erase(used_, pair, value, !value);
}
void LedgerState::set_residual(AccountPair const& pair, ResidualEntry value) {
  bool const z = value.initial.is_zero() && value.residual.is_zero();
  write_or_erase(residual_, pair, std::move(value), z);
}
void LedgerState::append_event(std::uint64_t tx_index, Event event) {
  event_log_.push_back({tx_index, std::move(event)});
}

bool LedgerState::conserves_supply() const {
  Amount sum;
  for (auto const& [_, v] : balances_) sum += v;
  return sum == total_supply_;
}

std::string canonical_form(LedgerState const& state, bool include_event_log) {
  std::ostringstream os;
  os << "supply " << state.total_supply() << '\n';
  for (auto const& [who, v] : state.balances()) os << "B " << who.label() << ' ' << v << '\n';
  auto pair_str = [](AccountPair const& p) { return p.owner.label() + ' ' + p.spender.label(); };
  for (auto const& [p, v] : state.allowances()) os << "A " << pair_str(p) << ' ' << v << '\n';
  for (auto const& [p, v] : state.transferred_counters())
    os << "T " << pair_str(p) << ' ' << v << '\n';
  for (auto const& [p, v] : state.used_flags()) os << "F " << pair_str(p) << ' ' << v << '\n';
  for (auto const& [p, v] : state.residuals())
    os << "R " << pair_str(p) << ' ' << v.initial << ' ' << v.residual << '\n';
  if (include_event_log) {
    for (auto const& e : state.event_log()) os << "E " << e.tx_index << ' ' << to_string(e.event) << '\n';
  }
  return os.str();
}

namespace {

std::string sha256_hex(std::string const& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string state_hash(LedgerState const& state) { return sha256_hex(canonical_form(state, true)); }
std::string state_key(LedgerState const& state) { return sha256_hex(canonical_form(state, false)); }

LedgerState credit(LedgerState state, Address const& who, Amount const& amount) {
  state.set_balance(who, state.balance(who) + amount);
  state.set_total_supply(state.total_supply() + amount);
  return state;
}

std::variant<TransferResult, InsufficientBalance> base_transfer(
    LedgerState state, Address const& from, Address const& to, Amount const& value) {
  auto const from_balance = state.balance(from);
  auto remaining = from_balance.checked_sub(value);
  if (!remaining) return InsufficientBalance{from_balance};
  state.set_balance(from, std::move(*remaining));
  state.set_balance(to, state.balance(to) + value);
  return TransferResult{std::move(state), TransferEvent{from, to, value}};
}

// ---------------------------------------------------------------------------
// Observation

Observation observe(std::span<ObservedStep const> steps, Address const& reader,
                    Address const& watched) {
  Observation obs;
  for (auto const& step : steps) {
    for (auto const& ev : step.receipt.events) {
      if (auto const* t = std::get_if<TransferEvent>(&ev); t && t->from == reader) {
        obs.visible_events.push_back(ev);
      }
    }
    if (step.tx.sender == reader) {
      obs.allowance_reads.push_back({step.index, reader, watched, step.watched_allowance});
    }
  }
  return obs;
}

std::string to_string(Observation const& obs) {
  std::ostringstream os;
  for (auto const& r : obs.allowance_reads) {
    os << "read t=" << r.time << ' ' << r.owner.label() << "->" << r.spender.label() << '='
       << r.value << '\n';
  }
  for (auto const& e : obs.visible_events) os << "event " << to_string(e) << '\n';
  return os.str();
}

}  // namespace allowlab
