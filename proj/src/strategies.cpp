#include "allowlab/strategy.hpp"

#include <array>

namespace allowlab {

namespace {

struct RevertSignal {
  std::string reason;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------
// Execution

void Execution::require(bool condition, std::string_view reason) const {
  if (!condition) revert(reason);
}

void Execution::revert(std::string_view reason) const { throw RevertSignal{std::string(reason)}; }

void Execution::emit(Event event) {
  state_.append_event(tx_index_, event);
  events_.push_back(std::move(event));
}

void Execution::move_tokens(Address const& from, Address const& to, Amount const& value) {
  // state_ is consumed on failure; the revert below discards it anyway.
  auto result = base_transfer(std::move(state_), from, to, value);
  if (auto* moved = std::get_if<TransferResult>(&result)) {
    state_ = std::move(moved->state);
    emit(moved->event);
    return;
  }
  revert(reason::kInsufficientBalance);
}

void Execution::record_transfer(AccountPair const& pair, Amount const& value) {
  state_.set_transferred(pair, state_.transferred(pair) + value);
}

// ---------------------------------------------------------------------------
// Strategy base

Outcome Strategy::execute(LedgerState const& state, Transaction const& tx,
                          std::uint64_t tx_index) const {
  auto const kind = kind_of(tx.call);
  if (!supported_calls().contains(kind)) {
    return {state, Receipt{Status::Revert, {}, std::string(reason::kUnsupportedMethod), {}}};
  }

  Execution ex(state, tx_index);
  auto const& sender = tx.sender;
  try {
    std::visit(
        Overloaded{
            [&](call::Approve const& c) { approve(ex, {sender, c.spender}, c.value); },
            [&](call::TransferFrom const& c) {
              transfer_from(ex, {c.from, sender}, c.to, c.value);
            },
            [&](call::Transfer const& c) { ex.move_tokens(sender, c.to, c.value); },
            [&](call::IncreaseApproval const& c) {
              increase_approval(ex, {sender, c.spender}, c.delta);
            },
            [&](call::DecreaseApproval const& c) {
              decrease_approval(ex, {sender, c.spender}, c.delta);
            },
            [&](call::OverloadedApprove const& c) {
              overloaded_approve(ex, {sender, c.spender}, c.expected, c.value);
            },
            [&](call::SafeApprove const& c) {
              safe_approve(ex, {sender, c.spender}, c.expected, c.value);
            },
            [&](call::QueryAllowance const& c) {
              ex.set_output(allowance_view(state, {c.owner, c.spender}));
            },
            [&](call::QueryBalance const& c) { ex.set_output(state.balance(c.owner)); },
        },
        tx.call);
  } catch (RevertSignal const& r) {
    return {state, Receipt{Status::Revert, {}, r.reason, {}}};
  }

  if (is_query(kind)) return {state, Receipt{Status::Success, {}, std::nullopt, ex.output()}};
  Receipt receipt{Status::Success, ex.events(), std::nullopt, ex.output()};
  return {std::move(ex.state()), std::move(receipt)};
}

Amount Strategy::allowance_view(LedgerState const& state, AccountPair const& pair) const {
  return state.allowed(pair);
}

Amount Strategy::capacity(LedgerState const& state, AccountPair const& pair) const {
  return state.allowed(pair);
}

void Strategy::approve(Execution& ex, AccountPair const& pair, Amount const& value) const {
  overwrite_allowance(ex, pair, value);
}

void Strategy::transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                             Amount const& value) const {
  standard_transfer_from(ex, pair, to, value);
}

void Strategy::increase_approval(Execution&, AccountPair const&, Amount const&) const {
  throw NotImplemented(std::string(name()) + ": increaseApproval");
}
void Strategy::decrease_approval(Execution&, AccountPair const&, Amount const&) const {
  throw NotImplemented(std::string(name()) + ": decreaseApproval");
}
void Strategy::overloaded_approve(Execution&, AccountPair const&, Amount const&,
                                  Amount const&) const {
  throw NotImplemented(std::string(name()) + ": overloadedApprove");
}
void Strategy::safe_approve(Execution&, AccountPair const&, Amount const&, Amount const&) const {
  throw NotImplemented(std::string(name()) + ": safeApprove");
}

void Strategy::overwrite_allowance(Execution& ex, AccountPair const& pair, Amount const& value) {
  ex.state().set_allowed(pair, value);
  ex.emit(ApprovalEvent{pair.owner, pair.spender, value});
}

void Strategy::standard_transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                                      Amount const& value) {
  auto remaining = ex.state().allowed(pair).checked_sub(value);
  ex.require(remaining.has_value(), reason::kInsufficientAllowance);
  ex.require(ex.state().balance(pair.owner) >= value, reason::kInsufficientBalance);
  ex.state().set_allowed(pair, std::move(*remaining));
  ex.record_transfer(pair, value);
  ex.move_tokens(pair.owner, to, value);
}

void Strategy::compare_and_set(Execution& ex, AccountPair const& pair, Amount const& expected,
                               Amount const& value) {
  ex.require(ex.state().allowed(pair) == expected, reason::kCasMismatch);
  overwrite_allowance(ex, pair, value);
}

void Strategy::require_zero_first(Execution& ex, Amount const& current, Amount const& value) {
  ex.require(value.is_zero() || current.is_zero(), reason::kNonzeroToNonzero);
}

Amount lifetime_remaining(LedgerState const& state, AccountPair const& pair) {
  return state.allowed(pair).saturating_sub(state.transferred(pair));
}

// ---------------------------------------------------------------------------
// Catalog entries

namespace {

class StandardErc20 final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kStandard; }
};

/// approve requires a zero-first change: require(value == 0 || allowed == 0).
class MiniMe final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kMiniMe; }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    require_zero_first(ex, ex.state().allowed(pair), value);
    overwrite_allowance(ex, pair, value);
  }
};

/// Zero-first approve plus relative increase/decrease. Decrease floors at 0.
class MonolithDao final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kMonolithDao; }
  CallSet supported_calls() const override {
    return erc20_surface().insert(CallKind::IncreaseApproval).insert(CallKind::DecreaseApproval);
  }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    require_zero_first(ex, ex.state().allowed(pair), value);
    overwrite_allowance(ex, pair, value);
  }
  void increase_approval(Execution& ex, AccountPair const& pair,
                         Amount const& delta) const override {
    overwrite_allowance(ex, pair, ex.state().allowed(pair) + delta);
  }
  void decrease_approval(Execution& ex, AccountPair const& pair,
                         Amount const& delta) const override {
    overwrite_allowance(ex, pair, ex.state().allowed(pair).saturating_sub(delta));
  }
};

/// transferFrom sets a per-pair "used" flag; a nonzero approve is refused
/// while it is set. Nothing ever clears it, hence the deadlock.
class TransferFlag : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kTransferFlag; }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    ex.require(value.is_zero() || !ex.state().used_flag(pair), reason::kFlagLocked);
    overwrite_allowance(ex, pair, value);
  }
  void transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                     Amount const& value) const override {
    standard_transfer_from(ex, pair, to, value);
    ex.state().set_used_flag(pair, true);
  }
};

/// The "quick fix": approve clears the flag after passing the guard, so an
/// approve(0) re-opens the pair even after a front-run.
class TransferFlagReset final : public TransferFlag {
 public:
  std::string_view name() const override { return strategy_name::kTransferFlagReset; }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    TransferFlag::approve(ex, pair, value);
    ex.state().set_used_flag(pair, false);
  }
};

/// Tracks (initial, residual) per pair. approve(v) sets both to v and is only
/// accepted from a (0, 0) pair or with v == 0; transferFrom draws on residual.
class ResidualTracking final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kResidual; }

  Amount allowance_view(LedgerState const& state, AccountPair const& pair) const override {
    return state.residual(pair).residual;
  }
  Amount capacity(LedgerState const& state, AccountPair const& pair) const override {
    return state.residual(pair).residual;
  }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    auto const entry = ex.state().residual(pair);
    ex.require(value.is_zero() || entry == ResidualEntry{}, reason::kNonzeroToNonzero);
    ex.state().set_residual(pair, {value, value});
    ex.emit(ApprovalEvent{pair.owner, pair.spender, value});
  }
  void transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                     Amount const& value) const override {
    auto entry = ex.state().residual(pair);
    auto remaining = entry.residual.checked_sub(value);
    ex.require(remaining.has_value(), reason::kInsufficientAllowance);
    ex.require(ex.state().balance(pair.owner) >= value, reason::kInsufficientBalance);
    entry.residual = std::move(*remaining);
    ex.state().set_residual(pair, std::move(entry));
    ex.record_transfer(pair, value);
    ex.move_tokens(pair.owner, to, value);
  }
};

/// Three-argument approve(spender, expected, value) next to the legacy one.
class OverloadedApprove final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kOverloaded; }
  CallSet supported_calls() const override {
    return erc20_surface().insert(CallKind::OverloadedApprove);
  }

 protected:
  void overloaded_approve(Execution& ex, AccountPair const& pair, Amount const& expected,
                          Amount const& value) const override {
    compare_and_set(ex, pair, expected, value);
  }
};

class SafeApprove final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kSafeApprove; }
  CallSet supported_calls() const override {
    return erc20_surface().insert(CallKind::SafeApprove);
  }

 protected:
  void safe_approve(Execution& ex, AccountPair const& pair, Amount const& expected,
                    Amount const& value) const override {
    compare_and_set(ex, pair, expected, value);
  }
};

/// Only transfer and balanceOf exist.
class MinimumViable final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kMinimumViable; }
  CallSet supported_calls() const override {
    return {CallKind::Transfer, CallKind::QueryBalance};
  }
  Amount allowance_view(LedgerState const&, AccountPair const&) const override { return {}; }
  Amount capacity(LedgerState const&, AccountPair const&) const override { return {}; }
};

/// approve(v) sets allowed := max(v - transferred, 0). transferFrom is the
/// standard one, which already feeds the transferred counter.
class Proposal1CasApprove final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kProposal1; }
  ApproveSemantics approve_semantics() const override { return ApproveSemantics::Lifetime; }

 protected:
  void approve(Execution& ex, AccountPair const& pair, Amount const& value) const override {
    overwrite_allowance(ex, pair, value.saturating_sub(ex.state().transferred(pair)));
  }
};

/// allowed is a lifetime cap; transferFrom requires transferred + v <= allowed
/// and leaves allowed untouched. approve is the unmodified overwrite.
class Proposal2Lifetime final : public Strategy {
 public:
  std::string_view name() const override { return strategy_name::kProposal2; }
  ApproveSemantics approve_semantics() const override { return ApproveSemantics::Lifetime; }

  Amount capacity(LedgerState const& state, AccountPair const& pair) const override {
    return lifetime_remaining(state, pair);
  }

 protected:
  void transfer_from(Execution& ex, AccountPair const& pair, Address const& to,
                     Amount const& value) const override {
    auto const spent = ex.state().transferred(pair) + value;
    ex.require(spent <= ex.state().allowed(pair), reason::kLifetimeExceeded);
    ex.require(ex.state().balance(pair.owner) >= value, reason::kInsufficientBalance);
    ex.record_transfer(pair, value);
    ex.move_tokens(pair.owner, to, value);
  }
};

std::vector<StrategyPtr> const& catalog_storage() {
  static std::vector<StrategyPtr> const entries = {
      std::make_shared<StandardErc20>(),     std::make_shared<MiniMe>(),
      std::make_shared<MonolithDao>(),       std::make_shared<TransferFlag>(),
      std::make_shared<TransferFlagReset>(), std::make_shared<ResidualTracking>(),
      std::make_shared<OverloadedApprove>(), std::make_shared<SafeApprove>(),
      std::make_shared<MinimumViable>(),     std::make_shared<Proposal1CasApprove>(),
      std::make_shared<Proposal2Lifetime>(),
  };
  return entries;
}

}  // namespace

std::span<StrategyPtr const> catalog() { return catalog_storage(); }

std::vector<std::string> strategy_names() {
  std::vector<std::string> out;
  for (auto const& s : catalog()) out.emplace_back(s->name());
  return out;
}

StrategyPtr find_strategy(std::string_view name) {
  for (auto const& s : catalog()) {
    if (s->name() == name) return s;
  }
  return nullptr;
}

}  // namespace allowlab
