#include "allowlab/scenario_dsl.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace allowlab {

ParseError::ParseError(std::size_t line, std::string const& reason)
    : std::runtime_error(line == 0 ? reason : "line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(reason) {}

namespace {

std::vector<std::string_view> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

class Parser {
 public:
  Scenario parse(std::string_view text) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      ++line_;
      toks_ = tokenize(text.substr(pos, end - pos));
      at_ = 0;
      if (!toks_.empty()) directive();
      pos = end + 1;
    }
    finish();
    return std::move(sc_);
  }

 private:
  [[noreturn]] void error(std::string const& reason) const { throw ParseError(line_, reason); }

  bool more() const { return at_ < toks_.size(); }
  std::string_view next(std::string_view what) {
    if (!more()) error("expected " + std::string(what));
    return toks_[at_++];
  }
  bool accept(std::string_view word) {
    if (more() && toks_[at_] == word) {
      ++at_;
      return true;
    }
    return false;
  }
  void done() {
    if (more()) error("unexpected '" + std::string(toks_[at_]) + "'");
  }

  Amount amount() {
    auto tok = next("an amount");
    auto a = Amount::parse(tok);
    if (!a) error("non-numeric amount '" + std::string(tok) + "'");
    return *a;
  }
  std::uint64_t number(std::string_view what) {
    auto tok = next(what);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) {
      error("expected " + std::string(what) + ", got '" + std::string(tok) + "'");
    }
    return v;
  }
  Address actor_ref() {
    auto tok = next("an actor name");
    Address a{std::string(tok)};
    if (!sc_.actor(a)) error("undeclared actor '" + std::string(tok) + "'");
    return a;
  }
  Address owner_ref() {
    if (accept("by")) return actor_ref();
    if (declared_owners_.size() == 1) return declared_owners_.front();
    error(declared_owners_.empty() ? "no actor declared with 'owner'; add 'by <owner>'"
                                   : "several owners declared; add 'by <owner>'");
  }

  void directive() {
    auto const word = next("a directive");
    if (word == "strategy") {
      auto name = next("a strategy name");
      if (!find_strategy(name)) {
        std::string msg = "unknown strategy '" + std::string(name) + "'; valid names:";
        for (auto const& n : strategy_names()) msg += " " + n;
        error(msg);
      }
      if (have_strategy_) error("strategy given twice");
      have_strategy_ = true;
      sc_.strategy = std::string(name);
    } else if (word == "surface") {
      auto v = next("native or erc20");
      if (v == "native") {
        sc_.surface = Surface::Native;
      } else if (v == "erc20") {
        sc_.surface = Surface::Erc20;
      } else {
        error("unknown surface '" + std::string(v) + "'");
      }
    } else if (word == "intent") {
      auto v = next("absolute or cumulative");
      if (v == "absolute") {
        sc_.intent = IntentMode::Absolute;
      } else if (v == "cumulative") {
        sc_.intent = IntentMode::Cumulative;
      } else {
        error("unknown intent '" + std::string(v) + "'");
      }
    } else if (word == "actor") {
      actor();
    } else if (word == "trusted") {
      auto who = actor_ref();
      sc_.trusted.insert(who);
      trusted_lines_.emplace_back(who, line_);
    } else if (word == "bound") {
      auto spender = actor_ref();
      auto value = amount();
      auto owner = owner_ref();
      sc_.bounds.insert_or_assign(AccountPair{owner, spender}, value);
    } else if (word == "allow") {
      auto spender = actor_ref();
      auto value = amount();
      auto owner = owner_ref();
      sc_.script.emplace_back(step::Allow{owner, spender, value});
    } else if (word == "spend") {
      step::Spend s{actor_ref(), actor_ref(), actor_ref(), amount(), std::nullopt, false};
      while (more()) {
        if (accept("priority")) {
          s.priority = number("a priority");
        } else if (accept("pending")) {
          s.pending = true;
        } else {
          break;
        }
      }
      sc_.script.emplace_back(std::move(s));
    } else if (word == "transfer") {
      step::Transfer t{actor_ref(), actor_ref(), amount()};
      sc_.script.emplace_back(std::move(t));
    } else if (word == "interleave") {
      InterleaveDirective d;
      if (accept("exhaustive")) {
        d.mode = InterleaveDirective::Mode::Exhaustive;
      } else if (accept("sample")) {
        d.mode = InterleaveDirective::Mode::Sample;
        d.count = number("a sample count");
        if (d.count == 0) error("sample count must be at least 1");
        if (!accept("seed")) error("expected 'seed <s>'");
        d.seed = number("a seed");
      } else {
        error("expected 'exhaustive' or 'sample <count> seed <s>'");
      }
      sc_.interleave = d;
    } else {
      error("unknown directive '" + std::string(word) + "'");
    }
    done();
  }

  void actor() {
    auto tok = next("an actor name");
    ActorDecl a{Address{std::string(tok)}, Amount{}, {}, {}, kDefaultPriority};
    if (sc_.actor(a.name)) error("duplicate actor '" + std::string(tok) + "'");
    bool owner = false;
    while (more()) {
      if (accept("balance")) {
        a.balance = amount();
      } else if (accept("owner")) {
        owner = true;
        if (accept("zero-first")) {
          a.owner.kind = OwnerPolicy::Kind::ZeroFirst;
        } else {
          accept("direct");
        }
        if (accept("abort")) {
          if (accept("never")) {
            a.owner.abort_rule = AbortRule::Never;
          } else if (accept("provable")) {
            a.owner.abort_rule = AbortRule::Provable;
          } else if (accept("any")) {
            a.owner.abort_rule = AbortRule::AnyTransfer;
          } else {
            error("expected never, provable or any after 'abort'");
          }
        }
      } else if (accept("front-runner")) {
        a.adversary.kind = AdversaryPolicy::Kind::FrontRunner;
        while (more()) {
          if (accept("boost")) {
            a.adversary.priority_boost = number("a priority boost");
          } else if (accept("recipient")) {
            a.adversary.recipient = Address{std::string(next("a recipient"))};
          } else if (accept("no-drain")) {
            a.adversary.drain = false;
          } else {
            break;
          }
        }
      } else if (accept("passive")) {
        a.adversary.kind = AdversaryPolicy::Kind::Passive;
      } else if (accept("priority")) {
        a.priority = number("a priority");
      } else {
        error("unknown actor option '" + std::string(toks_[at_]) + "'");
      }
    }
    if (a.adversary.recipient) recipient_lines_.emplace_back(*a.adversary.recipient, line_);
    if (owner) declared_owners_.push_back(a.name);
    sc_.actors.push_back(std::move(a));
  }

  void finish() {
    if (!have_strategy_) throw ParseError(0, "missing 'strategy' directive");
    for (auto const& [who, line] : recipient_lines_) {
      if (!sc_.actor(who)) throw ParseError(line, "undeclared actor '" + who.label() + "'");
    }
    for (auto const& [who, line] : trusted_lines_) {
      if (sc_.actor(who)->adversary.kind == AdversaryPolicy::Kind::FrontRunner) {
        throw ParseError(line, "trusted spender '" + who.label() + "' cannot be a front-runner");
      }
    }
    try {
      validate(sc_);
    } catch (ScenarioError const& e) {
      throw ParseError(0, e.what());
    }
  }

  Scenario sc_;
  std::size_t line_ = 0;
  std::vector<std::string_view> toks_;
  std::size_t at_ = 0;
  bool have_strategy_ = false;
  std::vector<Address> declared_owners_;
  std::vector<std::pair<Address, std::size_t>> recipient_lines_;
  std::vector<std::pair<Address, std::size_t>> trusted_lines_;
};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view abort_word(AbortRule r) {
  switch (r) {
    case AbortRule::Never: return "never";
    case AbortRule::Provable: return "provable";
    case AbortRule::AnyTransfer: return "any";
  }
  return "provable";
}

}  // namespace

Scenario parse_scenario(std::string_view text) { return Parser{}.parse(text); }

std::string serialize_scenario(Scenario const& sc) {
  std::ostringstream os;
  os << "strategy " << sc.strategy << '\n';
  if (sc.surface == Surface::Erc20) os << "surface erc20\n";
  if (sc.intent == IntentMode::Cumulative) os << "intent cumulative\n";
  for (auto const& a : sc.actors) {
    os << "actor " << a.name.label() << " balance " << a.balance;
    if (a.owner != OwnerPolicy{}) {
      os << " owner " << (a.owner.kind == OwnerPolicy::Kind::ZeroFirst ? "zero-first" : "direct")
         << " abort " << abort_word(a.owner.abort_rule);
    }
    if (a.adversary.kind == AdversaryPolicy::Kind::FrontRunner) {
      os << " front-runner boost " << a.adversary.priority_boost;
      if (a.adversary.recipient) os << " recipient " << a.adversary.recipient->label();
      if (!a.adversary.drain) os << " no-drain";
    }
    if (a.priority != kDefaultPriority) os << " priority " << a.priority;
    os << '\n';
  }
  for (auto const& t : sc.trusted) os << "trusted " << t.label() << '\n';
  for (auto const& [pair, v] : sc.bounds) {
    os << "bound " << pair.spender.label() << ' ' << v << " by " << pair.owner.label() << '\n';
  }
  for (auto const& s : sc.script) {
    std::visit(Overloaded{
                   [&](step::Allow const& x) {
                     os << "allow " << x.spender.label() << ' ' << x.amount << " by "
                        << x.owner.label();
                   },
                   [&](step::Spend const& x) {
                     os << "spend " << x.spender.label() << ' ' << x.owner.label() << ' '
                        << x.to.label() << ' ' << x.amount;
                     if (x.priority) os << " priority " << *x.priority;
                     if (x.pending) os << " pending";
                   },
                   [&](step::Transfer const& x) {
                     os << "transfer " << x.from.label() << ' ' << x.to.label() << ' ' << x.amount;
                   },
               },
               s);
    os << '\n';
  }
  if (sc.interleave) {
    if (sc.interleave->mode == InterleaveDirective::Mode::Exhaustive) {
      os << "interleave exhaustive\n";
    } else {
      os << "interleave sample " << sc.interleave->count << " seed " << sc.interleave->seed << '\n';
    }
  }
  return os.str();
}

}  // namespace allowlab
