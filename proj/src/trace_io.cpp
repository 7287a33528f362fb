#include "allowlab/trace_io.hpp"

#include <istream>
#include <ostream>

namespace allowlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Address address_from_json(Json const& j) {
  if (!j.is_string()) throw TraceFormatError("expected an address string");
  return Address(j.get<std::string>());
}

Json pair_json(AccountPair const& p) {
  return Json{{"owner", p.owner.label()}, {"spender", p.spender.label()}};
}

AccountPair pair_from_json(Json const& j) {
  return {address_from_json(j.at("owner")), address_from_json(j.at("spender"))};
}

}  // namespace

Json to_json(Amount const& a) { return a.str(); }

Amount amount_from_json(Json const& j) {
  if (!j.is_string()) throw TraceFormatError("amounts are encoded as decimal strings");
  auto a = Amount::parse(j.get<std::string>());
  if (!a) throw TraceFormatError("malformed amount '" + j.get<std::string>() + "'");
  return *a;
}

Json to_json(Call const& c) {
  Json j{{"method", std::string(method_name(kind_of(c)))}};
  std::visit(Overloaded{
                 [&](call::Approve const& a) {
                   j["spender"] = a.spender.label();
                   j["value"] = to_json(a.value);
                 },
                 [&](call::TransferFrom const& a) {
                   j["from"] = a.from.label();
                   j["to"] = a.to.label();
                   j["value"] = to_json(a.value);
                 },
                 [&](call::Transfer const& a) {
                   j["to"] = a.to.label();
                   j["value"] = to_json(a.value);
                 },
                 [&](call::IncreaseApproval const& a) {
                   j["spender"] = a.spender.label();
                   j["delta"] = to_json(a.delta);
                 },
                 [&](call::DecreaseApproval const& a) {
                   j["spender"] = a.spender.label();
                   j["delta"] = to_json(a.delta);
                 },
                 [&](call::OverloadedApprove const& a) {
                   j["spender"] = a.spender.label();
                   j["expected"] = to_json(a.expected);
                   j["value"] = to_json(a.value);
                 },
                 [&](call::SafeApprove const& a) {
                   j["spender"] = a.spender.label();
                   j["expected"] = to_json(a.expected);
                   j["value"] = to_json(a.value);
                 },
                 [&](call::QueryAllowance const& a) {
                   j["owner"] = a.owner.label();
                   j["spender"] = a.spender.label();
                 },
                 [&](call::QueryBalance const& a) { j["owner"] = a.owner.label(); },
             },
             c);
  return j;
}

Call call_from_json(Json const& j) {
  auto const kind = parse_method_name(j.at("method").get<std::string>());
  if (!kind) throw TraceFormatError("unknown method '" + j.at("method").get<std::string>() + "'");
  auto addr = [&](char const* k) { return address_from_json(j.at(k)); };
  auto amt = [&](char const* k) { return amount_from_json(j.at(k)); };
  switch (*kind) {
    case CallKind::Approve:
      return call::Approve{addr("spender"), amt("value")};
    case CallKind::TransferFrom:
      return call::TransferFrom{addr("from"), addr("to"), amt("value")};
    case CallKind::Transfer:
      return call::Transfer{addr("to"), amt("value")};
    case CallKind::IncreaseApproval:
      return call::IncreaseApproval{addr("spender"), amt("delta")};
    case CallKind::DecreaseApproval:
      return call::DecreaseApproval{addr("spender"), amt("delta")};
    case CallKind::OverloadedApprove:
      return call::OverloadedApprove{addr("spender"), amt("expected"), amt("value")};
    case CallKind::SafeApprove:
      return call::SafeApprove{addr("spender"), amt("expected"), amt("value")};
    case CallKind::QueryAllowance:
      return call::QueryAllowance{addr("owner"), addr("spender")};
    case CallKind::QueryBalance:
      return call::QueryBalance{addr("owner")};
  }
  throw TraceFormatError("unknown method");
}

Json to_json(Event const& e) {
  return std::visit(Overloaded{
                        [](TransferEvent const& t) {
                          return Json{{"event", "Transfer"},
                                      {"from", t.from.label()},
                                      {"to", t.to.label()},
                                      {"value", to_json(t.value)}};
                        },
                        [](ApprovalEvent const& a) {
                          return Json{{"event", "Approval"},
                                      {"owner", a.owner.label()},
                                      {"spender", a.spender.label()},
                                      {"value", to_json(a.value)}};
                        },
                    },
                    e);
}

Event event_from_json(Json const& j) {
  auto const name = j.at("event").get<std::string>();
  if (name == "Transfer") {
    return TransferEvent{address_from_json(j.at("from")), address_from_json(j.at("to")),
                         amount_from_json(j.at("value"))};
  }
  if (name == "Approval") {
    return ApprovalEvent{address_from_json(j.at("owner")), address_from_json(j.at("spender")),
                         amount_from_json(j.at("value"))};
  }
  throw TraceFormatError("unknown event '" + name + "'");
}

Json to_json(Receipt const& r) {
  Json j{{"status", r.ok() ? "success" : "revert"}};
  j["reason"] = r.reason ? Json(*r.reason) : Json(nullptr);
  Json events = Json::array();
  for (auto const& e : r.events) events.push_back(to_json(e));
  j["events"] = std::move(events);
  if (r.output) j["output"] = to_json(*r.output);
  return j;
}

Json to_json(LedgerState const& s) {
  Json j;
  j["supply"] = to_json(s.total_supply());
  Json balances = Json::object();
  for (auto const& [who, v] : s.balances()) balances[who.label()] = to_json(v);
  j["balances"] = std::move(balances);
  auto pair_list = [](auto const& m, auto&& value_json) {
    Json arr = Json::array();
    for (auto const& [p, v] : m) {
      auto rec = pair_json(p);
      rec.update(value_json(v));
      arr.push_back(std::move(rec));
    }
    return arr;
  };
  j["allowed"] = pair_list(s.allowances(), [](Amount const& v) { return Json{{"value", to_json(v)}}; });
  j["transferred"] =
      pair_list(s.transferred_counters(), [](Amount const& v) { return Json{{"value", to_json(v)}}; });
  j["used"] = pair_list(s.used_flags(), [](bool v) { return Json{{"value", v}}; });
  j["residual"] = pair_list(s.residuals(), [](ResidualEntry const& v) {
    return Json{{"initial", to_json(v.initial)}, {"residual", to_json(v.residual)}};
  });
  Json log = Json::array();
  for (auto const& e : s.event_log()) {
    auto rec = to_json(e.event);
    rec["tx"] = e.tx_index;
    log.push_back(std::move(rec));
  }
  j["events"] = std::move(log);
  return j;
}

LedgerState state_from_json(Json const& j) {
  LedgerState s;
  s.set_total_supply(amount_from_json(j.at("supply")));
  for (auto const& [who, v] : j.at("balances").items()) s.set_balance(Address(who), amount_from_json(v));
  for (auto const& r : j.at("allowed")) s.set_allowed(pair_from_json(r), amount_from_json(r.at("value")));
  for (auto const& r : j.at("transferred")) {
    s.set_transferred(pair_from_json(r), amount_from_json(r.at("value")));
  }
  for (auto const& r : j.at("used")) s.set_used_flag(pair_from_json(r), r.at("value").get<bool>());
  for (auto const& r : j.at("residual")) {
    s.set_residual(pair_from_json(r), {amount_from_json(r.at("initial")),
                                       amount_from_json(r.at("residual"))});
  }
  for (auto const& e : j.at("events")) s.append_event(e.at("tx").get<std::uint64_t>(), event_from_json(e));
  return s;
}

// ---------------------------------------------------------------------------

void write_trace_jsonl(std::ostream& out, Trace const& trace) {
  Json header{{"type", "header"},
              {"strategy", trace.strategy},
              {"initial_state", to_json(trace.initial_state)},
              {"initial_hash", state_hash(trace.initial_state)}};
  out << header.dump() << '\n';
  for (auto const& e : trace.entries) {
    Json rec{{"type", "tx"},
             {"index", e.index},
             {"sender", e.tx.sender.label()},
             {"call", to_json(e.tx.call)},
             {"priority", e.tx.priority},
             {"nonce", e.tx.nonce}};
    auto receipt = to_json(e.receipt);
    rec.update(receipt);
    rec["state_hash"] = e.state_hash;
    out << rec.dump() << '\n';
  }
}

Trace read_trace_jsonl(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  LedgerState state;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto const j = Json::parse(line);
      auto const type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw TraceFormatError("second header record");
        have_header = true;
        trace.strategy = j.at("strategy").get<std::string>();
        trace.initial_state = state_from_json(j.at("initial_state"));
        if (state_hash(trace.initial_state) != j.at("initial_hash").get<std::string>()) {
          throw TraceFormatError("initial state does not match its recorded hash");
        }
        continue;
      }
      if (type != "tx") throw TraceFormatError("unknown record type '" + type + "'");
      if (!have_header) throw TraceFormatError("transaction record before header");
      TraceEntry e;
      e.index = j.at("index").get<std::uint64_t>();
      e.tx = Transaction{address_from_json(j.at("sender")), call_from_json(j.at("call")),
                         j.at("priority").get<std::uint64_t>(), j.at("nonce").get<std::uint64_t>()};
      auto const status = j.at("status").get<std::string>();
      if (status != "success" && status != "revert") {
        throw TraceFormatError("unknown status '" + status + "'");
      }
      e.receipt.status = status == "success" ? Status::Success : Status::Revert;
      if (!j.at("reason").is_null()) e.receipt.reason = j.at("reason").get<std::string>();
      for (auto const& ev : j.at("events")) e.receipt.events.push_back(event_from_json(ev));
      if (j.contains("output")) e.receipt.output = amount_from_json(j.at("output"));
      e.state_hash = j.at("state_hash").get<std::string>();
      trace.entries.push_back(std::move(e));
    } catch (TraceFormatError const& err) {
      throw TraceFormatError("line " + std::to_string(line_no) + ": " + err.what());
    } catch (Json::exception const& err) {
      throw TraceFormatError("line " + std::to_string(line_no) + ": " + err.what());
    } catch (std::invalid_argument const& err) {
      throw TraceFormatError("line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  if (!have_header) throw TraceFormatError("missing header record");
  return trace;
}

ReplayReport replay(Trace const& recorded) {
  ReplayReport report;
  auto const strategy = find_strategy(recorded.strategy);
  if (!strategy) {
    report.ok = false;
    report.message = "unknown strategy '" + recorded.strategy + "'";
    return report;
  }
  LedgerState state = recorded.initial_state;
  for (std::size_t i = 0; i < recorded.entries.size(); ++i) {
    auto const& e = recorded.entries[i];
    auto outcome = strategy->execute(state, e.tx, e.index);
    auto const hash = state_hash(outcome.state);
    if (!(outcome.receipt == e.receipt)) {
      report = {false, i, i, "receipt mismatch at index " + std::to_string(e.index)};
      return report;
    }
    if (hash != e.state_hash) {
      report = {false, i, i, "state hash mismatch at index " + std::to_string(e.index)};
      return report;
    }
    state = std::move(outcome.state);
    ++report.checked;
  }
  report.message = "hashes verified";
  return report;
}

}  // namespace allowlab
