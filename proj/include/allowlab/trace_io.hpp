#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "allowlab/scheduler.hpp"

namespace allowlab {

using Json = nlohmann::ordered_json;

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json to_json(Amount const& a);
Json to_json(Call const& c);
Json to_json(Event const& e);
Json to_json(Receipt const& r);
Json to_json(LedgerState const& s);

Amount amount_from_json(Json const& j);
Call call_from_json(Json const& j);
Event event_from_json(Json const& j);
LedgerState state_from_json(Json const& j);

/// One header record followed by one record per executed transaction.
void write_trace_jsonl(std::ostream& out, Trace const& trace);
/// Throws TraceFormatError with the offending line number.
Trace read_trace_jsonl(std::istream& in);

struct ReplayReport {
  bool ok = true;
  std::size_t checked = 0;
  std::optional<std::size_t> mismatch_index;  ///< first divergent record
  std::string message;
};

/// Re-executes the recorded transactions from the recorded initial state
/// and compares every receipt and state hash.
ReplayReport replay(Trace const& recorded);

}  // namespace allowlab
