#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "allowlab/scheduler.hpp"

namespace allowlab {

/// Scenario document error. `line()` is 1-based; 0 means the whole document.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string const& reason);
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] std::string const& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Parses a line-oriented scenario document:
///
///   strategy <name>
///   surface native|erc20
///   intent absolute|cumulative
///   actor <name> [balance N] [owner direct|zero-first [abort never|provable|any]]
///                [front-runner [boost N] [recipient X] [no-drain]] [passive] [priority N]
///   trusted <spender>
///   bound <spender> <amount> [by <owner>]
///   allow <spender> <amount> [by <owner>]
///   spend <spender> <owner> <to> <amount> [priority N] [pending]
///   transfer <from> <to> <amount>
///   interleave exhaustive | interleave sample <count> seed <s>
///
/// `#` starts a comment. `by <owner>` may be left out when exactly one actor
/// was declared with `owner`.
Scenario parse_scenario(std::string_view text);

/// Canonical document for `scenario`; parsing it yields an equal Scenario.
std::string serialize_scenario(Scenario const& scenario);

}  // namespace allowlab
