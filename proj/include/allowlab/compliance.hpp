#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "allowlab/scheduler.hpp"
#include "allowlab/trace_io.hpp"

namespace allowlab {

// ---------------------------------------------------------------------------
// Attack oracle

class OracleConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleVerdict {
  bool violated = false;
  Amount cumulative;  ///< withdrawn by the spender plus what it may still withdraw
  Amount bound;

  [[nodiscard]] std::string str() const;
  friend bool operator==(OracleVerdict const&, OracleVerdict const&) = default;
};

/// Successful transferFrom outflow from `pair.owner` sent by `pair.spender`,
/// attributed by transaction sender.
Amount spender_outflow(Trace const& trace, AccountPair const& pair);

/// Compares the spender's cumulative reach against the safe bound. A single
/// adjustment N -> M is bounded by max(N, M); several adjustments need an
/// explicit bound. Throws OracleConfigError when `adjustments` is empty or
/// the bound is missing.
OracleVerdict attack_oracle(Strategy const& strategy, Trace const& trace, AccountPair const& pair,
                            std::span<Adjustment const> adjustments,
                            std::optional<Amount> bound = std::nullopt);

struct PairVerdict {
  AccountPair pair;
  OracleVerdict verdict;
};

/// Oracle verdict for every pair whose allowance the script adjusts.
/// Empty when the scenario makes no adjustment.
std::vector<PairVerdict> judge_scenario(Scenario const& scenario, Strategy const& strategy,
                                        Trace const& trace);
bool any_violated(std::span<PairVerdict const> verdicts);

// ---------------------------------------------------------------------------
// Criteria

enum class Criterion : std::uint8_t {
  AbsoluteInput,     ///< C1
  Overwrite,         ///< C2
  ZeroTransfer,      ///< C3
  SplitWithdrawal,   ///< C4
  InitialLegit,      ///< C5
  Interoperable,     ///< C6
  RaceFree,          ///< C7
  DeadlockFree,
};

inline constexpr std::array<Criterion, 8> kAllCriteria = {
    Criterion::AbsoluteInput, Criterion::Overwrite,     Criterion::ZeroTransfer,
    Criterion::SplitWithdrawal, Criterion::InitialLegit, Criterion::Interoperable,
    Criterion::RaceFree,      Criterion::DeadlockFree,
};

/// "C1".."C7" and "deadlockFree".
std::string_view criterion_id(Criterion c);
std::string_view criterion_title(Criterion c);
/// Throws std::invalid_argument on an unknown id.
Criterion parse_criterion_id(std::string_view id);

enum class Verdict : std::uint8_t { Pass, Fail, NotApplicable, Error };
std::string_view to_string(Verdict v);

struct CriterionResult {
  Verdict verdict = Verdict::Error;
  std::string detail;
  std::optional<Trace> witness;  ///< always present on Fail
};

/// Runs the executable probe for `c`. Exceptions from the strategy escape.
CriterionResult check_criterion(Strategy const& strategy, Criterion c);

enum class Mitigation : std::uint8_t { Yes, No, OnlyViaNonStandardMethods };
std::string_view to_string(Mitigation m);

struct MitigationResult {
  std::optional<Mitigation> value;  ///< empty when the probe errored
  std::string detail;
  std::optional<Trace> witness;     ///< a violating trace when not Yes
};

/// Yes: safe on the legacy ERC20 surface and race-free. Only via
/// non-standard methods: unsafe on the legacy surface, safe when callers use
/// the strategy's own adjustment methods. No otherwise.
MitigationResult check_mitigation(Strategy const& strategy);

// ---------------------------------------------------------------------------
// Matrix

struct StrategyRow {
  std::string strategy;
  MitigationResult mitigates;
  std::vector<std::pair<Criterion, CriterionResult>> criteria;  ///< kAllCriteria order

  [[nodiscard]] CriterionResult const& result(Criterion c) const;
  /// C1 and C2 combined.
  [[nodiscard]] Verdict approve_semantics() const;
  [[nodiscard]] bool all_pass() const;
};

struct ComplianceReport {
  std::vector<StrategyRow> rows;
};

/// Evaluates every strategy; a probe that throws yields an Error cell.
ComplianceReport build_matrix(std::span<StrategyPtr const> strategies);

std::string witness_id(std::string_view strategy, std::string_view cell);

std::string format_table(ComplianceReport const& report);
Json report_to_json(ComplianceReport const& report);

}  // namespace allowlab
