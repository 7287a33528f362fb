#include "allowlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "allowlab/compliance.hpp"
#include "allowlab/scenario_dsl.hpp"
#include "allowlab/trace_io.hpp"

namespace allowlab {

namespace {

struct CliFailure {
  int code;
  std::string message;
};

std::string read_file(std::string const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{exit_code::kIoError, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(std::string const& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliFailure{exit_code::kIoError, "cannot write '" + path + "'"};
  return out;
}

Scenario load_scenario(std::string const& path) {
  auto const text = read_file(path);
  try {
    return parse_scenario(text);
  } catch (ParseError const& e) {
    throw CliFailure{exit_code::kParseError, path + ": " + e.what()};
  }
}

void print_entry(std::ostream& out, TraceEntry const& e) {
  out << '[' << e.index << "] " << e.tx.sender.label() << ' ' << to_string(e.tx.call) << ' '
      << (e.receipt.ok() ? "success" : "revert");
  if (e.receipt.reason) out << ' ' << *e.receipt.reason;
  for (auto const& ev : e.receipt.events) out << ' ' << to_string(ev);
  out << '\n';
}

std::set<AccountPair> scripted_pairs(Scenario const& sc) {
  std::set<AccountPair> pairs;
  for (auto const& s : sc.script) {
    if (auto const* a = std::get_if<step::Allow>(&s)) pairs.insert({a->owner, a->spender});
  }
  return pairs;
}

std::string pair_label(AccountPair const& p) { return p.owner.label() + "->" + p.spender.label(); }

std::vector<PairVerdict> judge(Scenario const& sc, Strategy const& strategy, Trace const& trace) {
  try {
    return judge_scenario(sc, strategy, trace);
  } catch (OracleConfigError const& e) {
    throw CliFailure{exit_code::kConfigError, e.what()};
  }
}

int cmd_run(std::string const& path, std::string const& export_path, std::ostream& out) {
  auto const sc = load_scenario(path);
  auto const strategy = find_strategy(sc.strategy);
  Trace trace;
  try {
    trace = run_scenario(sc, *strategy);
  } catch (ScenarioError const& e) {
    throw CliFailure{exit_code::kConfigError, e.what()};
  }
  auto const verdicts = judge(sc, *strategy, trace);

  out << "strategy " << trace.strategy << '\n';
  for (auto const& l : trace.lowerings) {
    out << "intent " << l.intent << " ->";
    if (l.calls.empty()) out << " (nothing)";
    for (std::size_t i = 0; i < l.calls.size(); ++i) out << (i ? ", " : " ") << l.calls[i];
    out << " [" << l.note << "]\n";
  }
  for (auto const& e : trace.entries) print_entry(out, e);
  for (auto const& p : scripted_pairs(sc)) {
    auto const& st = trace.final_state();
    out << "final " << pair_label(p) << " allowance=" << strategy->allowance_view(st, p)
        << " transferred=" << st.transferred(p) << '\n';
  }
  if (verdicts.empty()) out << "verdict none (no allowance adjustment)\n";
  for (auto const& v : verdicts) out << "verdict " << pair_label(v.pair) << ' ' << v.verdict.str() << '\n';

  if (!export_path.empty()) {
    auto file = open_output(export_path);
    write_trace_jsonl(file, trace);
  }
  return any_violated(verdicts) ? exit_code::kViolated : exit_code::kOk;
}

struct EnumerateOptions {
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::size_t bound = kDefaultExhaustiveBound;
};

int cmd_enumerate(std::string const& path, EnumerateOptions const& opt, std::ostream& out) {
  auto const sc = load_scenario(path);
  auto const strategy = find_strategy(sc.strategy);
  PendingSet set;
  try {
    set = build_pending_set(sc, *strategy);
  } catch (ScenarioError const& e) {
    throw CliFailure{exit_code::kConfigError, e.what()};
  }

  std::optional<std::size_t> sample = opt.sample;
  std::uint64_t seed = opt.seed;
  if (!sample && sc.interleave && sc.interleave->mode == InterleaveDirective::Mode::Sample) {
    sample = sc.interleave->count;
    seed = sc.interleave->seed;
  }

  out << "strategy " << sc.strategy << '\n';
  for (std::size_t i = 0; i < set.pending.size(); ++i) {
    out << "pending " << i << ' ' << set.pending[i].sender.label() << ' '
        << to_string(set.pending[i].call) << '\n';
  }
  out << "orderings " << count_valid_orderings(set.pending) << '\n';

  std::vector<Trace> traces;
  try {
    if (sample) {
      traces = sample_interleavings(*strategy, set.initial, set.pending, *sample, seed);
      out << "sampled " << *sample << " seed " << seed << '\n';
    } else {
      traces = enumerate_interleavings(*strategy, set.initial, set.pending, opt.bound);
    }
  } catch (InterleavingBoundExceeded const& e) {
    throw CliFailure{exit_code::kConfigError, e.what()};
  } catch (std::invalid_argument const& e) {
    throw CliFailure{exit_code::kConfigError, e.what()};
  }

  std::size_t violating = 0;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    auto const verdicts = judge(sc, *strategy, traces[k]);
    out << '#' << k << " [";
    for (std::size_t i = 0; i < traces[k].ordering.size(); ++i) out << (i ? "," : "") << traces[k].ordering[i];
    out << ']';
    for (auto const& v : verdicts) out << ' ' << pair_label(v.pair) << ' ' << v.verdict.str();
    out << '\n';
    if (any_violated(verdicts)) ++violating;
  }
  out << "violating " << violating << " of " << traces.size() << '\n';
  return violating > 0 ? exit_code::kViolated : exit_code::kOk;
}

void write_witness(std::filesystem::path const& dir, std::string const& id, Trace const& t) {
  auto name = id;
  std::replace(name.begin(), name.end(), '/', '.');
  auto file = open_output((dir / (name + ".jsonl")).string());
  write_trace_jsonl(file, t);
}

int cmd_matrix(std::string const& out_path, std::string const& witness_dir, std::ostream& out) {
  auto const report = build_matrix(catalog());
  out << format_table(report);
  std::size_t all_pass = 0;
  for (auto const& r : report.rows) {
    if (r.all_pass()) {
      out << "all columns pass: " << r.strategy << '\n';
      ++all_pass;
    }
  }
  if (all_pass == 0) out << "all columns pass: none\n";
  if (!out_path.empty()) {
    auto file = open_output(out_path);
    file << report_to_json(report).dump(2) << '\n';
  }
  if (!witness_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(witness_dir, ec);
    if (ec) throw CliFailure{exit_code::kIoError, "cannot create '" + witness_dir + "'"};
    for (auto const& r : report.rows) {
      if (r.mitigates.witness) write_witness(witness_dir, witness_id(r.strategy, "mitigatesAttack"), *r.mitigates.witness);
      for (auto const& [c, res] : r.criteria) {
        if (res.witness) write_witness(witness_dir, witness_id(r.strategy, criterion_id(c)), *res.witness);
      }
    }
  }
  return exit_code::kOk;
}

int cmd_list(std::ostream& out) {
  for (auto const& s : catalog()) {
    out << s->name();
    for (auto k : s->supported_calls().kinds()) out << ' ' << method_name(k);
    out << '\n';
  }
  return exit_code::kOk;
}

int cmd_replay(std::string const& path, std::ostream& out) {
  auto const text = read_file(path);
  std::istringstream in(text);
  Trace trace;
  try {
    trace = read_trace_jsonl(in);
  } catch (TraceFormatError const& e) {
    throw CliFailure{exit_code::kParseError, path + ": " + e.what()};
  }
  auto const report = replay(trace);
  if (!report.ok) {
    out << "replay failed: " << report.message << '\n';
    return exit_code::kReplayMismatch;
  }
  out << "replayed " << report.checked << " transactions; " << report.message << '\n';
  return exit_code::kOk;
}

}  // namespace

int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Allowance race simulator and compliance lab", "allowlab"};
  app.require_subcommand(1);

  std::string file;
  std::string export_path;
  auto* run = app.add_subcommand("run", "run a scenario and judge it");
  run->add_option("file", file, "scenario document")->required();
  run->add_option("--export", export_path, "write the trace as JSON lines");

  EnumerateOptions enum_opt;
  auto* enumerate = app.add_subcommand("enumerate", "judge every ordering of a scenario's race set");
  enumerate->add_option("file", file, "scenario document")->required();
  auto* sample_opt = enumerate->add_option("--sample", enum_opt.sample, "draw this many random orderings");
  enumerate->add_option("--seed", enum_opt.seed, "seed for --sample")->needs(sample_opt);
  enumerate->add_option("--bound", enum_opt.bound, "largest race set enumerated exhaustively");

  std::string report_path = "compliance_report.json";
  std::string witness_dir;
  auto* matrix = app.add_subcommand("matrix", "evaluate every strategy against every criterion");
  matrix->add_option("--out", report_path, "structured report path ('' to skip)");
  matrix->add_option("--witness-dir", witness_dir, "write failing witnesses as JSON lines");

  auto* list = app.add_subcommand("list-strategies", "print strategy names and methods");

  auto* replay_cmd = app.add_subcommand("replay", "re-execute an exported trace");
  replay_cmd->add_option("trace", file, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (CLI::CallForHelp const& e) {
    return app.exit(e, out, err);
  } catch (CLI::ParseError const& e) {
    app.exit(e, out, err);
    return exit_code::kParseError;
  }

  try {
    if (*run) return cmd_run(file, export_path, out);
    if (*enumerate) return cmd_enumerate(file, enum_opt, out);
    if (*matrix) return cmd_matrix(report_path, witness_dir, out);
    if (*list) return cmd_list(out);
    if (*replay_cmd) return cmd_replay(file, out);
  } catch (CliFailure const& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  }
  return exit_code::kOk;
}

}  // namespace allowlab
