#include "commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "jessy/depvec.hpp"
#include "jessy/error.hpp"
#include "jessy/history_io.hpp"

namespace jessy::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw ConfigError("cannot write " + path);
}

std::string delta_units(double v) {
  std::ostringstream s;
  s << v << "Δ";
  return s.str();
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  SimConfig cfg = load_config(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.mode) {
    cfg.mode = *opts.mode;
    cfg.validate();
  }
  const RunTrace trace = run(cfg);
  const char* env = std::getenv("JESSY_VERBOSE");
  if (opts.verbose || (env && std::string(env) == "1"))
    for (const std::string& line : trace.log) err << line << '\n';
  if (!opts.trace.empty()) write_file(opts.trace, render_trace(trace));

  const History h = extract_history(trace);
  if (!opts.out.empty()) write_file(opts.out, render_poset_json(h));

  const AccountReport report = account(trace);
  std::size_t committed = 0;
  for (const TxnAccount& a : report.txns) committed += a.committed ? 1 : 0;
  out << "transactions: " << report.txns.size() << " committed: " << committed
      << " aborted: " << report.txns.size() - committed << '\n';
  if (opts.list_txns) {
    for (const TxnAccount& a : report.txns) {
      const TxnTrace& t = trace.txns[a.id.value];
      out << "T" << a.id.value << " coord=" << t.plan.coord << ' ' << to_string(a.kind) << ' '
          << (a.committed ? "committed" : "aborted") << " latency=" << delta_units(a.latency)
          << " messages=" << a.messages << '\n';
    }
  }
  const std::vector<std::string> problems = check_run(trace);
  for (const std::string& p : problems) out << "problem: " << p << '\n';
  out << "genuineness violations: " << report.genuineness_violations << '\n';
  const Verdict v = check(h, Criterion::kNmsi);
  out << "NMSI: " << (v.holds ? "holds" : "violated (" + v.detail + ")") << '\n';
  return v.holds && problems.empty() && report.genuineness_violations == 0 ? kOk : kViolation;
}

int cmd_check(const CheckOptions& opts, std::ostream& out, std::ostream&) {
  const History h = parse_history(read_file(opts.file));
  std::vector<Criterion> criteria = opts.criteria;
  if (criteria.empty()) criteria.assign(std::begin(kAllCriteria), std::end(kAllCriteria));
  bool all = true;
  if (opts.json) out << "[\n";
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Verdict v = check(h, criteria[k]);
    all = all && v.holds;
    if (opts.json) {
      std::string doc = verdict_json(h, v);
      while (!doc.empty() && doc.back() == '\n') doc.pop_back();
      out << doc << (k + 1 < criteria.size() ? ",\n" : "\n");
      continue;
    }
    out << std::left << std::setw(11) << (std::string(to_string(v.criterion)) + ":") << (v.holds ? "true" : "false");
    if (!v.holds) {
      out << "  witness:";
      for (std::size_t op : v.ops) out << ' ' << render_op(h, op);
      if (!v.detail.empty()) out << "  (" << v.detail << ')';
    }
    out << '\n';
  }
  if (opts.json) out << "]\n";
  return all ? kOk : kViolation;
}

int cmd_fuzz(const FuzzOptions& opts, std::ostream& out, std::ostream& err) {
  std::size_t histories = 0;
  std::size_t si_mismatches = 0;
  std::size_t si_histories = 0;
  std::size_t nmsi_mismatches = 0;
  std::size_t nmsi_histories = 0;
  std::size_t write_pairs = 0;
  std::size_t dv_mismatches = 0;
  std::size_t txns = 0;
  std::size_t compat_mismatches = 0;
  std::size_t dumped = 0;

  auto dump = [&](const History& h, const std::string& why) {
    if (opts.dump_dir.empty() || dumped >= 10) return;
    std::filesystem::create_directories(opts.dump_dir);
    const auto path = std::filesystem::path(opts.dump_dir) / ("counterexample-" + std::to_string(++dumped) + ".txt");
    write_file(path.string(), "# " + why + "\n" + render_linear(h) + "\n");
  };

  enumerate_histories(opts.bounds, [&](const History& h) {
    ++histories;
    const bool oracle = si_oracle(h).holds;
    bool decomposed = check(h, Criterion::kSiDecomp).holds;
    if (opts.mutate)
      decomposed = check(h, Criterion::kAca).holds && check(h, Criterion::kScons).holds &&
                   check(h, Criterion::kMon).holds;
    if (oracle != decomposed) {
      ++si_mismatches;
      dump(h, "SI oracle and decomposition disagree");
    }
    const bool nmsi = check(h, Criterion::kNmsi).holds;
    if (decomposed) {
      ++si_histories;
      if (!nmsi) {
        ++nmsi_mismatches;
        dump(h, "SI but not NMSI");
      }
    }
    if (!nmsi) return;
    ++nmsi_histories;
    const DvAnnotation dv = dv_annotate(h);
    for (std::size_t a = 0; a < h.op_count(); ++a) {
      const Operation& wa = h.op(a);
      if (wa.kind != OpKind::kWrite || !h.committed(wa.txn)) continue;
      for (std::size_t b = 0; b < h.op_count(); ++b) {
        const Operation& wb = h.op(b);
        if (wb.kind != OpKind::kWrite || !h.committed(wb.txn) || wb.txn == wa.txn) continue;
        ++write_pairs;
        if (h.depends(wa.txn, wb.txn) != dominates(dv[a], dv[b])) {
          ++dv_mismatches;
          dump(h, "dependency and vector dominance disagree");
        }
      }
    }
    for (std::uint32_t t = 1; t < h.txn_count(); ++t) {
      ++txns;
      if (dv_snapshot_consistent(h, dv, TxnId{t}).consistent != consistent_snapshot(h, TxnId{t})) {
        ++compat_mismatches;
        dump(h, "pairwise compatibility and consistent snapshot disagree");
      }
    }
  });

  out << "SI decomposition" << (opts.mutate ? " (mutant without WCF)" : "") << ": " << histories << " histories, "
      << si_mismatches << " mismatches\n";
  out << "SI implies NMSI: " << si_histories << " SI histories, " << nmsi_mismatches << " mismatches\n";
  out << "dependence vectors: " << nmsi_histories << " NMSI histories, " << write_pairs << " write pairs, "
      << dv_mismatches << " mismatches\n";
  out << "compatibility: " << txns << " transactions, " << compat_mismatches << " mismatches\n";
  if (dumped) err << dumped << " counterexample(s) written to " << opts.dump_dir << '\n';
  if (opts.mutate) {
    out << (si_mismatches ? "mutant detected\n" : "mutant survived\n");
    return si_mismatches ? kOk : kViolation;
  }
  return si_mismatches + nmsi_mismatches + dv_mismatches + compat_mismatches == 0 ? kOk : kViolation;
}

int cmd_latency(const LatencyOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<LatencyProfile> profiles{LatencyProfile::kReadOnly, LatencyProfile::kGlobalUpdate,
                                       LatencyProfile::kLocalUpdate};
  if (opts.profile) profiles = {*opts.profile};
  bool ok = true;
  bool unmeasurable = false;
  for (LatencyProfile p : profiles) {
    std::vector<std::size_t> rows;
    if (opts.remote_reads) {
      rows.push_back(*opts.remote_reads);
    } else {
      for (std::size_t r = p == LatencyProfile::kGlobalUpdate ? 1 : 0; r <= 3; ++r) rows.push_back(r);
    }
    for (std::size_t r : rows) {
      out << to_string(p) << " r_r=" << r << ": expected " << delta_units(expected_latency(p, r));
      if (p == LatencyProfile::kGlobalUpdate && r == 0) {
        out << ", not measurable (a global update reads the remote object it writes)\n";
        unmeasurable = true;
        continue;
      }
      LatencyResult res = measure_latency(p, r, opts.delta, opts.mode);
      for (std::size_t k = 1; k < opts.repetitions; ++k) {
        const LatencyResult again = measure_latency(p, r, opts.delta, opts.mode);
        if (again.measured != res.measured) {
          err << "latency changed between repetitions\n";
          ok = false;
        }
      }
      out << ", measured " << delta_units(res.measured);
      if (res.tolerance > 0) out << " (tolerance ±" << delta_units(res.tolerance) << ")";
      out << ", messages " << res.messages << (res.ok() ? "" : "  MISMATCH") << '\n';
      ok = ok && res.ok();
    }
  }
  if (opts.messages) {
    const auto points = update_messages(opts.max_writes, opts.members, opts.delta);
    for (auto [w, m] : points) out << "w_r=" << w << ": " << m << " messages\n";
    QuadraticFit fit = fit_quadratic(points);
    for (double* coef : {&fit.a, &fit.b, &fit.c})
      if (std::abs(*coef) < 1e-9) *coef = 0;
    out << std::fixed << std::setprecision(3) << "fit: messages = " << fit.a << " + " << fit.b << "·w_r + " << fit.c << "·w_r² (R² = " << fit.r2 << ")\n" << std::defaultfloat;
    ok = ok && fit.r2 >= 0.99;
  }
  if (!ok) return kViolation;
  return unmeasurable ? kUsage : kOk;
}

int main_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Snapshot isolation checker and partial-replication protocol simulator", "jessy"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string run_mode;
  auto* run_cmd = app.add_subcommand("run", "Simulate a configuration and check the produced history");
  run_cmd->add_option("--config", run_opts.config, "TOML run configuration")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_opts.seed, "Override the configured seed");
  run_cmd->add_option("--mode", run_mode, "Override the vector mode")->check(CLI::IsMember({"dv", "pdv"}));
  run_cmd->add_option("--out", run_opts.out, "Write the extracted history (poset JSON)");
  run_cmd->add_option("--trace", run_opts.trace, "Write the event log");
  run_cmd->add_flag("--txns", run_opts.list_txns, "List every transaction");
  run_cmd->add_flag("-v,--verbose", run_opts.verbose, "Echo the event log to stderr");

  CheckOptions check_opts;
  std::vector<std::string> criteria;
  auto* check_cmd = app.add_subcommand("check", "Check a history file against consistency criteria");
  check_cmd->add_option("file", check_opts.file, "History in linear notation or poset JSON")
      ->required()
      ->check(CLI::ExistingFile);
  check_cmd->add_option("--criteria", criteria, "Comma-separated: aca,cons,sconsa,sconsb,scons,mon,wcf,nmsi,si,si-oracle")
      ->delimiter(',');
  check_cmd->add_flag("--json", check_opts.json, "Print verdicts as JSON");

  FuzzOptions fuzz_opts;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Exhaustively cross-check the checkers on small histories");
  fuzz_cmd->add_option("--max-txns", fuzz_opts.bounds.max_txns, "Transactions per history")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  fuzz_cmd->add_option("--max-objects", fuzz_opts.bounds.max_objects, "Objects per history")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  fuzz_cmd->add_option("--ops", fuzz_opts.bounds.max_ops, "Operations per history")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  fuzz_cmd->add_option("--budget", fuzz_opts.bounds.budget, "Maximum histories to enumerate")->capture_default_str();
  fuzz_cmd->add_flag("--mutate", fuzz_opts.mutate, "Self-test against a checker with WCF removed");
  fuzz_cmd->add_option("--dump", fuzz_opts.dump_dir, "Directory for counterexamples");

  LatencyOptions lat_opts;
  std::string profile;
  std::string lat_mode = "dv";
  auto* lat_cmd = app.add_subcommand("latency", "Measure contention-free latency and message counts");
  lat_cmd->add_option("--profile", profile, "readonly, global-update or local-update (default: all)")
      ->check(CLI::IsMember({"readonly", "global-update", "local-update"}));
  lat_cmd->add_option("--remote-reads", lat_opts.remote_reads, "Remote reads r_r (default: 0..3)");
  lat_cmd->add_option("--delta", lat_opts.delta, "Ticks per message hop")->check(CLI::PositiveNumber)->capture_default_str();
  lat_cmd->add_option("--mode", lat_mode, "Vector mode")->check(CLI::IsMember({"dv", "pdv"}))->capture_default_str();
  lat_cmd->add_option("--repetitions", lat_opts.repetitions, "Runs per row")->check(CLI::PositiveNumber)->capture_default_str();
  lat_cmd->add_flag("--messages", lat_opts.messages, "Fit update message counts against w_r");
  lat_cmd->add_option("--max-writes", lat_opts.max_writes, "Largest w_r for --messages")
      ->check(CLI::Range(3, 12))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      if (!run_mode.empty()) run_opts.mode = run_mode == "pdv" ? VectorMode::kPdv : VectorMode::kDv;
      return cmd_run(run_opts, out, err);
    }
    if (*check_cmd) {
      for (const std::string& name : criteria) {
        auto c = parse_criterion(name);
        if (!c) {
          err << "unknown criterion '" << name << "'\n";
          return kUsage;
        }
        check_opts.criteria.push_back(*c);
      }
      return cmd_check(check_opts, out, err);
    }
    if (*fuzz_cmd) return cmd_fuzz(fuzz_opts, out, err);
    if (!profile.empty()) lat_opts.profile = parse_latency_profile(profile);
    lat_opts.mode = lat_mode == "pdv" ? VectorMode::kPdv : VectorMode::kDv;
    return cmd_latency(lat_opts, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kUsage;
}

}  // namespace jessy::cli
