// SPDX-License-Identifier: Apache-2.0
// Command-line front end: parses flags, runs one experiment, writes the report.
#ifndef SBISECT_TOOLS_APP_HPP
#define SBISECT_TOOLS_APP_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbisect/sbisect.hpp"

namespace sbisect::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

struct OutputOptions {
  std::string format = "csv";
  std::string out;
  std::string table;
  bool timing = false;
};

inline void add_common(CLI::App* cmd, experiments::Common& common) {
  cmd->add_option("--seed", common.seed, "Master seed")->capture_default_str();
  cmd->add_option("--level", common.level, "Confidence level")->capture_default_str();
  cmd->add_option("--resamples", common.resamples, "Bootstrap resamples")->capture_default_str();
}

inline void add_output(CLI::App* cmd, OutputOptions& output) {
  cmd->add_option("--format", output.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", output.out, "Output path (default: stdout)");
  cmd->add_option("--table", output.table, "Emit only the named table as plain CSV");
  cmd->add_flag("--timing", output.timing, "Record wall time in the report");
}

inline void emit(const ExperimentReport& report, const OutputOptions& output, std::ostream& out) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!output.out.empty()) {
    file.open(output.out);
    if (!file) throw ConfigError("cannot open output file '" + output.out + "'");
    sink = &file;
  }
  if (!output.table.empty()) {
    write_table_csv(*sink, report.table(output.table));
  } else if (output.format == "json") {
    write_json(*sink, report);
  } else {
    write_csv(*sink, report);
  }
}

/// Runs the CLI on `args` (without the program name) and returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic bisection experiments"};
  app.name("sbisect");
  app.require_subcommand(1);

  OutputOptions output;
  std::function<ExperimentReport()> job;
  std::string trace_out;

  experiments::ContractionConfig contraction;
  auto* c = app.add_subcommand("contraction", "Expected scaling factor for one cut law");
  c->add_option("--dist", contraction.cut_spec, "Cut distribution")->capture_default_str();
  c->add_option("--runs", contraction.runs, "Independent runs")->capture_default_str();
  c->add_option("--iters", contraction.iters, "Iterations per run")->capture_default_str();
  c->add_option("--tol", contraction.tol, "Interval length tolerance")->capture_default_str();
  add_common(c, contraction.common);
  add_output(c, output);
  c->callback([&] { job = [&] { return experiments::run_contraction_experiment(contraction); }; });

  experiments::KsectionConfig ksection;
  auto* k = app.add_subcommand("ksection", "Expected scaling factor with K uniform cuts per step");
  k->add_option("--K", ksection.K, "Cuts per step")->capture_default_str();
  k->add_option("--runs", ksection.runs, "Independent runs")->capture_default_str();
  k->add_option("--iters", ksection.iters, "Iterations per run")->capture_default_str();
  add_common(k, ksection.common);
  add_output(k, output);
  k->callback([&] { job = [&] { return experiments::run_ksection_experiment(ksection); }; });

  experiments::FixedRootConfig fixed;
  auto* f = app.add_subcommand("fixed-root", "Iterations to convergence for a fixed root");
  f->add_option("--root", fixed.root, "Root position in (0,1)")->capture_default_str();
  f->add_option("--dist", fixed.cut_spec, "Cut distribution")->capture_default_str();
  f->add_option("--tol", fixed.tol, "Interval length tolerance")->capture_default_str();
  f->add_option("--runs", fixed.runs, "Independent runs")->capture_default_str();
  f->add_option("--iters", fixed.max_iter, "Iteration cap per run")->capture_default_str();
  f->add_option("--trace-out", trace_out, "Write the trace of run 0 as CSV");
  add_common(f, fixed.common);
  add_output(f, output);
  f->callback([&] {
    job = [&] {
      if (!trace_out.empty()) {
        std::ofstream trace_file(trace_out);
        if (!trace_file) throw ConfigError("cannot open trace file '" + trace_out + "'");
        write_trace_csv(trace_file, experiments::fixed_root_trace(fixed, 0));
      }
      return experiments::run_fixed_root_experiment(fixed);
    };
  });

  experiments::StationarityConfig stationarity;
  auto* s = app.add_subcommand("stationarity", "Law of the rescaled root after many steps");
  s->add_option("--root-dist", stationarity.root_spec, "Initial root distribution")->capture_default_str();
  s->add_option("--dist", stationarity.cut_spec, "Cut distribution")->capture_default_str();
  s->add_option("--runs", stationarity.runs, "Independent runs")->capture_default_str();
  s->add_option("--iters", stationarity.iters, "Iterations per run")->capture_default_str();
  s->add_option("--alpha", stationarity.alpha, "KS test level")->capture_default_str();
  add_common(s, stationarity.common);
  add_output(s, output);
  s->callback([&] { job = [&] { return experiments::run_stationarity_experiment(stationarity); }; });

  experiments::DecayConfig decay;
  std::string fit_name = experiments::to_string(decay.fit);
  auto* d = app.add_subcommand("decay", "Convergence of the root law to uniform");
  d->add_option("--root-dist", decay.root_spec, "Initial root distribution")->capture_default_str();
  d->add_option("--dist", decay.cut_spec, "Cut distribution")->capture_default_str();
  d->add_option("--runs", decay.population, "Population size M")->capture_default_str();
  d->add_option("--iters", decay.iters, "Iterations N")->capture_default_str();
  d->add_option("--fit", fit_name, "Fit method: signal, loglinear or nls")->capture_default_str();
  add_common(d, decay.common);
  add_output(d, output);
  d->callback([&] {
    job = [&] {
      decay.fit = experiments::parse_decay_fit(fit_name);
      return experiments::run_decay_experiment(decay);
    };
  });

  experiments::CorrelationConfig correlation;
  auto* r = app.add_subcommand("correlation", "Correlation matrix of successive scaling factors");
  r->add_option("--root-dist", correlation.root_spec, "Initial root distribution")->capture_default_str();
  r->add_option("--dist", correlation.cut_spec, "Cut distribution")->capture_default_str();
  r->add_option("--runs", correlation.runs, "Independent runs M")->capture_default_str();
  r->add_option("--iters", correlation.iters, "Iterations per run")->capture_default_str();
  add_common(r, correlation.common);
  add_output(r, output);
  r->callback([&] { job = [&] { return experiments::run_correlation_experiment(correlation); }; });

  experiments::OperatorConfig op;
  auto* o = app.add_subcommand("operator", "Iterate the transition operator on a grid CDF");
  o->add_option("--g0", op.g0_spec, "Initial CDF: cubic, identity or a distribution spec")->capture_default_str();
  o->add_option("--dist", op.cut_spec, "Cut distribution")->capture_default_str();
  o->add_option("--iters", op.k, "Operator applications")->capture_default_str();
  o->add_option("--grid", op.grid, "Grid nodes")->capture_default_str();
  o->add_option("--delta", op.delta, "Edge band width for the rate bound")->capture_default_str();
  o->add_option("--seed", op.common.seed, "Master seed (echoed only)")->capture_default_str();
  add_output(o, output);
  o->callback([&] { job = [&] { return experiments::run_operator_experiment(op); }; });

  experiments::TheoryConfig theory;
  auto* t = app.add_subcommand("theory", "Closed-form values for one cut law");
  t->add_option("--dist", theory.cut_spec, "Cut distribution")->capture_default_str();
  t->add_option("--iters", theory.n, "n for E[L_n]")->capture_default_str();
  t->add_option("--K", theory.K, "Cuts per step for K-section values (0: none)")->capture_default_str();
  t->add_option("--grid", theory.points, "Points in the tabulated functions")->capture_default_str();
  add_output(t, output);
  t->callback([&] { job = [&] { return experiments::run_theory_report(theory); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report = job();
    if (output.timing) {
      report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (report.experiment == "stationarity" && report.flag("degenerate_orbit")) {
      err << "warning: every rescaled root ended at 0 or 1; the orbit is degenerate and the law cannot converge\n";
    }
    emit(report, output, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}

}  // namespace sbisect::cli

#endif  // SBISECT_TOOLS_APP_HPP
