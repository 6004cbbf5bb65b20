#pragma once

// Command-line front end. Exit codes: 0 all tasks pass, 1 a task failed or
// errored, 2 unreadable or invalid input.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "builtins.hpp"
#include "runner.hpp"

namespace glh::cli {

enum ExitCode { kExitOk = 0, kExitTaskFailure = 1, kExitInvalid = 2 };

/// Loads a scenario from a file, or from the builtin catalogue when no such file exists.
inline json load_document(const std::string& ref) {
  if (std::filesystem::exists(ref)) return read_json_file(ref);
  if (const Builtin* b = find_builtin(ref)) return builtin_document(*b);
  throw Error("cannot read scenario '" + ref + "': no such file or builtin");
}

inline void print_issues(const ValidationError& e, std::ostream& err) {
  err << "invalid scenario: " << e.issues().size() << " error(s)\n";
  for (const auto& i : e.issues()) err << "  " << i.path << ": " << i.message << '\n';
}

inline void print_summary(const Report& rep, std::ostream& out) {
  out << "scenario " << rep.scenario << '\n';
  for (const auto& t : rep.tasks) {
    std::string tag = t.status == "pass" ? "PASS " : t.status == "fail" ? "FAIL " : "ERROR";
    out << "  " << tag << ' ' << std::left << std::setw(17) << t.task << std::right << ' ' << t.path;
    out << std::setprecision(4) << " (" << t.wall_time << " s)\n";
    for (auto it = t.max_residuals.begin(); it != t.max_residuals.end(); ++it)
      out << "      max " << it.key() << " = " << std::setprecision(6) << it.value()["value"].get<double>() << '\n';
    if (t.certificate.is_object())
      out << "      certificate: gap = " << t.certificate["gap"].get<double>()
          << ", max defect = " << t.certificate["max_defect"].get<double>()
          << ", verdict = " << (t.certificate["verdict"].get<bool>() ? "true" : "false") << '\n';
    for (const auto& f : t.failures) out << "      " << f << '\n';
  }
  out << (rep.passed() ? "all tasks passed" : "some tasks failed") << '\n';
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Harmonic maps between generalized Lagrange spaces: scenario runner"};
  app.require_subcommand(1);

  std::string scenario_ref;
  std::string out_dir;
  int stencil = 0;
  int threads = 1;
  std::uint64_t seed = 0;
  bool print_json = false;

  auto* run = app.add_subcommand("run", "run a scenario file or builtin and write the report");
  run->add_option("scenario", scenario_ref, "scenario file or builtin name")->required();
  run->add_option("--out", out_dir, "directory for report.json and CSV dumps");
  auto* stencil_opt = run->add_option("--stencil", stencil, "finite-difference order")->check(CLI::IsMember({2, 4}));
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "seed for random perturbations");
  run->add_flag("--json", print_json, "print the report as JSON instead of the summary");

  auto* list = app.add_subcommand("list-builtins", "list the bundled scenarios");

  auto* validate = app.add_subcommand("validate", "check a scenario without running it");
  validate->add_option("scenario", scenario_ref, "scenario file or builtin name")->required();

  std::string show_name;
  auto* show = app.add_subcommand("show", "print the document of a builtin scenario");
  show->add_option("name", show_name, "builtin name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  if (list->parsed()) {
    for (const auto& b : builtins())
      out << std::left << std::setw(22) << b.name << std::setw(46) << b.construction << b.summary << '\n';
    return kExitOk;
  }

  if (show->parsed()) {
    const Builtin* b = find_builtin(show_name);
    if (!b) {
      err << "unknown builtin '" << show_name << "'\n";
      return kExitInvalid;
    }
    out << std::setw(2) << builtin_document(*b) << '\n';
    return kExitOk;
  }

  Scenario scenario;
  try {
    scenario = parse_scenario(load_document(scenario_ref));
  } catch (const ValidationError& e) {
    print_issues(e, err);
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitInvalid;
  }

  if (validate->parsed()) {
    out << "scenario " << scenario.name << " is valid (" << scenario.tasks.size() << " task(s))\n";
    return kExitOk;
  }

  RunOptions opt;
  if (!out_dir.empty()) opt.out_dir = out_dir;
  if (*stencil_opt) opt.stencil = stencil;
  if (*seed_opt) opt.seed = seed;
  opt.threads = threads;
  Report rep;
  try {
    rep = run_scenario(scenario, opt);
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitTaskFailure;
  }
  if (print_json) out << std::setw(2) << rep.to_json() << '\n';
  else print_summary(rep, out);
  return rep.passed() ? kExitOk : kExitTaskFailure;
}

} // namespace glh::cli
