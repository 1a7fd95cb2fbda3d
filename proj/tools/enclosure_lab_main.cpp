#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "enclosure/report.hpp"

namespace fs = std::filesystem;
using enclosure::ExitCode;

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> steps;
  int threads = 0;  // 0: env var or 1
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("scenario", opts.scenario_path, "scenario file (JSON)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override run.master_seed");
  cmd->add_option("--paths", opts.paths, "override run.paths");
  cmd->add_option("--steps", opts.steps, "override run.steps");
  cmd->add_option("--threads", opts.threads, "worker threads (default $ENCLOSURE_LAB_THREADS or 1)");
}

int effective_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("ENCLOSURE_LAB_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

enclosure::Scenario load_with_overrides(const CommonOpts& opts) {
  enclosure::Scenario sc = enclosure::load_scenario(opts.scenario_path);
  if (opts.seed) sc.run.master_seed = *opts.seed;
  if (opts.paths) sc.run.paths = *opts.paths;
  if (opts.steps) sc.run.steps = *opts.steps;
  return sc;
}

nlohmann::ordered_json flags_json(const std::string& command, const CommonOpts& o,
                                  int threads) {
  nlohmann::ordered_json f;
  f["command"] = command;
  f["scenario"] = o.scenario_path;
  f["out"] = o.out_dir;
  if (o.seed) f["seed"] = *o.seed;
  if (o.paths) f["paths"] = *o.paths;
  if (o.steps) f["steps"] = *o.steps;
  f["threads"] = threads;
  return f;
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const enclosure::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::ParseFailure);
  } catch (const enclosure::TransientError& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return static_cast<int>(ExitCode::TransientDetected);
  } catch (const enclosure::ControllabilityError& e) {
    std::cerr << "controllability refused: " << e.what() << "\n";
    return static_cast<int>(ExitCode::ControllabilityRefused);
  } catch (const enclosure::BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return static_cast<int>(ExitCode::BudgetExceeded);
  } catch (const enclosure::DimensionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return static_cast<int>(ExitCode::ParseFailure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Failure);
  }
}

// a transient refusal still leaves a diagnostic report behind
int handle_transient(const enclosure::Scenario& sc, const CommonOpts& opts,
                     const nlohmann::ordered_json& flags,
                     const enclosure::TransientError& err) {
  auto ch = enclosure::make_channel(sc);
  auto check = enclosure::verify_no_transient(ch, sc.tol);
  nlohmann::ordered_json rep;
  rep["tool"] = "enclosure-lab";
  rep["command"] = flags.value("command", "analyze");
  rep["flags"] = flags;
  rep["scenario"] = sc.raw;
  nlohmann::ordered_json st;
  st["transient"] = true;
  st["min_invariant_eigenvalue"] = check.min_eigenvalue;
  nlohmann::json proj = nlohmann::json::array();
  const auto& m = check.recurrent_projector.matrix();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    proj.push_back(row);
  }
  st["recurrent_projector"] = proj;
  rep["structure"] = std::move(st);
  enclosure::write_json((fs::path(opts.out_dir) / "report.json").string(), rep);
  std::cerr << "hypothesis violation: " << err.what() << "\n";
  return static_cast<int>(ExitCode::TransientDetected);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis, simulation and feedback stabilization of Kraus measurement models"};
  app.require_subcommand(1);

  CommonOpts a_opts, s_opts, z_opts;
  std::string report_dir;

  CLI::App* analyze = app.add_subcommand("analyze", "structure + identifiability certificates");
  add_common(analyze, a_opts);
  CLI::App* simulate = app.add_subcommand("simulate", "analyze + Monte Carlo ensemble");
  add_common(simulate, s_opts);
  CLI::App* stabilize = app.add_subcommand("stabilize", "analyze + feedback-controlled ensemble");
  add_common(stabilize, z_opts);
  CLI::App* report = app.add_subcommand("report", "summarize a stored run directory");
  report->add_option("dir", report_dir, "directory holding report.json")->required();

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    return run_guarded([&] {
      const int threads = effective_threads(a_opts.threads);
      auto flags = flags_json("analyze", a_opts, threads);
      enclosure::Scenario sc = load_with_overrides(a_opts);
      fs::create_directories(a_opts.out_dir);
      try {
        auto art = enclosure::run_analyze(sc, flags);
        enclosure::write_json((fs::path(a_opts.out_dir) / "report.json").string(),
                              art.report);
        std::cout << enclosure::summarize_report(art.report).text;
        return art.id.id_holds ? static_cast<int>(ExitCode::Ok)
                               : static_cast<int>(ExitCode::NotIdentifiable);
      } catch (const enclosure::TransientError& e) {
        return handle_transient(sc, a_opts, flags, e);
      }
    });
  }

  if (simulate->parsed()) {
    return run_guarded([&] {
      const int threads = effective_threads(s_opts.threads);
      auto flags = flags_json("simulate", s_opts, threads);
      enclosure::Scenario sc = load_with_overrides(s_opts);
      fs::create_directories(s_opts.out_dir);
      try {
        auto art = enclosure::run_simulate(sc, threads, flags);
        const fs::path out(s_opts.out_dir);
        enclosure::write_json((out / "report.json").string(), art.base.report);
        enclosure::write_series_csv((out / "series.csv").string(), art.ensemble,
                                    sc.run.threshold, std::nullopt);
        enclosure::write_paths_csv((out / "paths.csv").string(), art.ensemble,
                                   sc.run.threshold);
        std::cout << enclosure::summarize_report(art.base.report).text;
        return art.base.id.id_holds ? static_cast<int>(ExitCode::Ok)
                                    : static_cast<int>(ExitCode::NotIdentifiable);
      } catch (const enclosure::TransientError& e) {
        return handle_transient(sc, s_opts, flags, e);
      }
    });
  }

  if (stabilize->parsed()) {
    return run_guarded([&] {
      const int threads = effective_threads(z_opts.threads);
      auto flags = flags_json("stabilize", z_opts, threads);
      enclosure::Scenario sc = load_with_overrides(z_opts);
      if (!sc.control) {
        std::cerr << "parse error: stabilize requires a control section\n";
        return static_cast<int>(ExitCode::ParseFailure);
      }
      fs::create_directories(z_opts.out_dir);
      try {
        auto art = enclosure::run_stabilize(sc, threads, flags);
        const fs::path out(z_opts.out_dir);
        enclosure::write_json((out / "report.json").string(), art.base.report);
        enclosure::write_series_csv((out / "series.csv").string(), art.ensemble,
                                    sc.run.threshold, art.config.epsilon);
        enclosure::write_paths_csv((out / "paths.csv").string(), art.ensemble,
                                   sc.run.threshold);
        enclosure::write_control_csv((out / "control.csv").string(), art.ensemble,
                                     art.config.block_length);
        std::cout << enclosure::summarize_report(art.base.report).text;
        return static_cast<int>(ExitCode::Ok);
      } catch (const enclosure::TransientError& e) {
        return handle_transient(sc, z_opts, flags, e);
      }
    });
  }

  // report
  return run_guarded([&] {
    const fs::path p = fs::path(report_dir) / "report.json";
    std::ifstream in(p);
    if (!in) {
      std::cerr << "missing report: " << p << "\n";
      return static_cast<int>(ExitCode::Failure);
    }
    nlohmann::ordered_json rep;
    try {
      in >> rep;
    } catch (const std::exception& e) {
      std::cerr << "corrupt report " << p << ": " << e.what() << "\n";
      return static_cast<int>(ExitCode::Failure);
    }
    auto check = enclosure::summarize_report(rep);
    std::cout << check.text;
    return check.ok ? static_cast<int>(ExitCode::Ok)
                    : static_cast<int>(ExitCode::Failure);
  });
}
