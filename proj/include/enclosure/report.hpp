#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "enclosure/control.hpp"
#include "enclosure/scenario.hpp"

namespace enclosure {

enum class ExitCode : int {
  Ok = 0,
  Failure = 1,
  ParseFailure = 2,
  TransientDetected = 3,
  NotIdentifiable = 4,
  ControllabilityRefused = 5,
  BudgetExceeded = 6,
};

struct AnalyzeArtifacts {
  KrausChannel channel;
  BlockDecomposition dec;
  DecompositionResiduals residuals;
  IdentifiabilityReport id;
  nlohmann::ordered_json report;
};

struct SimulateArtifacts {
  AnalyzeArtifacts base;
  TrajectoryEnsemble ensemble;
  SelectionStats selection;
  std::optional<RateFit> w_fit;
};

struct StabilizeArtifacts {
  AnalyzeArtifacts base;
  ControlConfig config;
  Delta0Estimate delta0;
  TrajectoryEnsemble ensemble;
  SelectionStats selection;
  std::optional<RateFit> v_fit;
};

// Orchestration behind the CLI subcommands. The flags blob is echoed into the
// report for provenance.
AnalyzeArtifacts run_analyze(const Scenario& sc, const nlohmann::ordered_json& flags);
SimulateArtifacts run_simulate(const Scenario& sc, int threads,
                               const nlohmann::ordered_json& flags);
StabilizeArtifacts run_stabilize(const Scenario& sc, int threads,
                                 const nlohmann::ordered_json& flags);

// Resolve the control section against a computed decomposition and
// identifiability certificate (block length defaults to N, epsilon to the
// admissibility rule).
ControlConfig resolve_control(const Scenario& sc, const KrausChannel& ch,
                              const BlockDecomposition& dec,
                              const IdentifiabilityReport& id,
                              Delta0Estimate* delta0_out);

// CSV emission: UTF-8, '.' decimal separator, 17 significant digits.
void write_series_csv(const std::string& path, const TrajectoryEnsemble& ens,
                      double threshold, std::optional<double> epsilon);
void write_paths_csv(const std::string& path, const TrajectoryEnsemble& ens,
                     double threshold);
void write_control_csv(const std::string& path, const TrajectoryEnsemble& ens,
                       int block_length);
void write_json(const std::string& path, const nlohmann::ordered_json& j);

std::string format_double(double v);  // shortest 17-significant-digit form

// Human-readable summary of a stored report; pass/fail lines against the
// scenario's declared expectations. Never recomputes.
struct ReportCheck {
  bool ok;
  std::string text;
};
ReportCheck summarize_report(const nlohmann::ordered_json& report);

}  // namespace enclosure
