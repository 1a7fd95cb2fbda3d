#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "enclosure/channel.hpp"

namespace enclosure {

struct RunSection {
  int paths = 1000;
  int steps = 200;
  std::uint64_t master_seed = 0;
  int window_lo = -1;  // negative: default to [10%, 75%] of the horizon
  int window_hi = -1;
  double threshold = 0.99;
};

struct ControlSection {
  nlohmann::json target;  // outcome of decompose: block index or label string
  Matrix hamiltonian;
  double u_bound = 0.0;
  int block_length = -1;  // negative: use the certified uniform length N
  std::optional<double> epsilon;
  int grid_points = 101;
  int refine_iters = 30;
};

struct AnalysisSection {
  int cutoff = 8;
  std::uint64_t decompose_seed = 1;
  int restarts = 8;
  int max_iters = 500;
  std::uint64_t node_budget = 10'000'000;
  int delta0_samples = 64;
};

struct Scenario {
  std::string name;
  int dimension = 0;
  std::vector<std::string> outcomes;
  std::vector<Matrix> kraus;
  std::optional<Matrix> initial_state;
  std::optional<ControlSection> control;
  RunSection run;
  AnalysisSection analysis;
  Tolerances tol;
  nlohmann::json expect;  // optional declared expectations, checked by `report`
  nlohmann::ordered_json raw;  // scenario file as parsed, echoed into reports
};

// Parse and validate a scenario file; throws ParseError with field context,
// including the trace-preservation residual for malformed Kraus families.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const nlohmann::ordered_json& j, const std::string& origin);

KrausChannel make_channel(const Scenario& sc);
DensityMatrix make_initial_state(const Scenario& sc);  // default I/d

Matrix parse_matrix(const nlohmann::json& j, int rows, int cols,
                    const std::string& field);

}  // namespace enclosure
