#include "enclosure/scenario.hpp"

#include <fstream>

namespace enclosure {

using nlohmann::json;
using nlohmann::ordered_json;

Matrix parse_matrix(const json& j, int rows, int cols, const std::string& field) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ParseError(field + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ParseError(field + " row " + std::to_string(i) + ": expected " +
                       std::to_string(cols) + " entries");
    }
    for (int k = 0; k < cols; ++k) {
      const auto& e = row[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw ParseError(field + " entry (" + std::to_string(i) + "," +
                         std::to_string(k) + "): expected [re, im]");
      }
      m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

namespace {

void apply_tolerance_overrides(const json& j, Tolerances& tol) {
  auto set = [&](const char* key, double& field) {
    if (j.contains(key)) field = j.at(key).get<double>();
  };
  set("trace_preserving", tol.trace_preserving);
  set("eig_clamp", tol.eig_clamp);
  set("rank_tol", tol.rank_tol);
  set("gap_tol", tol.gap_tol);
  set("feas_tol", tol.feas_tol);
  set("fw_gap", tol.fw_gap);
  set("prob_floor", tol.prob_floor);
  set("mean_floor", tol.mean_floor);
  set("snr_cut", tol.snr_cut);
  set("peripheral", tol.peripheral);
}

}  // namespace

Scenario parse_scenario(const ordered_json& j, const std::string& origin) {
  Scenario sc;
  sc.raw = j;
  try {
    sc.name = j.value("name", origin);
    if (!j.contains("dimension")) throw ParseError("missing field: dimension");
    sc.dimension = j.at("dimension").get<int>();
    if (sc.dimension < 1) throw ParseError("dimension must be positive");
    if (!j.contains("outcomes")) throw ParseError("missing field: outcomes");
    for (const auto& o : j.at("outcomes")) sc.outcomes.push_back(o.get<std::string>());
    if (!j.contains("kraus_ops")) throw ParseError("missing field: kraus_ops");
    const auto& ops = j.at("kraus_ops");
    if (ops.size() != sc.outcomes.size()) {
      throw ParseError("kraus_ops: expected one operator per outcome");
    }
    for (size_t i = 0; i < ops.size(); ++i) {
      sc.kraus.push_back(parse_matrix(ops[i], sc.dimension, sc.dimension,
                                      "kraus_ops[" + std::to_string(i) + "]"));
    }
    if (j.contains("initial_state")) {
      sc.initial_state =
          parse_matrix(j.at("initial_state"), sc.dimension, sc.dimension,
                       "initial_state");
    }
    if (j.contains("run")) {
      const auto& r = j.at("run");
      sc.run.paths = r.value("paths", sc.run.paths);
      sc.run.steps = r.value("steps", sc.run.steps);
      sc.run.master_seed = r.value("master_seed", sc.run.master_seed);
      sc.run.threshold = r.value("threshold", sc.run.threshold);
      if (r.contains("window")) {
        const auto& w = r.at("window");
        if (!w.is_array() || w.size() != 2) {
          throw ParseError("run.window: expected [n0, n1]");
        }
        sc.run.window_lo = w[0].get<int>();
        sc.run.window_hi = w[1].get<int>();
      }
    }
    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      sc.analysis.cutoff = a.value("cutoff", sc.analysis.cutoff);
      sc.analysis.decompose_seed = a.value("decompose_seed", sc.analysis.decompose_seed);
      sc.analysis.restarts = a.value("restarts", sc.analysis.restarts);
      sc.analysis.max_iters = a.value("max_iters", sc.analysis.max_iters);
      sc.analysis.node_budget = a.value("node_budget", sc.analysis.node_budget);
      sc.analysis.delta0_samples = a.value("delta0_samples", sc.analysis.delta0_samples);
    }
    if (j.contains("tolerances")) apply_tolerance_overrides(j.at("tolerances"), sc.tol);
    if (j.contains("control")) {
      const auto& c = j.at("control");
      ControlSection cs;
      if (!c.contains("target")) throw ParseError("control.target is required");
      cs.target = c.at("target");
      if (!c.contains("hamiltonian")) throw ParseError("control.hamiltonian is required");
      cs.hamiltonian = parse_matrix(c.at("hamiltonian"), sc.dimension, sc.dimension,
                                    "control.hamiltonian");
      cs.u_bound = c.value("u_bound", 0.0);
      cs.block_length = c.value("block_length", -1);
      if (c.contains("epsilon") && !c.at("epsilon").is_null()) {
        cs.epsilon = c.at("epsilon").get<double>();
      }
      cs.grid_points = c.value("grid_points", 101);
      cs.refine_iters = c.value("refine_iters", 30);
      sc.control = std::move(cs);
    }
    if (j.contains("expect")) sc.expect = j.at("expect");

    // channel validation happens at load so the residual is reported here
    make_channel(sc);
  } catch (const ParseError&) {
    throw;
  } catch (const DimensionError& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_scenario(j, path);
}

KrausChannel make_channel(const Scenario& sc) {
  return KrausChannel::create(sc.outcomes, sc.kraus, sc.tol);
}

DensityMatrix make_initial_state(const Scenario& sc) {
  if (sc.initial_state) {
    return project_to_state(hermitize(*sc.initial_state), sc.tol);
  }
  Matrix id = Matrix::Identity(sc.dimension, sc.dimension);
  return project_to_state(hermitize(id / sc.dimension), sc.tol);
}

}  // namespace enclosure
