#include "enclosure/report.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace enclosure {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json word_json(const KrausChannel& ch, const Word& w) {
  json out = json::array();
  for (int letter : w) out.push_back(ch.labels()[letter]);
  return out;
}

ordered_json fit_json(const RateFit& f) {
  ordered_json j;
  j["window"] = {f.n0, f.n1};
  j["gamma_hat"] = f.gamma_hat;
  j["intercept"] = f.intercept;
  j["residual_rms"] = f.residual_rms;
  j["usable_points"] = f.usable_points;
  return j;
}

std::optional<MixingRate> fit_mixing(const KrausChannel& ch,
                                     const BlockDecomposition& dec,
                                     std::uint64_t seed, const Tolerances& tol) {
  std::optional<MixingRate> out;
  std::mt19937_64 rng(seed ^ 0xabcdef1234567890ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int a = 0; a < dec.num_blocks(); ++a) {
    if (dec.blocks[a].dim < 2) continue;
    Matrix cols = dec.block_basis(a);
    const int r = dec.blocks[a].dim;
    Matrix g(r, r);
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
    Matrix sigma = g * g.adjoint();
    sigma /= sigma.trace().real();
    DensityMatrix rho =
        project_to_state(hermitize(cols * sigma * cols.adjoint()), tol);
    std::vector<double> xs, ys;
    for (int k = 0; k <= 30; ++k) {
      const double dist = cesaro_distance(ch, dec, rho, a, k, tol);
      if (dist < 1e-14) break;
      xs.push_back(k);
      ys.push_back(std::log(dist));
    }
    if (xs.size() < 5) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(xs.size());
    for (int i = 0; i < m; ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icept = (sy - slope * sx) / m;
    MixingRate mr{std::exp(slope), std::exp(icept)};
    if (!out || mr.lambda_hat > out->lambda_hat) out = mr;
  }
  return out;
}

int resolve_target(const json& target, const BlockDecomposition& dec) {
  int idx = -1;
  if (target.is_number_integer()) {
    idx = target.get<int>();
  } else if (target.is_string()) {
    try {
      idx = std::stoi(target.get<std::string>());
    } catch (...) {
      throw ParseError("control.target: cannot parse block index");
    }
  } else {
    throw ParseError("control.target: expected a block index");
  }
  if (idx < 0 || idx >= dec.num_blocks()) {
    throw ParseError("control.target: block index out of range");
  }
  return idx;
}

ordered_json environment_json(std::uint64_t seed, int threads, double wall_s) {
  ordered_json env;
  env["version"] = ENCLOSURE_LAB_VERSION;
  env["seed"] = seed;
  env["threads"] = threads;
  env["wall_time_s"] = wall_s;
  return env;
}

}  // namespace

AnalyzeArtifacts run_analyze(const Scenario& sc, const ordered_json& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  AnalyzeArtifacts art{make_channel(sc), {}, {}, {}, {}};
  Budget budget{sc.analysis.node_budget};

  art.dec = decompose(art.channel, sc.analysis.decompose_seed, sc.tol);
  art.residuals = certify(art.channel, art.dec);

  std::optional<int> kp_target;
  if (sc.control) {
    // resolve lazily: a bad index should surface as a parse error here
    kp_target = resolve_target(sc.control->target, art.dec);
  }
  art.id = certify_identifiability(art.channel, art.dec, sc.analysis.cutoff,
                                   kp_target, sc.tol, budget,
                                   sc.analysis.restarts, sc.analysis.max_iters);
  auto mixing = fit_mixing(art.channel, art.dec, sc.analysis.decompose_seed, sc.tol);
  art.dec.mixing_rate = mixing;

  ordered_json rep;
  rep["tool"] = "enclosure-lab";
  rep["command"] = flags.value("command", "analyze");
  rep["flags"] = flags;
  rep["scenario"] = sc.raw;

  ordered_json st;
  st["transient"] = false;
  st["num_blocks"] = art.dec.num_blocks();
  ordered_json blocks = ordered_json::array();
  for (const auto& b : art.dec.blocks) {
    ordered_json bj;
    bj["dim"] = b.dim;
    bj["period"] = b.period;
    bj["projector"] = matrix_json(b.projector.matrix());
    bj["invariant_state"] = matrix_json(b.invariant_state.matrix());
    blocks.push_back(std::move(bj));
  }
  st["blocks"] = std::move(blocks);
  st["period"] = art.dec.period;
  st["dual_fixed_dim"] = art.dec.dual_fixed_dim;
  st["equivalent_blocks_suspected"] = art.dec.dual_fixed_dim > art.dec.num_blocks();
  ordered_json res;
  res["projector"] = art.residuals.projector;
  res["completeness"] = art.residuals.completeness;
  res["dual_invariance"] = art.residuals.dual_invariance;
  res["commutation"] = art.residuals.commutation;
  res["support"] = art.residuals.support;
  res["pairing"] = art.residuals.pairing;
  st["residuals"] = std::move(res);
  if (mixing) {
    st["mixing_rate"] = {{"lambda_hat", mixing->lambda_hat}, {"c_hat", mixing->c_hat}};
  } else {
    st["mixing_rate"] = nullptr;
  }
  rep["structure"] = std::move(st);

  ordered_json id;
  id["id_holds"] = art.id.id_holds;
  id["search_cutoff"] = art.id.search_cutoff;
  ordered_json wits = ordered_json::array();
  for (const auto& w : art.id.witnesses) {
    ordered_json wj;
    wj["alpha"] = w.alpha;
    wj["beta"] = w.beta;
    wj["word"] = w.word ? word_json(art.channel, *w.word) : json();
    wj["gap"] = w.gap;
    wits.push_back(std::move(wj));
  }
  id["witnesses"] = std::move(wits);
  id["uniform_length"] = art.id.uniform_length ? json(*art.id.uniform_length) : json();
  ordered_json prs = ordered_json::array();
  for (const auto& r : art.id.residuals) {
    prs.push_back({{"alpha", r.alpha},
                   {"beta", r.beta},
                   {"residual", r.residual},
                   {"certified_lower", r.certified_lower}});
  }
  id["pair_residuals"] = std::move(prs);
  id["kappa"] = art.id.kappa;
  id["kappa_lower"] = art.id.kappa_lower;
  ordered_json kps = ordered_json::array();
  for (const auto& p : art.id.kappa_pairs) {
    kps.push_back({{"alpha", p.alpha},
                   {"beta", p.beta},
                   {"value", p.value},
                   {"gap", p.gap}});
  }
  id["kappa_pairs"] = std::move(kps);
  id["kappa_prime"] = art.id.kappa_prime ? json(*art.id.kappa_prime) : json();
  rep["identifiability"] = std::move(id);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep["environment"] = environment_json(sc.run.master_seed,
                                        flags.value("threads", 1), wall);
  art.report = std::move(rep);
  return art;
}

ControlConfig resolve_control(const Scenario& sc, const KrausChannel& ch,
                              const BlockDecomposition& dec,
                              const IdentifiabilityReport& id,
                              Delta0Estimate* delta0_out) {
  if (!sc.control) throw ParseError("scenario has no control section");
  const auto& cs = *sc.control;
  ControlConfig cfg;
  cfg.target = resolve_target(cs.target, dec);
  cfg.hamiltonian = hermitize(cs.hamiltonian);
  cfg.u_bound = cs.u_bound;
  cfg.grid_points = cs.grid_points;
  cfg.refine_iters = cs.refine_iters;
  if (cs.block_length > 0) {
    cfg.block_length = cs.block_length;
  } else if (id.uniform_length) {
    cfg.block_length = *id.uniform_length;
  } else {
    throw ParseError(
        "control.block_length: no certified uniform length to default to");
  }
  if (id.uniform_length && cfg.block_length < *id.uniform_length) {
    throw ParseError("control.block_length must be >= the certified length N");
  }
  Delta0Estimate d0 = estimate_delta0(ch, dec, cfg.target, cfg.hamiltonian,
                                      cfg.u_bound, cfg.block_length,
                                      sc.analysis.delta0_samples,
                                      sc.run.master_seed + 17, 0.45, sc.tol,
                                      Budget{sc.analysis.node_budget});
  if (delta0_out) *delta0_out = d0;
  const double kprime = id.kappa_prime.value_or(id.kappa);
  if (cs.epsilon) {
    cfg.epsilon = *cs.epsilon;
  } else {
    cfg.epsilon = default_epsilon(dec.num_blocks(),
                                  d0.delta0_hat > 0
                                      ? std::optional<double>(d0.delta0_hat)
                                      : std::nullopt);
  }
  if (d0.delta0_hat > 0 && dec.num_blocks() > 1) {
    const double cap = epsilon_upper_bound(dec.num_blocks(), d0.delta0_hat, kprime);
    if (cfg.epsilon > cap) {
      throw ParseError("control.epsilon " + format_double(cfg.epsilon) +
                       " exceeds the admissibility bound " + format_double(cap));
    }
  }
  return cfg;
}

SimulateArtifacts run_simulate(const Scenario& sc, int threads,
                               const ordered_json& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  SimulateArtifacts art{run_analyze(sc, flags), {}, {}, std::nullopt};
  art.base.report["command"] = flags.value("command", "simulate");

  DensityMatrix rho0 = make_initial_state(sc);
  art.ensemble = simulate_ensemble(art.base.channel, art.base.dec, rho0,
                                   sc.run.paths, sc.run.steps,
                                   sc.run.master_seed, nullptr, threads, sc.tol);
  art.selection = selection_statistics(art.ensemble, sc.run.threshold);

  int w0 = sc.run.window_lo, w1 = sc.run.window_hi;
  if (w0 < 0 || w1 < 0) {
    w0 = sc.run.steps / 10;
    w1 = (sc.run.steps * 3) / 4;
  }
  ordered_json runj;
  runj["paths"] = sc.run.paths;
  runj["steps"] = sc.run.steps;
  runj["master_seed"] = sc.run.master_seed;
  runj["threshold"] = sc.run.threshold;
  runj["window"] = {w0, w1};
  art.base.report["run"] = std::move(runj);

  try {
    art.w_fit = fit_rate(art.ensemble.mean_W(), art.ensemble.se_W(), w0, w1,
                         sc.tol.mean_floor, sc.tol.snr_cut);
  } catch (const std::exception&) {
    art.w_fit = std::nullopt;  // flat or empty decay is a valid outcome
  }
  ordered_json fits;
  fits["W"] = art.w_fit ? fit_json(*art.w_fit) : ordered_json(nullptr);
  art.base.report["rate_fits"] = std::move(fits);

  ordered_json sel;
  sel["threshold"] = art.selection.threshold;
  sel["frequencies"] = art.selection.frequency;
  sel["standard_errors"] = art.selection.standard_error;
  sel["undecided"] = art.selection.undecided;
  art.base.report["selection"] = std::move(sel);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  art.base.report["environment"] =
      environment_json(sc.run.master_seed, threads, wall);
  return art;
}

StabilizeArtifacts run_stabilize(const Scenario& sc, int threads,
                                 const ordered_json& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  StabilizeArtifacts art{run_analyze(sc, flags), {}, {}, {}, {}, std::nullopt};
  art.base.report["command"] = flags.value("command", "stabilize");

  art.config = resolve_control(sc, art.base.channel, art.base.dec, art.base.id,
                               &art.delta0);
  FeedbackController controller(art.base.channel, art.base.dec, art.config,
                                sc.tol, Budget{sc.analysis.node_budget});

  DensityMatrix rho0 = make_initial_state(sc);
  art.ensemble = simulate_ensemble(art.base.channel, art.base.dec, rho0,
                                   sc.run.paths, sc.run.steps,
                                   sc.run.master_seed, &controller, threads,
                                   sc.tol);
  art.selection = selection_statistics(art.ensemble, sc.run.threshold);

  int w0 = sc.run.window_lo, w1 = sc.run.window_hi;
  if (w0 < 0 || w1 < 0) {
    w0 = sc.run.steps / 10;
    w1 = (sc.run.steps * 3) / 4;
  }
  ordered_json runj;
  runj["paths"] = sc.run.paths;
  runj["steps"] = sc.run.steps;
  runj["master_seed"] = sc.run.master_seed;
  runj["threshold"] = sc.run.threshold;
  runj["window"] = {w0, w1};
  art.base.report["run"] = std::move(runj);

  try {
    art.v_fit = fit_rate(art.ensemble.mean_V(), art.ensemble.se_V(), w0, w1,
                         sc.tol.mean_floor, sc.tol.snr_cut);
  } catch (const std::exception&) {
    art.v_fit = std::nullopt;
  }
  std::optional<RateFit> w_fit;
  try {
    w_fit = fit_rate(art.ensemble.mean_W(), art.ensemble.se_W(), w0, w1,
                     sc.tol.mean_floor, sc.tol.snr_cut);
  } catch (const std::exception&) {
  }
  ordered_json fits;
  fits["W"] = w_fit ? fit_json(*w_fit) : ordered_json(nullptr);
  fits["V"] = art.v_fit ? fit_json(*art.v_fit) : ordered_json(nullptr);
  art.base.report["rate_fits"] = std::move(fits);

  ordered_json sel;
  sel["threshold"] = art.selection.threshold;
  sel["frequencies"] = art.selection.frequency;
  sel["standard_errors"] = art.selection.standard_error;
  sel["undecided"] = art.selection.undecided;
  art.base.report["selection"] = std::move(sel);

  Controllability cb = check_controllability(art.base.dec, art.config.target,
                                             art.config.hamiltonian,
                                             sc.tol.rank_tol);
  ordered_json ctl;
  ctl["target"] = art.config.target;
  ctl["block_length"] = art.config.block_length;
  ctl["epsilon"] = art.config.epsilon;
  ctl["u_bound"] = art.config.u_bound;
  ctl["grid_points"] = art.config.grid_points;
  ctl["refine_iters"] = art.config.refine_iters;
  ctl["delta0_hat"] = art.delta0.delta0_hat;
  ctl["delta0_found_min"] = art.delta0.found_min;
  ctl["controllability"] = {{"certified", cb.certified},
                            {"achieved_rank", cb.achieved_rank},
                            {"required_rank", cb.required_rank}};
  // aggregate control activity for quick inspection
  double u_max = 0.0;
  std::int64_t fired = 0, total = 0;
  for (const auto& p : art.ensemble.paths) {
    for (size_t n = art.config.block_length - 1; n < p.control_u.size();
         n += art.config.block_length) {
      u_max = std::max(u_max, std::abs(p.control_u[n]));
      if (p.control_u[n] != 0.0) ++fired;
      ++total;
    }
  }
  ctl["max_abs_u"] = u_max;
  ctl["nonzero_u_fraction"] = total ? static_cast<double>(fired) / total : 0.0;
  art.base.report["control"] = std::move(ctl);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  art.base.report["environment"] =
      environment_json(sc.run.master_seed, threads, wall);
  return art;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_series_csv(const std::string& path, const TrajectoryEnsemble& ens,
                      double threshold, std::optional<double> epsilon) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "step,mean_W,se_W";
  for (int a = 0; a < ens.num_blocks; ++a) out << ",mean_block_" << (a + 1);
  out << ",undecided_fraction";
  const bool ctl = ens.controlled;
  if (ctl) out << ",mean_V,se_V,mean_Z";
  out << "\n";
  auto mw = ens.mean_W();
  auto sw = ens.se_W();
  std::vector<std::vector<double>> bw;
  for (int a = 0; a < ens.num_blocks; ++a) bw.push_back(ens.mean_block_weight(a));
  auto undec = ens.undecided_fraction(threshold);
  std::vector<double> mv, sv, mz;
  if (ctl) {
    mv = ens.mean_V();
    sv = ens.se_V();
    mz = ens.mean_Z(epsilon.value_or(0.0));
  }
  for (int n = 0; n <= ens.horizon; ++n) {
    out << n << "," << format_double(mw[n]) << "," << format_double(sw[n]);
    for (int a = 0; a < ens.num_blocks; ++a) out << "," << format_double(bw[a][n]);
    out << "," << format_double(undec[n]);
    if (ctl) {
      out << "," << format_double(mv[n]) << "," << format_double(sv[n]) << ","
          << format_double(mz[n]);
    }
    out << "\n";
  }
}

void write_paths_csv(const std::string& path, const TrajectoryEnsemble& ens,
                     double threshold) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "path";
  for (int a = 0; a < ens.num_blocks; ++a) out << ",terminal_block_" << (a + 1);
  out << ",assigned_block\n";
  const int ell = ens.num_blocks;
  for (int p = 0; p < ens.num_paths; ++p) {
    const auto& ps = ens.paths[p];
    out << p;
    int assigned = -1;
    for (int a = 0; a < ell; ++a) {
      const double w =
          ps.block_weights[static_cast<size_t>(ens.horizon) * ell + a];
      out << "," << format_double(w);
      if (assigned < 0 && w > threshold) assigned = a + 1;
    }
    out << "," << assigned << "\n";
  }
}

void write_control_csv(const std::string& path, const TrajectoryEnsemble& ens,
                       int block_length) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << "path,block,step,u\n";
  for (int p = 0; p < ens.num_paths; ++p) {
    const auto& ps = ens.paths[p];
    int q = 1;
    for (size_t n = block_length - 1; n < ps.control_u.size();
         n += block_length, ++q) {
      out << p << "," << q << "," << n << "," << format_double(ps.control_u[n])
          << "\n";
    }
  }
}

ReportCheck summarize_report(const ordered_json& rep) {
  std::ostringstream os;
  bool ok = true;
  auto line = [&](const std::string& s) { os << s << "\n"; };

  line("tool: " + rep.value("tool", std::string("?")) + " " +
       std::string(rep.contains("environment")
                       ? rep["environment"].value("version", std::string("?"))
                       : "?"));
  line("command: " + rep.value("command", std::string("?")));
  if (rep.contains("scenario")) {
    line("scenario: " + rep["scenario"].value("name", std::string("?")));
  }
  if (rep.contains("structure")) {
    const auto& st = rep["structure"];
    if (st.value("transient", false)) {
      line("structure: TRANSIENT PART DETECTED");
    } else {
      std::ostringstream bs;
      for (const auto& b : st["blocks"]) bs << b.value("dim", 0) << " ";
      line("blocks: " + bs.str() + "| period m=" +
           std::to_string(st.value("period", 0)) +
           " | dual fixed dim=" + std::to_string(st.value("dual_fixed_dim", 0)));
      if (st.value("equivalent_blocks_suspected", false)) {
        line("note: dual fixed space larger than block count (equivalent blocks)");
      }
    }
  }
  if (rep.contains("identifiability")) {
    const auto& id = rep["identifiability"];
    line(std::string("id_holds: ") + (id.value("id_holds", false) ? "yes" : "no"));
    if (!id["uniform_length"].is_null()) {
      line("N=" + std::to_string(id["uniform_length"].get<int>()));
    } else {
      line("N: not found within cutoff");
    }
    if (id.contains("kappa")) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "kappa=%.4f", id.value("kappa", 0.0));
      line(buf);
    }
    if (id.contains("kappa_prime") && !id["kappa_prime"].is_null()) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "kappa_prime=%.4f",
                    id["kappa_prime"].get<double>());
      line(buf);
    }
  }
  if (rep.contains("rate_fits")) {
    for (const auto& [key, f] : rep["rate_fits"].items()) {
      if (f.is_null()) {
        line("rate fit " + key + ": none (flat or below floor)");
      } else {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "rate fit %s: gamma_hat per-step=%.6g rms=%.3g", key.c_str(),
                      f.value("gamma_hat", 0.0), f.value("residual_rms", 0.0));
        line(buf);
      }
    }
  }
  if (rep.contains("selection")) {
    const auto& s = rep["selection"];
    std::ostringstream fs;
    for (const auto& f : s["frequencies"]) fs << f.get<double>() << " ";
    line("selection frequencies: " + fs.str() +
         "| undecided: " + format_double(s.value("undecided", 0.0)));
  }
  if (rep.contains("control")) {
    const auto& c = rep["control"];
    line("control: target=" + std::to_string(c.value("target", -1)) +
         " N'=" + std::to_string(c.value("block_length", 0)) +
         " epsilon=" + format_double(c.value("epsilon", 0.0)) +
         " delta0_hat=" + format_double(c.value("delta0_hat", 0.0)));
  }

  // declared expectations
  if (rep.contains("scenario") && rep["scenario"].contains("expect")) {
    const auto& exp = rep["scenario"]["expect"];
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
      ok = ok && pass;
      line(std::string(pass ? "[PASS] " : "[FAIL] ") + name + ": " + detail);
    };
    const auto& id = rep.contains("identifiability") ? rep["identifiability"]
                                                     : ordered_json(nullptr);
    if (exp.contains("uniform_length") && !id.is_null()) {
      const bool have = !id["uniform_length"].is_null();
      const int want = exp["uniform_length"].get<int>();
      check("uniform_length", have && id["uniform_length"].get<int>() == want,
            "want " + std::to_string(want));
    }
    if (exp.contains("id_holds") && !id.is_null()) {
      check("id_holds", id.value("id_holds", false) == exp["id_holds"].get<bool>(),
            exp["id_holds"].get<bool>() ? "want yes" : "want no");
    }
    if (exp.contains("kappa") && !id.is_null()) {
      const double want = exp["kappa"]["value"].get<double>();
      const double tol = exp["kappa"]["tol"].get<double>();
      const double got = id.value("kappa", -1.0);
      check("kappa", std::abs(got - want) <= tol,
            "got " + format_double(got) + " want " + format_double(want) +
                " +- " + format_double(tol));
    }
    if (exp.contains("period") && rep.contains("structure")) {
      const int want = exp["period"].get<int>();
      check("period", rep["structure"].value("period", -1) == want,
            "want m=" + std::to_string(want));
    }
    if (exp.contains("gamma_min") && rep.contains("rate_fits") &&
        !rep["rate_fits"]["W"].is_null()) {
      const double want = exp["gamma_min"].get<double>();
      const double got = rep["rate_fits"]["W"].value("gamma_hat", 0.0);
      check("gamma_min", got >= want,
            "got " + format_double(got) + " want >= " + format_double(want));
    }
    if (exp.contains("gamma_ctl_min") && rep.contains("rate_fits") &&
        rep["rate_fits"].contains("V") && !rep["rate_fits"]["V"].is_null()) {
      const double want = exp["gamma_ctl_min"].get<double>();
      const double got = rep["rate_fits"]["V"].value("gamma_hat", 0.0);
      check("gamma_ctl_min", got >= want,
            "got " + format_double(got) + " want >= " + format_double(want));
    }
    if (exp.contains("undecided_max") && rep.contains("selection")) {
      const double want = exp["undecided_max"].get<double>();
      const double got = rep["selection"].value("undecided", 1.0);
      check("undecided_max", got <= want,
            "got " + format_double(got) + " want <= " + format_double(want));
    }
  }
  return {ok, os.str()};
}

}  // namespace enclosure
