#include "enclosure/trajectory.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace enclosure {

double lyapunov_W_weights(const std::vector<double>& w) {
  double sum = 0.0;
  for (size_t a = 0; a < w.size(); ++a) {
    for (size_t b = 0; b < w.size(); ++b) {
      if (a == b) continue;
      sum += std::sqrt(std::max(w[a], 0.0) * std::max(w[b], 0.0));
    }
  }
  return 0.5 * sum;
}

double lyapunov_W(const BlockDecomposition& dec, const DensityMatrix& rho) {
  std::vector<double> w(dec.num_blocks());
  for (int a = 0; a < dec.num_blocks(); ++a) w[a] = dec.block_weight(a, rho.matrix());
  return lyapunov_W_weights(w);
}

namespace {

// portable uniform in [0,1) from the top 53 bits
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::mt19937_64 path_rng(std::uint64_t master_seed, int path) {
  std::seed_seq seq{static_cast<std::uint64_t>(master_seed),
                    static_cast<std::uint64_t>(path) + 0x9e3779b97f4a7c15ULL};
  return std::mt19937_64(seq);
}

void record_step(PathSeries& ps, const BlockDecomposition& dec, const Matrix& rho) {
  const int ell = dec.num_blocks();
  std::vector<double> w(ell);
  for (int a = 0; a < ell; ++a) w[a] = dec.block_weight(a, rho);
  for (int a = 0; a < ell; ++a) ps.block_weights.push_back(w[a]);
  ps.W.push_back(lyapunov_W_weights(w));
}

void simulate_path(const KrausChannel& ch, const BlockDecomposition& dec,
                   const DensityMatrix& rho0, int n_max, std::uint64_t master_seed,
                   int path, const ControllerFactory* factory,
                   const Tolerances& tol, PathSeries& ps, int target_block) {
  auto rng = path_rng(master_seed, path);
  std::unique_ptr<PathController> ctrl;
  if (factory) ctrl = factory->make_path_controller();

  const int ell = dec.num_blocks();
  ps.outcomes.reserve(n_max);
  ps.block_weights.reserve(static_cast<size_t>(n_max + 1) * ell);
  ps.W.reserve(n_max + 1);

  DensityMatrix rho = rho0;
  if (ctrl) ctrl->begin_path(rho);
  auto record_controlled = [&](const Matrix& m) {
    if (!factory) return;
    const double w = dec.block_weight(target_block, m);
    ps.V.push_back(std::sqrt(std::max(1.0 - w, 0.0)));
    double r = 0.0;
    for (int b = 0; b < ell; ++b) {
      if (b != target_block) r += std::sqrt(std::max(dec.block_weight(b, m), 0.0));
    }
    ps.R.push_back(r);
  };

  record_step(ps, dec, rho.matrix());
  record_controlled(rho.matrix());
  for (int n = 0; n < n_max; ++n) {
    auto branches = step_distribution(ch, rho, tol);
    const double u = uniform01(rng);
    double cum = 0.0;
    int pick = -1;
    for (const auto& b : branches) {
      cum += b.probability;
      if (u < cum && b.state.has_value()) {
        pick = b.outcome;
        break;
      }
    }
    if (pick < 0) {
      // numerical tail: fall back to the most likely legal branch
      double bestp = 0.0;
      for (const auto& b : branches) {
        if (b.state.has_value() && b.probability > bestp) {
          bestp = b.probability;
          pick = b.outcome;
        }
      }
    }
    if (pick < 0) {
      ps.failed = true;
      ps.failed_step = n;
      break;
    }
    rho = *branches[pick].state;
    ps.outcomes.push_back(pick);
    if (ctrl) {
      std::optional<Matrix> unitary = ctrl->post_measurement(n, rho);
      if (unitary) {
        rho = project_to_state(
            hermitize(*unitary * rho.matrix() * unitary->adjoint()), tol);
      }
      ps.control_u.push_back(ctrl->last_control());
      ctrl->post_step(n, rho);
    }
    record_step(ps, dec, rho.matrix());
    record_controlled(rho.matrix());
  }
}

std::vector<double> reduce_mean(const TrajectoryEnsemble& ens,
                                const std::function<double(const PathSeries&, int)>& get) {
  std::vector<double> mean(ens.horizon + 1, 0.0);
  for (int n = 0; n <= ens.horizon; ++n) {
    double acc = 0.0;
    for (const auto& p : ens.paths) acc += get(p, n);
    mean[n] = acc / ens.num_paths;
  }
  return mean;
}

std::vector<double> reduce_se(const TrajectoryEnsemble& ens,
                              const std::vector<double>& mean,
                              const std::function<double(const PathSeries&, int)>& get) {
  std::vector<double> se(ens.horizon + 1, 0.0);
  if (ens.num_paths < 2) return se;
  for (int n = 0; n <= ens.horizon; ++n) {
    double acc = 0.0;
    for (const auto& p : ens.paths) {
      const double d = get(p, n) - mean[n];
      acc += d * d;
    }
    se[n] = std::sqrt(acc / (ens.num_paths - 1)) / std::sqrt(double(ens.num_paths));
  }
  return se;
}

}  // namespace

std::vector<double> TrajectoryEnsemble::mean_W() const {
  return reduce_mean(*this, [](const PathSeries& p, int n) { return p.W[n]; });
}

std::vector<double> TrajectoryEnsemble::se_W() const {
  auto m = mean_W();
  return reduce_se(*this, m, [](const PathSeries& p, int n) { return p.W[n]; });
}

std::vector<double> TrajectoryEnsemble::mean_block_weight(int alpha) const {
  const int ell = num_blocks;
  return reduce_mean(*this, [alpha, ell](const PathSeries& p, int n) {
    return p.block_weights[static_cast<size_t>(n) * ell + alpha];
  });
}

std::vector<double> TrajectoryEnsemble::mean_V() const {
  return reduce_mean(*this, [](const PathSeries& p, int n) { return p.V[n]; });
}

std::vector<double> TrajectoryEnsemble::se_V() const {
  auto m = mean_V();
  return reduce_se(*this, m, [](const PathSeries& p, int n) { return p.V[n]; });
}

std::vector<double> TrajectoryEnsemble::mean_R() const {
  return reduce_mean(*this, [](const PathSeries& p, int n) { return p.R[n]; });
}

std::vector<double> TrajectoryEnsemble::mean_Z(double epsilon) const {
  auto v = mean_V();
  auto r = mean_R();
  for (size_t i = 0; i < v.size(); ++i) v[i] += epsilon * r[i];
  return v;
}

std::vector<double> TrajectoryEnsemble::undecided_fraction(double threshold) const {
  std::vector<double> out(horizon + 1, 0.0);
  const int ell = num_blocks;
  for (int n = 0; n <= horizon; ++n) {
    int undecided = 0;
    for (const auto& p : paths) {
      bool decided = false;
      for (int a = 0; a < ell; ++a) {
        if (p.block_weights[static_cast<size_t>(n) * ell + a] > threshold) {
          decided = true;
          break;
        }
      }
      if (!decided) ++undecided;
    }
    out[n] = static_cast<double>(undecided) / num_paths;
  }
  return out;
}

TrajectoryEnsemble simulate_ensemble(const KrausChannel& ch,
                                     const BlockDecomposition& dec,
                                     const DensityMatrix& rho0, int num_paths,
                                     int n_max, std::uint64_t master_seed,
                                     const ControllerFactory* controller,
                                     int threads, const Tolerances& tol) {
  if (num_paths < 1 || n_max < 1) {
    throw DimensionError("simulate_ensemble: need at least one path and one step");
  }
  TrajectoryEnsemble ens;
  ens.master_seed = master_seed;
  ens.num_paths = num_paths;
  ens.horizon = n_max;
  ens.num_blocks = dec.num_blocks();
  ens.controlled = controller != nullptr;
  ens.paths.resize(num_paths);

  const int target_block = controller ? controller->target_block() : 0;

  const int nthreads = std::max(1, threads);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int p = next.fetch_add(1);
      if (p >= num_paths) return;
      simulate_path(ch, dec, rho0, n_max, master_seed, p, controller, tol,
                    ens.paths[p], target_block);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  int failed = 0;
  for (const auto& p : ens.paths) {
    if (p.failed) ++failed;
  }
  if (failed > 0.001 * num_paths) {
    throw NumericalError("simulate_ensemble: " + std::to_string(failed) +
                         " paths collapsed");
  }
  return ens;
}

double exact_expectation_W(const KrausChannel& ch, const BlockDecomposition& dec,
                           const DensityMatrix& rho, int k, const Budget& budget) {
  // W is 1-homogeneous, so weight * W(state/weight) = W(unnormalized state)
  double sum = 0.0;
  const int ell = dec.num_blocks();
  enumerate_words(ch, rho, k, 0.0,
                  [&](const WordNode& node) {
                    std::vector<double> w(ell);
                    for (int a = 0; a < ell; ++a) {
                      w[a] = dec.block_weight(a, node.unnormalized_state);
                    }
                    sum += lyapunov_W_weights(w);
                  },
                  budget);
  return sum;
}

SelectionStats selection_statistics(const TrajectoryEnsemble& ens, double threshold) {
  if (threshold <= 0.5 || threshold >= 1.0) {
    throw DimensionError("selection_statistics: threshold must lie in (0.5, 1)");
  }
  SelectionStats st;
  st.threshold = threshold;
  st.frequency.assign(ens.num_blocks, 0.0);
  const int ell = ens.num_blocks;
  int undecided = 0;
  for (const auto& p : ens.paths) {
    int assigned = -1;
    for (int a = 0; a < ell; ++a) {
      if (p.block_weights[static_cast<size_t>(ens.horizon) * ell + a] > threshold) {
        assigned = a;
        break;
      }
    }
    if (assigned < 0) {
      ++undecided;
    } else {
      st.frequency[assigned] += 1.0;
    }
  }
  const double m = ens.num_paths;
  for (auto& f : st.frequency) f /= m;
  st.undecided = undecided / m;
  st.standard_error.resize(ell);
  for (int a = 0; a < ell; ++a) {
    st.standard_error[a] = std::sqrt(st.frequency[a] * (1.0 - st.frequency[a]) / m);
  }
  return st;
}

RateFit fit_rate(const std::vector<double>& series,
                 const std::vector<double>& standard_errors, int n0, int n1,
                 double mean_floor, double snr_cut) {
  if (n0 < 0 || n1 >= static_cast<int>(series.size()) || n1 - n0 < 10) {
    throw DimensionError("fit_rate: window must hold at least 10 steps");
  }
  std::vector<double> xs, ys;
  for (int n = n0; n <= n1; ++n) {
    if (series[n] < mean_floor) break;
    if (!standard_errors.empty() && series[n] <= snr_cut * standard_errors[n]) break;
    xs.push_back(n);
    ys.push_back(std::log(series[n]));
  }
  const int m = static_cast<int>(xs.size());
  if (m < 10) {
    throw NumericalError("fit_rate: fewer than 10 usable points in window");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double icept = (sy - slope * sx) / m;
  double rss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double r = ys[i] - (slope * xs[i] + icept);
    rss += r * r;
  }
  RateFit fit;
  fit.n0 = n0;
  fit.n1 = n1;
  fit.gamma_hat = -slope;
  fit.intercept = icept;
  fit.residual_rms = std::sqrt(rss / m);
  fit.usable_points = m;
  return fit;
}

}  // namespace enclosure
