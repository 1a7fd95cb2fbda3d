#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "enclosure/structure.hpp"

namespace enclosure {

// Lyapunov distance from the pure-block set:
// W(rho) = 1/2 sum_{a != b} sqrt(tr(M_a rho) tr(M_b rho)), ordered pairs.
double lyapunov_W(const BlockDecomposition& dec, const DensityMatrix& rho);
double lyapunov_W_weights(const std::vector<double>& weights);

// Per-path feedback hook. simulate_ensemble calls begin_path once, then
// post_measurement after every measurement update; a returned unitary is
// applied as rho -> U rho U^dag. Instances hold per-path state and are never
// shared across paths.
class PathController {
 public:
  virtual ~PathController() = default;
  virtual void begin_path(const DensityMatrix& rho0) = 0;
  virtual std::optional<Matrix> post_measurement(int step, const DensityMatrix& rho_half) = 0;
  // called after the full transition; block anchors are captured here
  virtual void post_step(int step, const DensityMatrix& rho_after) = 0;
  // control value applied at `step` (0 between block boundaries)
  virtual double last_control() const = 0;
};

class ControllerFactory {
 public:
  virtual ~ControllerFactory() = default;
  virtual std::unique_ptr<PathController> make_path_controller() const = 0;
  virtual int target_block() const = 0;
};

struct PathSeries {
  std::vector<int> outcomes;             // n_max entries
  std::vector<double> block_weights;     // (n_max + 1) * num_blocks, step-major
  std::vector<double> W;                 // n_max + 1
  std::vector<double> V, R;              // n_max + 1 when controlled, else empty
  std::vector<double> control_u;         // n_max entries when controlled
  bool failed = false;
  int failed_step = -1;
};

struct TrajectoryEnsemble {
  std::uint64_t master_seed = 0;
  int num_paths = 0;
  int horizon = 0;
  int num_blocks = 0;
  bool controlled = false;
  std::vector<PathSeries> paths;

  // reductions accumulate in path order for bit-reproducibility
  std::vector<double> mean_W() const;
  std::vector<double> se_W() const;
  std::vector<double> mean_block_weight(int alpha) const;
  std::vector<double> mean_V() const;
  std::vector<double> se_V() const;
  std::vector<double> mean_R() const;
  std::vector<double> mean_Z(double epsilon) const;  // mean_V + epsilon * mean_R
  std::vector<double> undecided_fraction(double threshold) const;
};

// Seeded Monte Carlo simulation of the measurement chain; path p draws from
// an RNG stream derived from (master_seed, p), so the ensemble is
// bit-reproducible for any worker count. Paths whose state trace collapses
// are marked failed; more than 0.1% failed paths aborts the run.
TrajectoryEnsemble simulate_ensemble(const KrausChannel& ch,
                                     const BlockDecomposition& dec,
                                     const DensityMatrix& rho0, int num_paths,
                                     int n_max, std::uint64_t master_seed,
                                     const ControllerFactory* controller = nullptr,
                                     int threads = 1,
                                     const Tolerances& tol = default_tolerances());

// E[W(rho_k) | rho_0 = rho] as an exact sum over O^k (no sampling).
double exact_expectation_W(const KrausChannel& ch, const BlockDecomposition& dec,
                           const DensityMatrix& rho, int k,
                           const Budget& budget = Budget{});

struct SelectionStats {
  std::vector<double> frequency;       // per block
  std::vector<double> standard_error;  // binomial
  double undecided;
  double threshold;
};

// Assign each path to the block whose terminal weight exceeds the threshold;
// paths clearing no block are reported undecided, never force-assigned.
SelectionStats selection_statistics(const TrajectoryEnsemble& ens, double threshold);

struct RateFit {
  int n0, n1;
  double gamma_hat;      // decay rate per step (-slope); >= 0 means no decay when 0
  double intercept;
  double residual_rms;   // in log space
  int usable_points;
};

// Ordinary least squares of log(mean) on the step index over [n0, n1]. Usable
// points form the contiguous prefix where the mean stays above mean_floor and
// above snr_cut standard errors, cutting the fit off before sampling noise.
RateFit fit_rate(const std::vector<double>& series,
                 const std::vector<double>& standard_errors, int n0, int n1,
                 double mean_floor = default_tolerances().mean_floor,
                 double snr_cut = default_tolerances().snr_cut);

}  // namespace enclosure
