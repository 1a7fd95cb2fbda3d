#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "enclosure/identify.hpp"
#include "enclosure/trajectory.hpp"

namespace enclosure {

struct ControlConfig {
  int target = 0;            // block index to stabilize
  HermitianOp hamiltonian;   // control generator H of U(u) = exp(-i u H)
  double u_bound = 0.0;      // control interval [-u_bound, u_bound]
  int block_length = 1;      // N': control fires every N' steps, N' >= N
  double epsilon = 0.1;      // Z = V + epsilon R
  int grid_points = 101;     // odd; grid includes 0 and the endpoints
  int refine_iters = 30;     // golden-section steps around the best grid point
};

struct VRZ {
  double V, R, Z;
};

// V = sqrt(1 - tr(M_target rho)), R = sum_{b != target} sqrt(tr(M_b rho)),
// Z = V + epsilon R.
VRZ lyapunov_VRZ(const BlockDecomposition& dec, int target, double epsilon,
                 const DensityMatrix& rho);

struct Controllability {
  bool certified;
  int achieved_rank;
  int required_rank;
};

// Rank test on the columns (I - M_target) H^k phi_j, k = 1..d, over an
// orthonormal basis of the target block: certified iff they span the
// complement of the target block.
Controllability check_controllability(const BlockDecomposition& dec, int target,
                                      const HermitianOp& h, double tol);

// Grid + golden-section scalar minimizer on [-u_bound, u_bound]; ties go to
// the smallest |u|, then to the negative one.
double argmin_scalar(const std::function<double(double)>& objective,
                     double u_bound, int grid_points, int refine_iters);

// Exact E[Z(U(u) rho_half U(u)^dag) | anchor] over the N'-step word tree.
// Build once per anchor; each u evaluation reuses the cached leaves.
class BlockObjective {
 public:
  BlockObjective(const KrausChannel& ch, const BlockDecomposition& dec,
                 const ControlConfig& cfg, const DensityMatrix& anchor,
                 const Budget& budget = Budget{});
  double operator()(double u) const;

 private:
  const BlockDecomposition& dec_;
  const ControlConfig& cfg_;
  std::vector<Matrix> leaves_;     // unnormalized conditioned operators
  std::vector<double> weights_;
};

double expected_Z_of_u(const KrausChannel& ch, const BlockDecomposition& dec,
                       const ControlConfig& cfg, const DensityMatrix& anchor,
                       double u, const Budget& budget = Budget{});

// Factory for per-path feedback controllers implementing the every-N'-steps
// argmin law; requires certified controllability.
class FeedbackController : public ControllerFactory {
 public:
  FeedbackController(const KrausChannel& ch, const BlockDecomposition& dec,
                     ControlConfig cfg,
                     const Tolerances& tol = default_tolerances(),
                     const Budget& budget = Budget{});

  std::unique_ptr<PathController> make_path_controller() const override;
  int target_block() const override { return cfg_.target; }
  const ControlConfig& config() const { return cfg_; }

 private:
  const KrausChannel& ch_;
  const BlockDecomposition& dec_;
  ControlConfig cfg_;
  Tolerances tol_;
  Budget budget_;
};

struct Delta0Estimate {
  double delta0_hat;  // min(found_min / 2, eta_probe); diagnostic lower value
  double found_min;   // smallest recoverable target mass seen over the samples
};

// Sampled lower estimate of the recoverability margin on states supported off
// the target block: minimize max_u tr(M_target U Phi^{N'}(rho) U^dag).
Delta0Estimate estimate_delta0(const KrausChannel& ch, const BlockDecomposition& dec,
                               int target, const HermitianOp& h, double u_bound,
                               int block_length, int samples, std::uint64_t seed,
                               double eta_probe = 0.45,
                               const Tolerances& tol = default_tolerances(),
                               const Budget& budget = Budget{});

// Default epsilon honoring the admissibility bound when a positive delta0
// estimate exists; falls back to 0.1/sqrt(ell-1) otherwise.
double default_epsilon(int num_blocks, std::optional<double> delta0_hat);
// Admissibility ceiling (sqrt(1-delta) - sqrt(1-2 delta0)) / sqrt(ell-1)
// with delta = min(delta0, (1-kappa')^2) / 2.
double epsilon_upper_bound(int num_blocks, double delta0_hat, double kappa_prime);

}  // namespace enclosure
