#include "enclosure/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace enclosure {

VRZ lyapunov_VRZ(const BlockDecomposition& dec, int target, double epsilon,
                 const DensityMatrix& rho) {
  const double wt = dec.block_weight(target, rho.matrix());
  VRZ out;
  out.V = std::sqrt(std::max(1.0 - wt, 0.0));
  out.R = 0.0;
  for (int b = 0; b < dec.num_blocks(); ++b) {
    if (b == target) continue;
    out.R += std::sqrt(std::max(dec.block_weight(b, rho.matrix()), 0.0));
  }
  out.Z = out.V + epsilon * out.R;
  return out;
}

Controllability check_controllability(const BlockDecomposition& dec, int target,
                                      const HermitianOp& h, double tol) {
  const Matrix phi = dec.block_basis(target);  // d x d_t
  const int d = h.dim();
  const int dt = static_cast<int>(phi.cols());
  const Matrix complement =
      Matrix::Identity(d, d) - dec.blocks[target].projector.matrix();
  Matrix cols(d, d * dt);
  Matrix hk = Matrix::Identity(d, d);
  for (int k = 1; k <= d; ++k) {
    hk = h.matrix() * hk;  // H^k
    for (int j = 0; j < dt; ++j) {
      cols.col((k - 1) * dt + j) = complement * (hk * phi.col(j));
    }
  }
  Controllability res;
  res.required_rank = d - dt;
  res.achieved_rank = numerical_rank(cols, tol);
  res.certified = res.achieved_rank == res.required_rank;
  return res;
}

double argmin_scalar(const std::function<double(double)>& objective,
                     double u_bound, int grid_points, int refine_iters) {
  if (grid_points < 3 || grid_points % 2 == 0) {
    throw DimensionError("argmin_scalar: grid size must be odd and >= 3");
  }
  if (u_bound < 0.0) throw DimensionError("argmin_scalar: negative bound");
  if (u_bound == 0.0) return 0.0;

  double best_u = 0.0;
  double best_f = objective(0.0);
  auto consider = [&](double u, double f) {
    if (f < best_f ||
        (f == best_f && (std::abs(u) < std::abs(best_u) ||
                         (std::abs(u) == std::abs(best_u) && u < best_u)))) {
      best_f = f;
      best_u = u;
    }
  };

  const double h = 2.0 * u_bound / (grid_points - 1);
  for (int k = 0; k < grid_points; ++k) {
    double u;
    if (k == 0) {
      u = -u_bound;
    } else if (k == grid_points - 1) {
      u = u_bound;
    } else if (2 * k == grid_points - 1) {
      continue;  // 0 is already evaluated
    } else {
      u = -u_bound + k * h;
    }
    consider(u, objective(u));
  }

  double lo = std::max(-u_bound, best_u - h);
  double hi = std::min(u_bound, best_u + h);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = objective(c), fd = objective(d);
  consider(c, fc);
  consider(d, fd);
  for (int i = 0; i < refine_iters; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = objective(c);
      consider(c, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = objective(d);
      consider(d, fd);
    }
  }
  return best_u;
}

BlockObjective::BlockObjective(const KrausChannel& ch, const BlockDecomposition& dec,
                               const ControlConfig& cfg, const DensityMatrix& anchor,
                               const Budget& budget)
    : dec_(dec), cfg_(cfg) {
  enumerate_words(ch, anchor, cfg.block_length, 0.0,
                  [&](const WordNode& node) {
                    if (node.weight <= 1e-15) return;  // weight * Z is below noise
                    leaves_.push_back(node.unnormalized_state);
                    weights_.push_back(node.weight);
                  },
                  budget);
}

double BlockObjective::operator()(double u) const {
  const Matrix uu = expm_i(cfg_.hamiltonian, u);
  const int ell = dec_.num_blocks();
  // rotated projectors let each leaf cost one inner product per block
  std::vector<Matrix> rotated(ell);
  for (int b = 0; b < ell; ++b) {
    rotated[b] = uu.adjoint() * dec_.blocks[b].projector.matrix() * uu;
  }
  double total = 0.0;
  for (size_t i = 0; i < leaves_.size(); ++i) {
    const double w = weights_[i];
    const double t = (rotated[cfg_.target] * leaves_[i]).trace().real();
    // weight * Z(U sigma U^dag) for sigma = leaf / weight, without normalizing
    double term = std::sqrt(std::max(w * (w - t), 0.0));
    double r = 0.0;
    for (int b = 0; b < ell; ++b) {
      if (b == cfg_.target) continue;
      r += std::sqrt(std::max((rotated[b] * leaves_[i]).trace().real(), 0.0));
    }
    term += cfg_.epsilon * std::sqrt(w) * r;
    total += term;
  }
  return total;
}

double expected_Z_of_u(const KrausChannel& ch, const BlockDecomposition& dec,
                       const ControlConfig& cfg, const DensityMatrix& anchor,
                       double u, const Budget& budget) {
  return BlockObjective(ch, dec, cfg, anchor, budget)(u);
}

namespace {

class BlockFeedbackPath : public PathController {
 public:
  BlockFeedbackPath(const KrausChannel& ch, const BlockDecomposition& dec,
                    const ControlConfig& cfg, const Tolerances& tol,
                    const Budget& budget)
      : ch_(ch), dec_(dec), cfg_(cfg), tol_(tol), budget_(budget) {}

  void begin_path(const DensityMatrix& rho0) override {
    anchor_ = rho0;
    last_u_ = 0.0;
  }

  std::optional<Matrix> post_measurement(int step, const DensityMatrix& rho_half) override {
    last_u_ = 0.0;
    if ((step + 1) % cfg_.block_length != 0) return std::nullopt;
    BlockObjective objective(ch_, dec_, cfg_, anchor_, budget_);
    const double u =
        argmin_scalar([&](double v) { return objective(v); }, cfg_.u_bound,
                      cfg_.grid_points, cfg_.refine_iters);
    last_u_ = u;
    if (u == 0.0) return std::nullopt;  // U(0) = I; keep the step untouched
    return expm_i(cfg_.hamiltonian, u);
  }

  void post_step(int step, const DensityMatrix& rho_after) override {
    if ((step + 1) % cfg_.block_length == 0) anchor_ = rho_after;
  }

  double last_control() const override { return last_u_; }

 private:
  const KrausChannel& ch_;
  const BlockDecomposition& dec_;
  const ControlConfig& cfg_;
  const Tolerances& tol_;
  const Budget& budget_;
  DensityMatrix anchor_;
  double last_u_ = 0.0;
};

}  // namespace

FeedbackController::FeedbackController(const KrausChannel& ch,
                                       const BlockDecomposition& dec,
                                       ControlConfig cfg, const Tolerances& tol,
                                       const Budget& budget)
    : ch_(ch), dec_(dec), cfg_(cfg), tol_(tol), budget_(budget) {
  if (cfg_.target < 0 || cfg_.target >= dec.num_blocks()) {
    throw DimensionError("FeedbackController: target block out of range");
  }
  if (cfg_.block_length < 1) {
    throw DimensionError("FeedbackController: block length must be >= 1");
  }
  Controllability c = check_controllability(dec, cfg_.target, cfg_.hamiltonian,
                                            tol.rank_tol);
  if (cfg_.u_bound > 0.0 && !c.certified) {
    throw ControllabilityError("FeedbackController: controllability refused, rank " +
                               std::to_string(c.achieved_rank) + " of " +
                               std::to_string(c.required_rank));
  }
}

std::unique_ptr<PathController> FeedbackController::make_path_controller() const {
  return std::make_unique<BlockFeedbackPath>(ch_, dec_, cfg_, tol_, budget_);
}

Delta0Estimate estimate_delta0(const KrausChannel& ch, const BlockDecomposition& dec,
                               int target, const HermitianOp& h, double u_bound,
                               int block_length, int samples, std::uint64_t seed,
                               double eta_probe, const Tolerances& tol,
                               const Budget& budget) {
  const int d = ch.dim();
  const int dt = dec.blocks[target].dim;
  const int rc = d - dt;
  // orthonormal basis of the off-target sum of blocks
  Matrix cbasis(d, rc);
  int k = 0;
  for (int b = 0; b < dec.num_blocks(); ++b) {
    if (b == target) continue;
    Matrix cols = dec.block_basis(b);
    for (int j = 0; j < cols.cols(); ++j) cbasis.col(k++) = cols.col(j);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_off_target = [&]() {
    Matrix g(rc, rc);
    for (int j = 0; j < rc; ++j)
      for (int i = 0; i < rc; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
    Matrix sigma = g * g.adjoint();
    sigma /= sigma.trace().real();
    return project_to_state(hermitize(cbasis * sigma * cbasis.adjoint()), tol);
  };

  const Matrix& mt = dec.blocks[target].projector.matrix();
  auto recoverable = [&](const DensityMatrix& rho) {
    Matrix prop = rho.matrix();
    for (int i = 0; i < block_length; ++i) prop = apply_channel_raw(ch, prop);
    auto mass = [&](double u) {
      const Matrix uu = expm_i(h, u);
      return (mt * uu * prop * uu.adjoint()).trace().real();
    };
    const double u_star = argmin_scalar([&](double u) { return -mass(u); },
                                        u_bound, 101, 30);
    return mass(u_star);
  };

  double found_min = 1.0;
  DensityMatrix worst;
  for (int s = 0; s < samples; ++s) {
    DensityMatrix rho = random_off_target();
    const double v = recoverable(rho);
    if (v < found_min) {
      found_min = v;
      worst = rho;
    }
  }
  // local polish around the worst sample
  double scale = 0.3;
  for (int it = 0; it < 24; ++it) {
    Matrix g(rc, rc);
    for (int j = 0; j < rc; ++j)
      for (int i = 0; i < rc; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
    Matrix local = cbasis.adjoint() * worst.matrix() * cbasis;
    DensityMatrix cand = project_to_state(
        hermitize(cbasis * (local + scale * (g * g.adjoint()) /
                                        std::max(1.0, (g * g.adjoint()).trace().real()))
                  * cbasis.adjoint()),
        tol);
    const double v = recoverable(cand);
    if (v < found_min) {
      found_min = v;
      worst = cand;
    } else {
      scale *= 0.8;
    }
  }
  Delta0Estimate est;
  est.found_min = found_min;
  est.delta0_hat = std::min(found_min / 2.0, eta_probe);
  return est;
}

double default_epsilon(int num_blocks, std::optional<double> delta0_hat) {
  const double root = num_blocks > 1 ? std::sqrt(double(num_blocks - 1)) : 1.0;
  if (delta0_hat && *delta0_hat > 0.0) {
    return 0.5 * (1.0 - std::sqrt(std::max(1.0 - 2.0 * *delta0_hat, 0.0))) / root;
  }
  return 0.1 / root;
}

double epsilon_upper_bound(int num_blocks, double delta0_hat, double kappa_prime) {
  const double root = num_blocks > 1 ? std::sqrt(double(num_blocks - 1)) : 1.0;
  const double one_minus_kp = std::max(1.0 - kappa_prime, 0.0);
  const double delta = std::min(delta0_hat, one_minus_kp * one_minus_kp) / 2.0;
  return (std::sqrt(1.0 - delta) - std::sqrt(std::max(1.0 - 2.0 * delta0_hat, 0.0))) /
         root;
}

}  // namespace enclosure
