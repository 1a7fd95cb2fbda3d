#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "enclosure/structure.hpp"

namespace enclosure {

struct PairWitness {
  int alpha, beta;
  std::optional<Word> word;  // shortest distinguishing word, if any
  double gap;                // |P_a(word) - P_b(word)| (0 when no witness)
};

// Shortest word (breadth-first over lengths, lexicographic within a length)
// separating the invariant states of two blocks on the block-restricted
// operators. Empty optional when the cutoff is exhausted.
PairWitness find_id_witness(const KrausChannel& ch, const BlockDecomposition& dec,
                            int alpha, int beta, int cutoff,
                            const Tolerances& tol = default_tolerances(),
                            const Budget& budget = Budget{});

// One Frank-Wolfe program outcome. `value` is the primal objective at the
// returned point; `gap` the linear-minimization duality gap there, so the
// optimum lies within [value - gap, value] for minimization and within
// [value, value + gap] for maximization.
struct FwOutcome {
  double value;
  double gap;
  int iterations;
  Matrix arg_a, arg_b;  // block-local states at the reported point
};

struct PairResidual {
  int alpha, beta;
  double residual;        // best primal value of the separation quadratic
  double certified_lower; // best value-minus-gap over starts
};

struct UniformLengthResult {
  std::optional<int> length;
  std::vector<PairResidual> residuals;  // at the certified length or the cutoff
};

// Smallest word length at which every block pair is distinguishable for all
// states, certified per pair by the Frank-Wolfe lower bound of the convex
// separation program min sum_I (P_a(I) - P_b(I))^2.
UniformLengthResult uniform_identifiability_length(
    const KrausChannel& ch, const BlockDecomposition& dec, int cutoff,
    const Tolerances& tol = default_tolerances(), const Budget& budget = Budget{},
    int restarts = 8, int max_iters = 500);

struct PairKappa {
  int alpha, beta;
  double value;  // best primal (lower estimate of the pair supremum)
  double gap;    // duality gap of the best certified upper bound
  Matrix arg_a, arg_b;
};

struct KappaReport {
  double kappa;        // certified upper bound, clamped to <= 1
  double kappa_lower;  // best primal value over pairs
  std::vector<PairKappa> pairs;
};

// Worst-case Bhattacharyya overlap of length-N outcome distributions between
// blocks: concave maximization by multi-start Frank-Wolfe.
KappaReport compute_kappa(const KrausChannel& ch, const BlockDecomposition& dec,
                          int word_length,
                          const Tolerances& tol = default_tolerances(),
                          const Budget& budget = Budget{}, int restarts = 8,
                          int max_iters = 500);

// Same maximization restricted to pairs (target, beta), beta != target.
KappaReport compute_kappa_prime(const KrausChannel& ch, const BlockDecomposition& dec,
                                int word_length, int target,
                                const Tolerances& tol = default_tolerances(),
                                const Budget& budget = Budget{}, int restarts = 8,
                                int max_iters = 500);

// Exact sum_I sqrt(P_a(I) P_b(I)) over full-space states via a shared prefix
// tree with no pruning.
double bhattacharyya_block_sum(const KrausChannel& ch, const DensityMatrix& rho_a,
                               const DensityMatrix& rho_b, int n,
                               const Budget& budget = Budget{});

struct IdentifiabilityReport {
  bool id_holds;
  std::vector<PairWitness> witnesses;
  std::optional<int> uniform_length;
  std::vector<PairResidual> residuals;
  double kappa = 0.0;
  double kappa_lower = 0.0;
  std::vector<PairKappa> kappa_pairs;
  std::optional<double> kappa_prime;
  int search_cutoff = 0;
};

// Full (ID) certificate: witnesses for every pair, the uniform length, and
// kappa at that length. kappa_prime is filled when a target block is given.
IdentifiabilityReport certify_identifiability(
    const KrausChannel& ch, const BlockDecomposition& dec, int cutoff = 8,
    std::optional<int> kappa_prime_target = std::nullopt,
    const Tolerances& tol = default_tolerances(), const Budget& budget = Budget{},
    int restarts = 8, int max_iters = 500);

}  // namespace enclosure
