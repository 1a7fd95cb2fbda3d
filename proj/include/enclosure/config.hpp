#pragma once

#include <cstdint>

namespace enclosure {

// Numerical tolerances used across the library. Every clamp/accept threshold
// lives here so tests and the CLI reference a single knob set.
struct Tolerances {
  double hermitian_residual = 1e-12;  // allowed ||A - A^dag||_max after symmetrization
  double eig_clamp = 1e-10;           // eigenvalues above -eig_clamp are clamped to 0
  double trace_unit = 1e-10;          // |tr - 1| bound for states
  double trace_preserving = 1e-10;    // ||sum V^dag V - I||_max bound for channels
  double degenerate_trace = 1e-14;    // below this a clamped operator has no state
  double fixed_point_eig = 1e-8;      // |lambda - 1| window for fixed-space extraction
  double rank_tol = 1e-8;             // min-eigenvalue cutoff for "full rank"
  double peripheral = 1e-8;           // |lambda| >= 1 - peripheral counts as peripheral
  double peripheral_cyclic = 1e-6;    // peripheral eigenvalues must match roots of unity
  double block_support = 1e-10;       // 1 - tr(M_a rho) bound for "supported in block a"
  double gap_tol = 1e-7;              // witness gap separating identifiable from degenerate
  double feas_tol = 1e-9;             // certified pair minimum for uniform identifiability
  double fw_gap = 1e-10;              // Frank-Wolfe termination gap
  double prob_floor = 1e-12;          // branch probabilities below this are not sampled
  double mean_floor = 1e-12;          // rate fits drop steps with mean below this
  double snr_cut = 5.0;               // rate fits stop once mean <= snr_cut * std-error
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

// Cost caps for exact sums over outcome words.
struct Budget {
  std::uint64_t max_nodes = 10'000'000;
};

}  // namespace enclosure
