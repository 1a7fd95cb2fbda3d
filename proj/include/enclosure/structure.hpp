#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "enclosure/channel.hpp"

namespace enclosure {

enum class Side { Primal, Dual };

// Orthonormal (Hilbert-Schmidt) Hermitian basis of the eigenvalue-1 space of
// the superoperator (Primal) or its adjoint (Dual).
std::vector<HermitianOp> fixed_point_space(const KrausChannel& ch, Side side,
                                           const Tolerances& tol = default_tolerances());

struct TransientCheck {
  bool accepted;
  std::optional<DensityMatrix> full_rank_state;  // set when accepted
  HermitianOp recurrent_projector;               // diagnostic when refused
  double min_eigenvalue;
};

// T = {0} iff a full-rank invariant state exists. Refusal carries the
// recurrent projector for diagnostics.
TransientCheck verify_no_transient(const KrausChannel& ch,
                                   const Tolerances& tol = default_tolerances());

struct Block {
  HermitianOp projector;         // M_alpha
  int dim;                       // d_alpha
  DensityMatrix invariant_state; // rho_inf^(alpha), supported on range(M_alpha)
  int period;                    // m_alpha
};

struct MixingRate {
  double lambda_hat;  // fitted geometric rate of the Cesaro distances
  double c_hat;       // fitted constant
};

struct BlockDecomposition {
  std::vector<Block> blocks;
  int period;          // lcm of the block periods
  int dual_fixed_dim;  // > #blocks signals unitarily equivalent blocks
  std::uint64_t seed;
  std::optional<MixingRate> mixing_rate;

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  // Orthonormal columns spanning range(M_alpha).
  Matrix block_basis(int alpha) const;
  double block_weight(int alpha, const Matrix& rho) const;
};

// Split H into minimal enclosures via spectral projectors of a seeded random
// element of the dual fixed space, refined until every candidate compresses
// to a channel with a one-dimensional fixed space.
BlockDecomposition decompose(const KrausChannel& ch, std::uint64_t seed,
                             const Tolerances& tol = default_tolerances(),
                             int max_rounds = 20);

struct PeriodInfo {
  int m;
  std::vector<int> m_alpha;
};

PeriodInfo compute_period(const KrausChannel& ch, const BlockDecomposition& dec,
                          const Tolerances& tol = default_tolerances());

// Trace-norm distance of the m-term Cesaro average at offset k from the
// block's invariant state; requires supp(rho) inside block alpha.
double cesaro_distance(const KrausChannel& ch, const BlockDecomposition& dec,
                       const DensityMatrix& rho, int alpha, int k,
                       const Tolerances& tol = default_tolerances());

// Residuals of the decomposition certificate; all must sit below tolerance.
struct DecompositionResiduals {
  double projector;        // ||M^2 - M||, ||M - M^dag||
  double completeness;     // ||sum M - I||
  double dual_invariance;  // ||Phi^dag(M) - M||
  double commutation;      // ||M V_i - V_i M||
  double support;          // ||M rho M - rho||
  double pairing;          // |tr(M_a rho_b) - delta_ab|
};

DecompositionResiduals certify(const KrausChannel& ch, const BlockDecomposition& dec);

}  // namespace enclosure
