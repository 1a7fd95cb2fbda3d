#include "enclosure/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace enclosure {

namespace {

// Hermitian orthonormal basis of ker(S - I) via SVD; robust for the clustered
// eigenvalue 1 where eigenvector routines lose orthogonality.
std::vector<Matrix> herm_kernel_basis(const Matrix& s, int d, double tol) {
  const int n = static_cast<int>(s.rows());
  Eigen::BDCSVD<Matrix> svd(s - Matrix::Identity(n, n), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Matrix> raw;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) <= tol) {
      Matrix x = unvec(svd.matrixV().col(i), d);
      raw.push_back(0.5 * (x + x.adjoint()));
      raw.push_back(Complex(0.0, -0.5) * (x - x.adjoint()));
    }
  }
  // Gram-Schmidt in the Hilbert-Schmidt inner product
  std::vector<Matrix> basis;
  for (Matrix c : raw) {
    for (const auto& b : basis) {
      c -= (b.adjoint() * c).trace() * b;
    }
    const double nrm = std::sqrt((c.adjoint() * c).trace().real());
    if (nrm > 1e-7) basis.push_back(c / nrm);
  }
  return basis;
}

std::vector<Matrix> compress_ops(const std::vector<Matrix>& ops, const Matrix& cols) {
  std::vector<Matrix> out;
  out.reserve(ops.size());
  for (const auto& v : ops) out.push_back(cols.adjoint() * v * cols);
  return out;
}

Matrix superop_of(const std::vector<Matrix>& ops) {
  const int d = static_cast<int>(ops[0].rows());
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& v : ops) {
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l)
          for (int k = 0; k < d; ++k)
            s(j * d + i, l * d + k) += std::conj(v(j, l)) * v(i, k);
  }
  return s;
}

// Unique invariant state of an irreducible compressed channel.
DensityMatrix invariant_state_of(const std::vector<Matrix>& ops, int d,
                                 const Tolerances& tol) {
  auto basis = herm_kernel_basis(superop_of(ops), d, tol.fixed_point_eig);
  if (basis.size() != 1) {
    throw NumericalError("invariant_state_of: fixed space is not one-dimensional");
  }
  Matrix f = basis[0];
  if (f.trace().real() < 0) f = -f;
  return project_to_state(hermitize(f), tol);
}

struct LiftedBlock {
  Matrix cols;  // d x r orthonormal lift
  DensityMatrix local_state;
};

void split_rec(const std::vector<Matrix>& full_ops, const Matrix& cols,
               const std::vector<Matrix>& ops, std::mt19937_64& rng,
               const Tolerances& tol, int depth, int max_rounds,
               std::vector<LiftedBlock>& out) {
  const int r = static_cast<int>(cols.cols());
  auto dual = herm_kernel_basis(superop_of(ops).adjoint(), r, tol.fixed_point_eig);
  if (dual.size() == 1) {
    out.push_back({cols, invariant_state_of(ops, r, tol)});
    return;
  }
  if (depth > max_rounds) {
    throw NumericalError(
        "decompose: refinement did not converge; retry with a different seed");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x = Matrix::Zero(r, r);
  for (const auto& g : dual) x += gauss(rng) * g;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.adjoint()));
  const auto& lam = es.eigenvalues();
  // group eigenvalues into clusters separated by more than the tolerance
  const double cluster_tol = 1e-7 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  int start = 0;
  std::vector<std::pair<int, int>> groups;
  for (int i = 1; i < r; ++i) {
    if (lam(i) - lam(i - 1) > cluster_tol) {
      groups.emplace_back(start, i - start);
      start = i;
    }
  }
  groups.emplace_back(start, r - start);
  if (groups.size() == 1) {
    // accidental full degeneracy of the draw; try again at the next depth
    split_rec(full_ops, cols, ops, rng, tol, depth + 1, max_rounds, out);
    return;
  }
  for (auto [g0, glen] : groups) {
    Matrix sub = es.eigenvectors().middleCols(g0, glen);
    split_rec(full_ops, cols * sub, compress_ops(ops, sub), rng, tol, depth + 1,
              max_rounds, out);
  }
}

}  // namespace

std::vector<HermitianOp> fixed_point_space(const KrausChannel& ch, Side side,
                                           const Tolerances& tol) {
  Matrix s = superoperator_matrix(ch);
  if (side == Side::Dual) s = s.adjoint().eval();
  auto basis = herm_kernel_basis(s, ch.dim(), tol.fixed_point_eig);
  std::vector<HermitianOp> out;
  out.reserve(basis.size());
  for (const auto& b : basis) out.push_back(hermitize(b));
  return out;
}

TransientCheck verify_no_transient(const KrausChannel& ch, const Tolerances& tol) {
  const int d = ch.dim();
  auto basis = fixed_point_space(ch, Side::Primal, tol);
  // average the PSD projections of +/- each basis element; with no transient
  // part every positive part is itself invariant and the support union is R
  Matrix acc = Matrix::Zero(d, d);
  int used = 0;
  for (const auto& f : basis) {
    for (double sign : {1.0, -1.0}) {
      try {
        acc += project_to_state(hermitize(sign * f.matrix()), tol).matrix();
        ++used;
      } catch (const DegenerateStateError&) {
        // sign-definite elements contribute on one side only
      }
    }
  }
  if (used == 0) throw NumericalError("verify_no_transient: empty fixed space");
  DensityMatrix cand = project_to_state(hermitize(acc / used), tol);
  double inv_res = max_abs(apply_channel_raw(ch, cand.matrix()) - cand.matrix());
  if (inv_res > 1e-9) {
    // transient corner: candidates were not invariant; fall back to the
    // Cesaro average of the maximally mixed state, whose support is R
    Matrix cur = Matrix::Identity(d, d) / d;
    Matrix avg = Matrix::Zero(d, d);
    const int burn = 256, len = 256;
    for (int k = 0; k < burn; ++k) cur = apply_channel_raw(ch, cur);
    for (int k = 0; k < len; ++k) {
      avg += cur;
      cur = apply_channel_raw(ch, cur);
    }
    cand = project_to_state(hermitize(avg / len), tol);
  }
  EigH eig = eig_hermitian(cand.hermitian());
  const double min_eig = eig.values(0);
  TransientCheck res;
  res.min_eigenvalue = min_eig;
  res.accepted = min_eig > tol.rank_tol;
  if (res.accepted) {
    res.full_rank_state = cand;
    res.recurrent_projector = hermitize(Matrix::Identity(d, d));
  } else {
    Matrix proj = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      if (eig.values(i) > tol.rank_tol) {
        proj += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
      }
    }
    res.recurrent_projector = hermitize(proj);
  }
  return res;
}

Matrix BlockDecomposition::block_basis(int alpha) const {
  const auto& m = blocks[alpha].projector;
  EigH eig = eig_hermitian(m);
  const int d = m.dim();
  Matrix cols(d, blocks[alpha].dim);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    if (eig.values(i) > 0.5) cols.col(k++) = eig.vectors.col(i);
  }
  if (k != blocks[alpha].dim) {
    throw NumericalError("block_basis: projector rank mismatch");
  }
  return cols;
}

double BlockDecomposition::block_weight(int alpha, const Matrix& rho) const {
  return (blocks[alpha].projector.matrix() * rho).trace().real();
}

BlockDecomposition decompose(const KrausChannel& ch, std::uint64_t seed,
                             const Tolerances& tol, int max_rounds) {
  auto check = verify_no_transient(ch, tol);
  if (!check.accepted) {
    throw TransientError(
        "decompose: channel has a nontrivial transient part (min invariant "
        "eigenvalue " + std::to_string(check.min_eigenvalue) + ")");
  }
  const int d = ch.dim();
  auto dual = fixed_point_space(ch, Side::Dual, tol);

  std::mt19937_64 rng(seed);
  std::vector<LiftedBlock> lifted;
  std::vector<Matrix> dual_mats;
  dual_mats.reserve(dual.size());
  for (const auto& g : dual) dual_mats.push_back(g.matrix());
  split_rec(ch.ops(), Matrix::Identity(d, d), ch.ops(), rng, tol, 0, max_rounds,
            lifted);

  // canonical block order: descending projector weight on e_0, e_1, ...
  std::vector<std::vector<double>> keys;
  for (const auto& lb : lifted) {
    Matrix p = lb.cols * lb.cols.adjoint();
    std::vector<double> key(d);
    for (int j = 0; j < d; ++j) key[j] = -p(j, j).real();
    keys.push_back(std::move(key));
  }
  std::vector<int> order(lifted.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });

  BlockDecomposition dec;
  dec.seed = seed;
  dec.dual_fixed_dim = static_cast<int>(dual.size());
  for (int idx : order) {
    const auto& lb = lifted[idx];
    Block blk;
    blk.projector = hermitize(lb.cols * lb.cols.adjoint());
    blk.dim = static_cast<int>(lb.cols.cols());
    blk.invariant_state = project_to_state(
        hermitize(lb.cols * lb.local_state.matrix() * lb.cols.adjoint()), tol);
    blk.period = 1;  // filled below
    dec.blocks.push_back(std::move(blk));
  }
  PeriodInfo pinfo = compute_period(ch, dec, tol);
  for (size_t a = 0; a < dec.blocks.size(); ++a) dec.blocks[a].period = pinfo.m_alpha[a];
  dec.period = pinfo.m;
  return dec;
}

PeriodInfo compute_period(const KrausChannel& ch, const BlockDecomposition& dec,
                          const Tolerances& tol) {
  PeriodInfo info;
  info.m = 1;
  for (int a = 0; a < dec.num_blocks(); ++a) {
    Matrix cols = dec.block_basis(a);
    Matrix s = superop_of(compress_ops(ch.ops(), cols));
    Eigen::ComplexEigenSolver<Matrix> es(s, /*computeEigenvectors=*/false);
    std::vector<Complex> peripheral;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      if (std::abs(es.eigenvalues()(i)) >= 1.0 - tol.peripheral) {
        peripheral.push_back(es.eigenvalues()(i));
      }
    }
    const int m_a = static_cast<int>(peripheral.size());
    if (m_a < 1) throw NumericalError("compute_period: lost the unit eigenvalue");
    // the peripheral spectrum of an irreducible block is the cyclic group of
    // m_a-th roots of unity; verify before trusting the count
    for (const Complex& lam : peripheral) {
      double best = 1e9;
      for (int k = 0; k < m_a; ++k) {
        const Complex root = std::exp(Complex(0.0, 2.0 * M_PI * k / m_a));
        best = std::min(best, std::abs(lam - root));
      }
      if (best > tol.peripheral_cyclic) {
        throw NumericalError(
            "compute_period: peripheral spectrum is not a cyclic group");
      }
    }
    info.m_alpha.push_back(m_a);
    info.m = std::lcm(info.m, m_a);
  }
  return info;
}

double cesaro_distance(const KrausChannel& ch, const BlockDecomposition& dec,
                       const DensityMatrix& rho, int alpha, int k,
                       const Tolerances& tol) {
  const double w = dec.block_weight(alpha, rho.matrix());
  if (w <= 1.0 - tol.block_support) {
    throw DimensionError("cesaro_distance: state not supported in block");
  }
  const int m = dec.period;
  Matrix cur = rho.matrix();
  for (int i = 0; i < k; ++i) cur = apply_channel_raw(ch, cur);
  Matrix avg = Matrix::Zero(ch.dim(), ch.dim());
  for (int r = 0; r < m; ++r) {
    avg += cur;
    if (r + 1 < m) cur = apply_channel_raw(ch, cur);
  }
  avg /= m;
  return trace_norm(avg - dec.blocks[alpha].invariant_state.matrix());
}

DecompositionResiduals certify(const KrausChannel& ch, const BlockDecomposition& dec) {
  DecompositionResiduals r{0, 0, 0, 0, 0, 0};
  const int d = ch.dim();
  Matrix sum = Matrix::Zero(d, d);
  for (int a = 0; a < dec.num_blocks(); ++a) {
    const Matrix& m = dec.blocks[a].projector.matrix();
    const Matrix& rho = dec.blocks[a].invariant_state.matrix();
    sum += m;
    r.projector = std::max(r.projector, max_abs(m * m - m));
    r.dual_invariance = std::max(r.dual_invariance, max_abs(apply_adjoint_raw(ch, m) - m));
    r.support = std::max(r.support, max_abs(m * rho * m - rho));
    for (const auto& v : ch.ops()) {
      r.commutation = std::max(r.commutation, max_abs(m * v - v * m));
    }
    for (int b = 0; b < dec.num_blocks(); ++b) {
      const double pairing =
          (m * dec.blocks[b].invariant_state.matrix()).trace().real();
      r.pairing = std::max(r.pairing, std::abs(pairing - (a == b ? 1.0 : 0.0)));
    }
  }
  r.completeness = max_abs(sum - Matrix::Identity(d, d));
  return r;
}

}  // namespace enclosure
