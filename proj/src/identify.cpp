#include "enclosure/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace enclosure {

namespace {

// Word-distribution operators of one block at a fixed length: for each word I
// (lexicographic) the matrix K_I = W_I^dag W_I of the compressed Kraus
// operators, so P(I) = tr(K_I rho) is linear in the block-local state.
struct BlockWords {
  int dim;
  std::vector<Matrix> K;
};

BlockWords block_word_operators(const KrausChannel& ch, const BlockDecomposition& dec,
                                int alpha, int n, const Budget& budget) {
  const double leaves = std::pow(static_cast<double>(ch.num_outcomes()), n);
  if (leaves > static_cast<double>(budget.max_nodes)) {
    throw BudgetError("block_word_operators: |O|^n exceeds node budget");
  }
  Matrix cols = dec.block_basis(alpha);
  std::vector<Matrix> w;
  w.reserve(ch.num_outcomes());
  for (const auto& v : ch.ops()) w.push_back(cols.adjoint() * v * cols);
  BlockWords out;
  out.dim = dec.blocks[alpha].dim;
  out.K.reserve(static_cast<size_t>(leaves));
  // depth-first, multiplying new letters on the left of the running product
  std::vector<Matrix> stack = {Matrix::Identity(out.dim, out.dim)};
  struct Frame { Matrix prod; int depth; };
  std::function<void(const Matrix&, int)> rec = [&](const Matrix& prod, int depth) {
    if (depth == n) {
      out.K.push_back(prod.adjoint() * prod);
      return;
    }
    for (const auto& wi : w) rec(wi * prod, depth + 1);
  };
  rec(Matrix::Identity(out.dim, out.dim), 0);
  return out;
}

Eigen::VectorXd word_probs(const BlockWords& bw, const Matrix& rho) {
  Eigen::VectorXd p(bw.K.size());
  for (size_t i = 0; i < bw.K.size(); ++i) {
    p(static_cast<int>(i)) = std::max((bw.K[i] * rho).trace().real(), 0.0);
  }
  return p;
}

Matrix random_state(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix r = g * g.adjoint();
  return r / r.trace().real();
}

// Euclidean projection of eigenvalues onto the probability simplex, lifted
// back to the spectraplex.
Matrix project_spectraplex(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.adjoint()));
  Eigen::VectorXd w = es.eigenvalues();
  const int d = static_cast<int>(w.size());
  std::vector<double> u(w.data(), w.data() + d);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int k = 0;
  for (int i = 0; i < d; ++i) {
    css += u[i];
    if (u[i] - (css - 1.0) / (i + 1) > 0.0) {
      k = i + 1;
      tau = (css - 1.0) / (i + 1);
    } else {
      css -= u[i];
    }
  }
  (void)k;
  Eigen::VectorXd lam = (w.array() - tau).cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

struct Gradients {
  Matrix a, b;
};

struct Objective {
  const BlockWords& A;
  const BlockWords& B;
  bool maximize;  // true: Bhattacharyya overlap; false: separation quadratic

  double value(const Matrix& ra, const Matrix& rb) const {
    Eigen::VectorXd pa = word_probs(A, ra), pb = word_probs(B, rb);
    if (maximize) {
      return (pa.array() * pb.array()).sqrt().sum();
    }
    return (pa - pb).squaredNorm();
  }

  Gradients gradients(const Matrix& ra, const Matrix& rb) const {
    Eigen::VectorXd pa = word_probs(A, ra), pb = word_probs(B, rb);
    Matrix ga = Matrix::Zero(A.dim, A.dim);
    Matrix gb = Matrix::Zero(B.dim, B.dim);
    if (maximize) {
      for (size_t i = 0; i < A.K.size(); ++i) {
        const double qa = std::max(pa(static_cast<int>(i)), 1e-300);
        const double qb = std::max(pb(static_cast<int>(i)), 1e-300);
        ga += 0.5 * std::sqrt(qb / qa) * A.K[i];
        gb += 0.5 * std::sqrt(qa / qb) * B.K[i];
      }
    } else {
      for (size_t i = 0; i < A.K.size(); ++i) {
        const double diff = pa(static_cast<int>(i)) - pb(static_cast<int>(i));
        ga += 2.0 * diff * A.K[i];
        gb += -2.0 * diff * B.K[i];
      }
    }
    return {0.5 * (ga + ga.adjoint()), 0.5 * (gb + gb.adjoint())};
  }
};

// Linear-oracle vertex (extreme eigenvector) and the duality gap at x. For
// maximization the vertex takes the top eigenvector, for minimization the
// bottom one; over a singleton set (dim 1) the gap is identically zero.
struct LinearStep {
  Matrix sa, sb;
  double gap;
};

LinearStep linear_oracle(const Objective& obj, const Gradients& g,
                         const Matrix& ra, const Matrix& rb) {
  auto vertex = [&](const Matrix& grad, bool top) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(grad);
    const int idx = top ? static_cast<int>(grad.rows()) - 1 : 0;
    Vector v = es.eigenvectors().col(idx);
    return Matrix(v * v.adjoint());
  };
  LinearStep st;
  st.sa = vertex(g.a, obj.maximize);
  st.sb = vertex(g.b, obj.maximize);
  const double da = (g.a * (st.sa - ra)).trace().real();
  const double db = (g.b * (st.sb - rb)).trace().real();
  st.gap = obj.maximize ? (da + db) : -(da + db);
  return st;
}

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, int iters) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

// Frank-Wolfe with a gap-monitored projected-gradient polish. The returned
// point carries the smallest duality gap seen; the final symmetric candidate
// (ra+rb)/2 closes the gap exactly on equality manifolds of twin blocks.
FwOutcome run_program(const Objective& obj, std::uint64_t seed, int max_iters,
                      double gap_tol) {
  std::mt19937_64 rng(seed);
  Matrix ra = random_state(rng, obj.A.dim);
  Matrix rb = random_state(rng, obj.B.dim);

  auto certify = [&](const Matrix& xa, const Matrix& xb) {
    Gradients g = obj.gradients(xa, xb);
    return linear_oracle(obj, g, xa, xb).gap;
  };

  FwOutcome best;
  best.value = obj.value(ra, rb);
  best.gap = certify(ra, rb);
  best.arg_a = ra;
  best.arg_b = rb;
  best.iterations = 0;

  const int fw_phase = std::min(max_iters, 120);
  const double sgn = obj.maximize ? 1.0 : -1.0;
  int it = 0;
  double eta = 0.5;
  for (; it < max_iters; ++it) {
    Gradients g = obj.gradients(ra, rb);
    LinearStep st = linear_oracle(obj, g, ra, rb);
    const double v = obj.value(ra, rb);
    if (st.gap < best.gap || (sgn * v - st.gap > sgn * best.value - best.gap)) {
      best = {v, st.gap, it, ra, rb};
    }
    if (st.gap <= gap_tol) break;
    if (it < fw_phase) {
      const Matrix da = st.sa - ra, db = st.sb - rb;
      double t;
      if (obj.maximize) {
        t = golden_section_max(
            [&](double s) { return obj.value(ra + s * da, rb + s * db); }, 0.0,
            1.0, 60);
      } else {
        // the separation objective is an exact quadratic along the segment
        Eigen::VectorXd diff =
            word_probs(obj.A, ra) - word_probs(obj.B, rb);
        Eigen::VectorXd dd(diff.size());
        for (size_t i = 0; i < obj.A.K.size(); ++i) {
          dd(static_cast<int>(i)) = (obj.A.K[i] * da).trace().real() -
                                    (obj.B.K[i] * db).trace().real();
        }
        const double den = dd.squaredNorm();
        t = den <= 0.0 ? 0.0 : std::clamp(-diff.dot(dd) / den, 0.0, 1.0);
        if (t == 0.0) continue;
      }
      ra = 0.5 * ((ra + t * da) + (ra + t * da).adjoint()).eval();
      rb = 0.5 * ((rb + t * db) + (rb + t * db).adjoint()).eval();
    } else {
      // fixed-step projected gradient; value differences near the optimum sit
      // below machine precision, so steps are judged by the gap alone
      Matrix ra2 = project_spectraplex(ra + sgn * eta * g.a);
      Matrix rb2 = project_spectraplex(rb + sgn * eta * g.b);
      const double gap2 = certify(ra2, rb2);
      if (gap2 > st.gap) {
        eta *= 0.5;
        ra = best.arg_a;
        rb = best.arg_b;
        if (eta < 1e-12) break;
      } else {
        ra = ra2;
        rb = rb2;
        eta = std::min(eta * 1.1, 2.0);
      }
    }
  }
  if (obj.A.dim == obj.B.dim) {
    Matrix rs = project_spectraplex(0.5 * (best.arg_a + best.arg_b));
    const double v = obj.value(rs, rs);
    const double gap = certify(rs, rs);
    if (gap < best.gap || (sgn * v - gap > sgn * best.value - best.gap)) {
      best = {v, gap, it, rs, rs};
    }
  }
  best.iterations = it;
  return best;
}

struct PairBounds {
  double primal;     // best objective value over starts
  double certified;  // tightest valid bound (lower for min, upper for max)
  FwOutcome best;
};

PairBounds solve_pair(const Objective& obj, int restarts, int max_iters,
                      double gap_tol, std::uint64_t seed_base) {
  PairBounds out;
  out.primal = obj.maximize ? -1.0 : std::numeric_limits<double>::infinity();
  out.certified = obj.maximize ? std::numeric_limits<double>::infinity() : -1.0;
  for (int s = 0; s < restarts; ++s) {
    FwOutcome r = run_program(obj, seed_base + static_cast<std::uint64_t>(s),
                              max_iters, gap_tol);
    if (obj.maximize) {
      out.primal = std::max(out.primal, r.value);
      if (r.value + r.gap < out.certified) {
        out.certified = r.value + r.gap;
        out.best = r;
      }
    } else {
      out.primal = std::min(out.primal, r.value);
      if (r.value - r.gap > out.certified) {
        out.certified = r.value - r.gap;
        out.best = r;
      }
    }
    if (r.gap <= gap_tol && obj.A.dim == 1 && obj.B.dim == 1) break;
  }
  return out;
}

}  // namespace

PairWitness find_id_witness(const KrausChannel& ch, const BlockDecomposition& dec,
                            int alpha, int beta, int cutoff, const Tolerances& tol,
                            const Budget& budget) {
  if (alpha == beta) throw DimensionError("find_id_witness: alpha == beta");
  Matrix ca = dec.block_basis(alpha), cb = dec.block_basis(beta);
  std::vector<Matrix> wa, wb;
  for (const auto& v : ch.ops()) {
    wa.push_back(ca.adjoint() * v * ca);
    wb.push_back(cb.adjoint() * v * cb);
  }
  const Matrix ra = ca.adjoint() * dec.blocks[alpha].invariant_state.matrix() * ca;
  const Matrix rb = cb.adjoint() * dec.blocks[beta].invariant_state.matrix() * cb;

  PairWitness out{alpha, beta, std::nullopt, 0.0};
  for (int n = 1; n <= cutoff; ++n) {
    const double leaves = std::pow(static_cast<double>(ch.num_outcomes()), n);
    if (leaves > static_cast<double>(budget.max_nodes)) {
      throw BudgetError("find_id_witness: |O|^n exceeds node budget");
    }
    Word word;
    word.reserve(n);
    bool found = false;
    // lexicographic depth-first at fixed length = breadth-first over lengths
    std::function<void(const Matrix&, const Matrix&, int)> rec =
        [&](const Matrix& xa, const Matrix& xb, int depth) {
          if (found) return;
          if (depth == n) {
            const double gap = std::abs(xa.trace().real() - xb.trace().real());
            if (gap > tol.gap_tol) {
              out.word = word;
              out.gap = gap;
              found = true;
            }
            return;
          }
          for (int i = 0; i < ch.num_outcomes() && !found; ++i) {
            word.push_back(i);
            rec(wa[i] * xa * wa[i].adjoint(), wb[i] * xb * wb[i].adjoint(),
                depth + 1);
            word.pop_back();
          }
        };
    rec(ra, rb, 0);
    if (found) return out;
  }
  return out;
}

UniformLengthResult uniform_identifiability_length(
    const KrausChannel& ch, const BlockDecomposition& dec, int cutoff,
    const Tolerances& tol, const Budget& budget, int restarts, int max_iters) {
  const int ell = dec.num_blocks();
  UniformLengthResult out;
  if (ell <= 1) {
    out.length = 1;  // no pairs to separate
    return out;
  }
  int start = 1;
  for (int a = 0; a < ell; ++a) {
    for (int b = a + 1; b < ell; ++b) {
      PairWitness w = find_id_witness(ch, dec, a, b, cutoff, tol, budget);
      if (!w.word) {
        // a pair with no witness can never certify; report residuals at cutoff
        start = cutoff + 1;
      } else {
        start = std::max(start, static_cast<int>(w.word->size()));
      }
    }
  }
  for (int n = std::min(start, cutoff); n <= cutoff; ++n) {
    std::vector<PairResidual> residuals;
    bool all_ok = true;
    for (int a = 0; a < ell; ++a) {
      for (int b = a + 1; b < ell; ++b) {
        BlockWords A = block_word_operators(ch, dec, a, n, budget);
        BlockWords B = block_word_operators(ch, dec, b, n, budget);
        Objective obj{A, B, /*maximize=*/false};
        PairBounds pb = solve_pair(obj, restarts, max_iters, tol.fw_gap,
                                   0x9e3779b97f4a7c15ULL * (n * ell * ell + a * ell + b));
        residuals.push_back({a, b, pb.primal, std::max(pb.certified, 0.0)});
        if (std::max(pb.certified, 0.0) <= tol.feas_tol) all_ok = false;
      }
    }
    out.residuals = std::move(residuals);
    if (all_ok) {
      out.length = n;  // monotone in n, so the first certified length is N
      return out;
    }
  }
  return out;
}

namespace {

KappaReport kappa_over_pairs(const KrausChannel& ch, const BlockDecomposition& dec,
                             int word_length,
                             const std::vector<std::pair<int, int>>& pairs,
                             const Tolerances& tol, const Budget& budget,
                             int restarts, int max_iters) {
  KappaReport rep;
  rep.kappa = 0.0;
  rep.kappa_lower = 0.0;
  for (auto [a, b] : pairs) {
    BlockWords A = block_word_operators(ch, dec, a, word_length, budget);
    BlockWords B = block_word_operators(ch, dec, b, word_length, budget);
    Objective obj{A, B, /*maximize=*/true};
    PairBounds pb = solve_pair(obj, restarts, max_iters, tol.fw_gap,
                               0xda942042e4dd58b5ULL * (a * 64 + b) + word_length);
    PairKappa pk{a, b, pb.best.value, pb.best.gap, pb.best.arg_a, pb.best.arg_b};
    rep.kappa_lower = std::max(rep.kappa_lower, pb.primal);
    rep.kappa = std::max(rep.kappa, std::min(1.0, pb.certified));
    rep.pairs.push_back(std::move(pk));
  }
  return rep;
}

}  // namespace

KappaReport compute_kappa(const KrausChannel& ch, const BlockDecomposition& dec,
                          int word_length, const Tolerances& tol,
                          const Budget& budget, int restarts, int max_iters) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < dec.num_blocks(); ++a)
    for (int b = a + 1; b < dec.num_blocks(); ++b) pairs.emplace_back(a, b);
  return kappa_over_pairs(ch, dec, word_length, pairs, tol, budget, restarts,
                          max_iters);
}

KappaReport compute_kappa_prime(const KrausChannel& ch, const BlockDecomposition& dec,
                                int word_length, int target, const Tolerances& tol,
                                const Budget& budget, int restarts, int max_iters) {
  std::vector<std::pair<int, int>> pairs;
  for (int b = 0; b < dec.num_blocks(); ++b) {
    if (b != target) pairs.emplace_back(target, b);
  }
  return kappa_over_pairs(ch, dec, word_length, pairs, tol, budget, restarts,
                          max_iters);
}

double bhattacharyya_block_sum(const KrausChannel& ch, const DensityMatrix& rho_a,
                               const DensityMatrix& rho_b, int n,
                               const Budget& budget) {
  const double leaves = std::pow(static_cast<double>(ch.num_outcomes()), n);
  if (leaves > static_cast<double>(budget.max_nodes)) {
    throw BudgetError("bhattacharyya_block_sum: |O|^n exceeds node budget");
  }
  double sum = 0.0;
  std::function<void(const Matrix&, const Matrix&, int)> rec =
      [&](const Matrix& xa, const Matrix& xb, int depth) {
        if (depth == n) {
          const double pa = std::max(xa.trace().real(), 0.0);
          const double pb = std::max(xb.trace().real(), 0.0);
          sum += std::sqrt(pa * pb);
          return;
        }
        for (const auto& v : ch.ops()) {
          rec(v * xa * v.adjoint(), v * xb * v.adjoint(), depth + 1);
        }
      };
  rec(rho_a.matrix(), rho_b.matrix(), 0);
  return sum;
}

IdentifiabilityReport certify_identifiability(
    const KrausChannel& ch, const BlockDecomposition& dec, int cutoff,
    std::optional<int> kappa_prime_target, const Tolerances& tol,
    const Budget& budget, int restarts, int max_iters) {
  IdentifiabilityReport rep;
  rep.search_cutoff = cutoff;
  const int ell = dec.num_blocks();
  rep.id_holds = true;
  for (int a = 0; a < ell; ++a) {
    for (int b = a + 1; b < ell; ++b) {
      PairWitness w = find_id_witness(ch, dec, a, b, cutoff, tol, budget);
      if (!w.word) rep.id_holds = false;
      rep.witnesses.push_back(std::move(w));
    }
  }
  UniformLengthResult ul =
      uniform_identifiability_length(ch, dec, cutoff, tol, budget, restarts, max_iters);
  rep.uniform_length = ul.length;
  rep.residuals = std::move(ul.residuals);
  if (rep.uniform_length) {
    KappaReport k = compute_kappa(ch, dec, *rep.uniform_length, tol, budget,
                                  restarts, max_iters);
    rep.kappa = k.kappa;
    rep.kappa_lower = k.kappa_lower;
    rep.kappa_pairs = std::move(k.pairs);
    if (kappa_prime_target && ell > 1) {
      KappaReport kp = compute_kappa_prime(ch, dec, *rep.uniform_length,
                                           *kappa_prime_target, tol, budget,
                                           restarts, max_iters);
      rep.kappa_prime = kp.kappa;
    }
  }
  return rep;
}

}  // namespace enclosure
