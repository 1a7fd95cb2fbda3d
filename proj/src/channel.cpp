#include "enclosure/channel.hpp"

#include <cmath>
#include <utility>

namespace enclosure {

KrausChannel KrausChannel::create(std::vector<std::string> outcome_labels,
                                  std::vector<Matrix> kraus_ops,
                                  const Tolerances& tol) {
  if (kraus_ops.empty()) {
    throw DimensionError("KrausChannel: need at least one outcome");
  }
  if (outcome_labels.size() != kraus_ops.size()) {
    throw DimensionError("KrausChannel: one label per Kraus operator required");
  }
  const int d = static_cast<int>(kraus_ops[0].rows());
  for (const auto& v : kraus_ops) {
    if (v.rows() != d || v.cols() != d) {
      throw DimensionError("KrausChannel: all operators must be square of equal dim");
    }
  }
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& v : kraus_ops) acc += v.adjoint() * v;
  const double residual = max_abs(acc - Matrix::Identity(d, d));
  if (residual > tol.trace_preserving) {
    throw DimensionError("KrausChannel: sum V^dag V deviates from identity by " +
                         std::to_string(residual));
  }
  KrausChannel ch;
  ch.dim_ = d;
  ch.labels_ = std::move(outcome_labels);
  ch.kraus_ = std::move(kraus_ops);
  ch.tp_residual_ = residual;
  return ch;
}

Matrix apply_channel_raw(const KrausChannel& ch, const Matrix& x) {
  if (x.rows() != ch.dim() || x.cols() != ch.dim()) {
    throw DimensionError("apply_channel: dimension mismatch");
  }
  Matrix out = Matrix::Zero(ch.dim(), ch.dim());
  for (const auto& v : ch.ops()) out += v * x * v.adjoint();
  return out;
}

Matrix apply_adjoint_raw(const KrausChannel& ch, const Matrix& x) {
  if (x.rows() != ch.dim() || x.cols() != ch.dim()) {
    throw DimensionError("apply_adjoint: dimension mismatch");
  }
  Matrix out = Matrix::Zero(ch.dim(), ch.dim());
  for (const auto& v : ch.ops()) out += v.adjoint() * x * v;
  return out;
}

HermitianOp apply_channel(const KrausChannel& ch, const HermitianOp& x) {
  return hermitize(apply_channel_raw(ch, x.matrix()));
}

HermitianOp apply_adjoint(const KrausChannel& ch, const HermitianOp& x) {
  return hermitize(apply_adjoint_raw(ch, x.matrix()));
}

std::vector<Branch> step_distribution(const KrausChannel& ch,
                                      const DensityMatrix& rho,
                                      const Tolerances& tol) {
  std::vector<Branch> out;
  out.reserve(ch.num_outcomes());
  for (int i = 0; i < ch.num_outcomes(); ++i) {
    Matrix cond = ch.op(i) * rho.matrix() * ch.op(i).adjoint();
    const double p = cond.trace().real();
    Branch b{i, p, std::nullopt};
    if (p > tol.prob_floor) {
      b.state = project_to_state(hermitize(cond / p), tol);
    }
    out.push_back(std::move(b));
  }
  return out;
}

double word_probability(const KrausChannel& ch, const DensityMatrix& rho,
                        const Word& w) {
  Matrix x = rho.matrix();
  for (int letter : w) {
    x = ch.op(letter) * x * ch.op(letter).adjoint();
  }
  return x.trace().real();
}

namespace {

void enumerate_rec(const KrausChannel& ch, Word& word, const Matrix& state,
                   int remaining, double prune_tol, double& dropped,
                   const std::function<void(const WordNode&)>& visit) {
  const double weight = state.trace().real();
  if (remaining == 0) {
    visit(WordNode{word, state, weight});
    return;
  }
  for (int i = 0; i < ch.num_outcomes(); ++i) {
    Matrix child = ch.op(i) * state * ch.op(i).adjoint();
    const double w = child.trace().real();
    word.push_back(i);
    if (prune_tol > 0.0 && w < prune_tol) {
      dropped += w;
    } else {
      enumerate_rec(ch, word, child, remaining - 1, prune_tol, dropped, visit);
    }
    word.pop_back();
  }
}

}  // namespace

double enumerate_words(const KrausChannel& ch, const DensityMatrix& rho,
                       int depth, double prune_tol,
                       const std::function<void(const WordNode&)>& visit,
                       const Budget& budget) {
  if (depth < 0) throw DimensionError("enumerate_words: negative depth");
  if (prune_tol < 0.0) throw DimensionError("enumerate_words: prune_tol < 0");
  double leaves = std::pow(static_cast<double>(ch.num_outcomes()), depth);
  if (leaves > static_cast<double>(budget.max_nodes)) {
    throw BudgetError("enumerate_words: |O|^n = " + std::to_string(leaves) +
                      " exceeds node budget " + std::to_string(budget.max_nodes));
  }
  Word word;
  word.reserve(depth);
  double dropped = 0.0;
  enumerate_rec(ch, word, rho.matrix(), depth, prune_tol, dropped, visit);
  return dropped;
}

Vector vec(const Matrix& x) {
  Vector v(x.size());
  int k = 0;
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i) v(k++) = x(i, j);
  return v;
}

Matrix unvec(const Vector& v, int d) {
  Matrix x(d, d);
  int k = 0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) x(i, j) = v(k++);
  return x;
}

Matrix superoperator_matrix(const KrausChannel& ch) {
  const int d = ch.dim();
  Matrix s = Matrix::Zero(d * d, d * d);
  for (const auto& v : ch.ops()) {
    // vec(V X V^dag) = (conj(V) kron V) vec(X) in column-major vectorization
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l)
          for (int k = 0; k < d; ++k)
            s(j * d + i, l * d + k) += std::conj(v(j, l)) * v(i, k);
  }
  return s;
}

Matrix superoperator_adjoint_matrix(const KrausChannel& ch) {
  return superoperator_matrix(ch).adjoint();
}

}  // namespace enclosure
