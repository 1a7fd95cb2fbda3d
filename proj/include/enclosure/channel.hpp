#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "enclosure/matrix.hpp"

namespace enclosure {

// Measurement letters in chronological order: letters[0] is the first
// measurement. The word operator multiplies new letters on the LEFT of the
// running product, so V_I = V_{i_n} ... V_{i_1}.
using Word = std::vector<int>;

// Kraus channel: one operator per outcome, sum_i V_i^dag V_i = I.
class KrausChannel {
 public:
  static KrausChannel create(std::vector<std::string> outcome_labels,
                             std::vector<Matrix> kraus_ops,
                             const Tolerances& tol = default_tolerances());

  int dim() const { return dim_; }
  int num_outcomes() const { return static_cast<int>(kraus_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& op(int i) const { return kraus_[i]; }
  const std::vector<Matrix>& ops() const { return kraus_; }
  double trace_preservation_residual() const { return tp_residual_; }

 private:
  KrausChannel() = default;
  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<Matrix> kraus_;
  double tp_residual_ = 0.0;
};

struct WordNode {
  Word word;
  Matrix unnormalized_state;  // V_I rho V_I^dag
  double weight;              // tr(V_I rho V_I^dag)
};

Matrix apply_channel_raw(const KrausChannel& ch, const Matrix& x);
Matrix apply_adjoint_raw(const KrausChannel& ch, const Matrix& x);
HermitianOp apply_channel(const KrausChannel& ch, const HermitianOp& x);
HermitianOp apply_adjoint(const KrausChannel& ch, const HermitianOp& x);

struct Branch {
  int outcome;
  double probability;
  std::optional<DensityMatrix> state;  // present only above prob_floor
};

// One measurement step: probabilities tr(V_i rho V_i^dag) and the conditioned
// states after numerical hygiene.
std::vector<Branch> step_distribution(const KrausChannel& ch,
                                      const DensityMatrix& rho,
                                      const Tolerances& tol = default_tolerances());

double word_probability(const KrausChannel& ch, const DensityMatrix& rho,
                        const Word& w);

// Depth-first enumeration of all words at the given depth, reusing prefix
// products. Branches whose weight drops below prune_tol are skipped; the sum
// of skipped weight is returned. Throws BudgetError if |O|^depth exceeds the
// node budget.
double enumerate_words(const KrausChannel& ch, const DensityMatrix& rho,
                       int depth, double prune_tol,
                       const std::function<void(const WordNode&)>& visit,
                       const Budget& budget = Budget{});

// Matrix of the channel acting on column-major vectorized operators.
Matrix superoperator_matrix(const KrausChannel& ch);
Matrix superoperator_adjoint_matrix(const KrausChannel& ch);

Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, int d);

}  // namespace enclosure
