#include "enclosure/matrix.hpp"

#include <cmath>

namespace enclosure {

HermitianOp::HermitianOp(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("HermitianOp: matrix must be square");
  }
  mat_ = 0.5 * (a + a.adjoint());
}

HermitianOp hermitize(const Matrix& a) { return HermitianOp(a); }

DensityMatrix project_to_state(const HermitianOp& a, const Tolerances& tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  RealVector lam = es.eigenvalues().cwiseMax(0.0);
  const double tr = lam.sum();
  if (tr <= tol.degenerate_trace) {
    throw DegenerateStateError("project_to_state: clamped trace is zero");
  }
  lam /= tr;
  Matrix m = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  // keep the stored form exactly Hermitian with a unit diagonal sum
  m = 0.5 * (m + m.adjoint());
  m *= 1.0 / m.trace().real();
  return DensityMatrix(std::move(m));
}

EigH eig_hermitian(const HermitianOp& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix expm_i(const HermitianOp& h, double u) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
  const int d = h.dim();
  Vector phase(d);
  for (int k = 0; k < d; ++k) {
    phase(k) = std::exp(Complex(0.0, -u * es.eigenvalues()(k)));
  }
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

int numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++r;
  }
  return r;
}

double trace_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.adjoint()));
  return es.eigenvalues().cwiseAbs().sum();
}

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace enclosure
