#pragma once

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "enclosure/config.hpp"
#include "enclosure/errors.hpp"

namespace enclosure {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Hermitian operator: constructed by symmetrizing (A + A^dag)/2.
class HermitianOp {
 public:
  explicit HermitianOp(const Matrix& a);
  HermitianOp() = default;

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }

 private:
  Matrix mat_;
};

// Density matrix: Hermitian, PSD (eigenvalues clamped at 0 in stored form),
// unit trace. Construct via project_to_state.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }
  const HermitianOp& hermitian() const { return op_; }

  friend DensityMatrix project_to_state(const HermitianOp&, const Tolerances&);

 private:
  explicit DensityMatrix(Matrix m) : mat_(std::move(m)), op_(mat_) {}
  Matrix mat_;
  HermitianOp op_;
};

HermitianOp hermitize(const Matrix& a);

// Clamp negative eigenvalues at 0 and rescale to unit trace. Idempotent on
// valid states; throws DegenerateStateError when the clamped trace vanishes.
DensityMatrix project_to_state(const HermitianOp& a,
                               const Tolerances& tol = default_tolerances());

struct EigH {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

EigH eig_hermitian(const HermitianOp& a);

// U(u) = exp(-i u H) via spectral decomposition; unitary to working precision.
Matrix expm_i(const HermitianOp& h, double u);

// Count of singular values above tol * (largest singular value).
int numerical_rank(const Matrix& m, double tol);

double trace_norm(const Matrix& hermitian_part);
double max_abs(const Matrix& m);

}  // namespace enclosure
