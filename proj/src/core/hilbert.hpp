#pragma once

#include <Eigen/Dense>
#include <complex>

#include "core/errors.hpp"
#include "core/tolerances.hpp"

namespace ethlab::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class Space { system, bath, global };

const char* space_name(Space s);

// Bipartite shape. Global basis index convention, fixed everywhere:
//   i = s * d_b + b   (system index slowest)
struct SpaceShape {
  Eigen::Index d_s = 0;
  Eigen::Index d_b = 0;

  Eigen::Index total() const { return d_s * d_b; }
  Eigen::Index dim_of(Space sp) const;
  void validate() const;  // d_s >= 2, d_b >= 2
  bool operator==(const SpaceShape&) const = default;
};

double max_abs(const Matrix& x);

// Hermiticity gate used by every operation that requires a self-adjoint
// input: max |X - X^dag| <= tol * max |X|.
bool is_hermitian(const Matrix& x, double rel_tol = tols().hermiticity);
void require_hermitian(const Matrix& x, const char* who,
                       double rel_tol = tols().hermiticity);

struct EighResult {
  RealVector values;  // ascending
  Matrix vectors;     // column k pairs with values[k]
};

// Dense Hermitian eigendecomposition; throws NumericError on solver failure.
EighResult eigh(const Matrix& x, const char* who);
RealVector eigh_values(const Matrix& x, const char* who);

// Hermitian, unit-trace, numerically positive operator on a tagged space.
struct DensityMatrix {
  Space space = Space::global;
  SpaceShape shape;
  Matrix rho;

  Eigen::Index dim() const { return rho.rows(); }
  void validate(const Tolerances& tol = tols()) const;
};

DensityMatrix make_density(Space space, const SpaceShape& shape, Matrix rho,
                           const Tolerances& tol = tols());

struct PureState {
  Space space = Space::global;
  SpaceShape shape;
  Vector amps;

  void validate(const Tolerances& tol = tols()) const;
  DensityMatrix to_density() const;
};

// sigma[s,s'] = sum_b rho[s*d_b + b, s'*d_b + b]
Matrix partial_trace_bath(const Matrix& rho, const SpaceShape& shape);
DensityMatrix partial_trace_bath(const DensityMatrix& rho);

// Sum of absolute eigenvalues (= singular values for Hermitian input).
// No 1/2 factor: this is the distance the bounds are stated in.
double trace_norm(const Matrix& x);

// Largest absolute eigenvalue (spectral norm of a Hermitian matrix).
double operator_norm(const Matrix& x);

// (A (x) B)[s*d_b + b, s'*d_b + b'] = A[s,s'] * B[b,b']
Matrix tensor_product(const Matrix& a, const Matrix& b);

Matrix identity(Eigen::Index d);

}  // namespace ethlab::hilbert
