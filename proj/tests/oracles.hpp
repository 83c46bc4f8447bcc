// Test-only oracles: independent brute-force routes for the quantities the
// library computes. These deliberately avoid the library's own code paths.
#pragma once

#include <complex>
#include <vector>

#include "core/hilbert.hpp"
#include "core/rng.hpp"

namespace oracles {

using ethlab::Rng;
using ethlab::hilbert::Complex;
using ethlab::hilbert::Matrix;
using ethlab::hilbert::SpaceShape;
using ethlab::hilbert::Vector;

// explicit double-loop index summation
inline Matrix partial_trace_indexsum(const Matrix& rho, Eigen::Index ds,
                                     Eigen::Index db) {
  Matrix out = Matrix::Zero(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index sp = 0; sp < ds; ++sp)
      for (Eigen::Index b = 0; b < db; ++b)
        out(s, sp) += rho(s * db + b, sp * db + b);
  return out;
}

// naive nested-loop Kronecker product
inline Matrix kron_naive(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// Power iteration for max |eigenvalue|. Two shifted runs (c*I + X and
// c*I - X, both positive semidefinite) so that symmetric spectra with
// |lambda_max| ~ |lambda_min| do not stall the iteration; Rayleigh-quotient
// stopping at relative tolerance.
inline double operator_norm_power(const Matrix& x, int max_iters = 50000,
                                  std::uint64_t seed = 7) {
  const Eigen::Index n = x.rows();
  double shift = 0.0;  // max row sum bounds the spectral radius
  for (Eigen::Index i = 0; i < n; ++i) {
    shift = std::max(shift, x.row(i).cwiseAbs().sum());
  }
  if (shift == 0.0) return 0.0;

  const auto top_eigenvalue = [&](const Matrix& b, std::uint64_t s) {
    Rng rng(s);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
    v /= v.norm();
    double value = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      Vector w = b * v;
      const double rayleigh = v.dot(w).real();
      if (it > 16 && std::abs(rayleigh - value) <= 1e-15 * shift) {
        return rayleigh;
      }
      value = rayleigh;
      const double norm = w.norm();
      if (norm == 0.0) return 0.0;
      v = w / norm;
    }
    return value;
  };

  const Matrix id = Matrix::Identity(n, n);
  const double hi = top_eigenvalue(shift * id + x, seed);       // shift + lambda_max
  const double lo = top_eigenvalue(shift * id - x, seed ^ 1);   // shift - lambda_min
  return std::max(hi, lo) - shift;
}

// trace norm via singular values of a scratch SVD (independent of the
// Hermitian eigendecomposition route used by the library)
inline double trace_norm_svd(const Matrix& x) {
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues().sum();
}

inline Matrix random_matrix(Rng& rng, Eigen::Index n) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

inline Matrix random_hermitian(Rng& rng, Eigen::Index n) {
  const Matrix m = random_matrix(rng, n);
  return 0.5 * (m + m.adjoint()).eval();
}

// random full-rank density matrix, G G^dag / Tr
inline Matrix random_density(Rng& rng, Eigen::Index n) {
  const Matrix g = random_matrix(rng, n);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline Vector random_state(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
  v /= v.norm();
  return v;
}

// direct counting oracle for shell membership
inline std::size_t count_in_window(const std::vector<double>& values, double lo,
                                   double hi) {
  std::size_t count = 0;
  for (double v : values) {
    if (v >= lo && v <= hi) ++count;
  }
  return count;
}

}  // namespace oracles
