#include "core/hilbert.hpp"

#include <sstream>

namespace ethlab::hilbert {

const char* space_name(Space s) {
  switch (s) {
    case Space::system: return "system";
    case Space::bath: return "bath";
    case Space::global: return "global";
  }
  return "?";
}

Eigen::Index SpaceShape::dim_of(Space sp) const {
  switch (sp) {
    case Space::system: return d_s;
    case Space::bath: return d_b;
    case Space::global: return d_s * d_b;
  }
  return 0;
}

void SpaceShape::validate() const {
  if (d_s < 2 || d_b < 2) {
    std::ostringstream os;
    os << "SpaceShape requires d_S >= 2 and d_B >= 2, got d_S=" << d_s
       << " d_B=" << d_b;
    throw SpecError(os.str());
  }
}

double max_abs(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return x.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& x, double rel_tol) {
  if (x.rows() != x.cols()) return false;
  const double scale = max_abs(x);
  return max_abs(x - x.adjoint()) <= rel_tol * scale;
}

void require_hermitian(const Matrix& x, const char* who, double rel_tol) {
  if (x.rows() != x.cols()) {
    std::ostringstream os;
    os << who << ": expected a square matrix, got " << x.rows() << "x" << x.cols();
    throw SpecError(os.str());
  }
  if (!is_hermitian(x, rel_tol)) {
    std::ostringstream os;
    os << who << ": input is not Hermitian within tolerance (|X - X^dag| = "
       << max_abs(x - x.adjoint()) << ", scale " << max_abs(x) << ")";
    throw SpecError(os.str());
  }
}

EighResult eigh(const Matrix& x, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << who << ": Hermitian eigensolver failed on a " << x.rows() << "x"
       << x.cols() << " matrix (max|X| = " << max_abs(x) << ")";
    throw NumericError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigh_values(const Matrix& x, const char* who) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << who << ": Hermitian eigensolver failed on a " << x.rows() << "x"
       << x.cols() << " matrix";
    throw NumericError(os.str());
  }
  return solver.eigenvalues();
}

void DensityMatrix::validate(const Tolerances& tol) const {
  const Eigen::Index want = shape.dim_of(space);
  if (rho.rows() != rho.cols() || rho.rows() != want) {
    std::ostringstream os;
    os << "DensityMatrix[" << space_name(space) << "]: dimension " << rho.rows()
       << "x" << rho.cols() << " does not match declared shape dim " << want;
    throw SpecError(os.str());
  }
  if (!is_hermitian(rho, tol.hermiticity)) {
    throw SpecError("DensityMatrix: not Hermitian within tolerance");
  }
  const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > tol.trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace deviates from 1 by " << tr_err;
    throw SpecError(os.str());
  }
  const RealVector ev = eigh_values(rho, "DensityMatrix::validate");
  if (ev(0) < tol.positivity) {
    std::ostringstream os;
    os << "DensityMatrix: minimum eigenvalue " << ev(0) << " below "
       << tol.positivity;
    throw SpecError(os.str());
  }
}

DensityMatrix make_density(Space space, const SpaceShape& shape, Matrix rho,
                           const Tolerances& tol) {
  DensityMatrix d{space, shape, std::move(rho)};
  d.validate(tol);
  return d;
}

void PureState::validate(const Tolerances& tol) const {
  const Eigen::Index want = shape.dim_of(space);
  if (amps.size() != want) {
    throw SpecError("PureState: amplitude vector does not match declared space");
  }
  if (std::abs(amps.norm() - 1.0) > tol.unit_norm) {
    std::ostringstream os;
    os << "PureState: norm deviates from 1 by " << std::abs(amps.norm() - 1.0);
    throw SpecError(os.str());
  }
}

DensityMatrix PureState::to_density() const {
  return DensityMatrix{space, shape, amps * amps.adjoint()};
}

Matrix partial_trace_bath(const Matrix& rho, const SpaceShape& shape) {
  shape.validate();
  if (rho.rows() != rho.cols() || rho.rows() != shape.total()) {
    std::ostringstream os;
    os << "partial_trace_bath: global dimension " << rho.rows()
       << " does not equal d_S*d_B = " << shape.total();
    throw SpecError(os.str());
  }
  const Eigen::Index ds = shape.d_s, db = shape.d_b;
  Matrix sigma = Matrix::Zero(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index sp = 0; sp < ds; ++sp) {
      Complex acc(0.0, 0.0);
      for (Eigen::Index b = 0; b < db; ++b) {
        acc += rho(s * db + b, sp * db + b);
      }
      sigma(s, sp) = acc;
    }
  }
  return sigma;
}

DensityMatrix partial_trace_bath(const DensityMatrix& rho) {
  if (rho.space != Space::global) {
    throw SpecError("partial_trace_bath: expected a global-space density matrix");
  }
  return DensityMatrix{Space::system, rho.shape,
                       partial_trace_bath(rho.rho, rho.shape)};
}

double trace_norm(const Matrix& x) {
  require_hermitian(x, "trace_norm");
  return eigh_values(x, "trace_norm").cwiseAbs().sum();
}

double operator_norm(const Matrix& x) {
  require_hermitian(x, "operator_norm");
  const RealVector ev = eigh_values(x, "operator_norm");
  return ev.cwiseAbs().maxCoeff();
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix identity(Eigen::Index d) { return Matrix::Identity(d, d); }

}  // namespace ethlab::hilbert
