#pragma once

namespace ethlab {

// Every invariant check in the lab reads its threshold from this one record.
struct Tolerances {
  double hermiticity = 1e-12;     // max |X - X^dag| relative to max |X|
  double trace = 1e-10;           // |Tr(rho) - 1|
  double positivity = -1e-10;     // lower bound on density-matrix eigenvalues
  double unit_norm = 1e-12;       // pure-state normalization
  double eigen_residual = 1e-9;   // ||H v - E v|| relative to ||H||
  double orthonormality = 1e-10;  // max |<n|m> - delta_nm|
  double degeneracy = 1e-10;      // gap threshold, relative to max(1, ||H||)
  double split_identity = 1e-13;  // entrywise H - (H_C + I (x) H_B)
  double locality = 1e-12;        // commutator of H_C with interior bath sites
  double bound_slack = 1e-9;      // lhs <= rhs + slack in inequality reports
};

inline const Tolerances& tols() {
  static const Tolerances t{};
  return t;
}

}  // namespace ethlab
