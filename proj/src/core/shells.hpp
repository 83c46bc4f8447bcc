#pragma once

#include <vector>

#include "core/report.hpp"
#include "core/spectral.hpp"

namespace ethlab::shells {

using hilbert::DensityMatrix;
using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::SpaceShape;
using spectral::SpectralData;
using spectral::TauCache;

enum class Tag { bath, global };

const char* tag_name(Tag t);

// Indices of eigenstates with eigenvalue in the inclusive window
// [E - delta, E + delta] of the tagged operator's spectrum. Empty shells are
// flagged values, not errors, so sweep drivers can record gaps.
struct EnergyShell {
  Tag tag = Tag::global;
  double center = 0.0;
  double half_width = 0.0;
  std::vector<Eigen::Index> indices;  // sorted ascending

  bool empty() const { return indices.empty(); }
  Eigen::Index count() const { return static_cast<Eigen::Index>(indices.size()); }
};

EnergyShell make_shell(const RealVector& spectrum_ascending, double center,
                       double half_width, Tag tag);

// Eigenbasis of the bath Hamiltonian H_B alone (d_B-dimensional).
struct BathSpectral {
  RealVector energies;
  Matrix vectors;
};

BathSpectral diagonalize_bath(const models::SplitHamiltonian& h);

// P = sum_{n in shell} |n><n| on the global space.
Matrix shell_projector_global(const SpectralData& sd, const EnergyShell& shell);

// P = I_S (x) sum_{k in shell} |k><k|_B in the global basis.
Matrix bath_shell_embedding(const BathSpectral& bath, const EnergyShell& shell,
                            const SpaceShape& shape);

// Uniform average of tau_n over the shell: Tr_B(P)/Tr(P).
DensityMatrix microcanonical_reduced(const SpectralData& sd, const TauCache& tau,
                                     const EnergyShell& shell);

// Tr(rho Q) <= ((||A1 - A2|| + d2) / d1)^2 where Q projects orthogonal to
// A1's [lambda-d1, lambda+d1] shell and rho is supported in A2's
// [lambda-d2, lambda+d2] shell. The support precondition is verified and a
// violation is an error: the bound is not claimed in that case.
BoundReport leakage_bound_check(const Matrix& a1, const Matrix& a2,
                                double lambda, double delta1, double delta2,
                                const DensityMatrix& rho);

// Precomputed overlaps of global eigenstates with the product basis
// |s> (x) |k>_B of system states and bath eigenvectors. Cumulative sums give
// O(d_S) window queries of <n|Q|n> and back both the leakage scans and the
// product-state machinery of module analysis.
class BathOverlapTable {
public:
  BathOverlapTable(const SpectralData& sd, const BathSpectral& bath);

  // <n | (s,k)> for global eigenstate n, system basis state s, bath
  // eigenvector k (conjugated the way scan code needs it).
  const Matrix& overlaps() const { return g_; }  // row s*d_B + k, column n
  const BathSpectral& bath() const { return *bath_; }

  // <n|Q|n> with Q complementary to the embedded bath shell.
  double leakage(const EnergyShell& bath_shell, Eigen::Index n) const;

private:
  const SpectralData* sd_;
  const BathSpectral* bath_;
  Matrix g_;
  // prefix[s][k+1, n] = sum_{k' <= k} |g(s*d_B + k', n)|^2
  std::vector<Eigen::MatrixXd> prefix_;
};

double eigenstate_leakage(const SpectralData& sd, const BathOverlapTable& table,
                          const EnergyShell& bath_shell, Eigen::Index n);

// Shell report: {tag, E, delta, count, indices or indices_path}. Shells above
// `inline_limit` put their index set into a little-endian u32 sidecar file
// named <stem>.indices.u32 next to the JSON.
nlohmann::json write_shell_report(const std::filesystem::path& dir,
                                  const std::string& stem, const EnergyShell& shell,
                                  Eigen::Index inline_limit = 64);

}  // namespace ethlab::shells
