#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "core/hilbert.hpp"
#include "core/models.hpp"

namespace ethlab::spectral {

using hilbert::Complex;
using hilbert::DensityMatrix;
using hilbert::Matrix;
using hilbert::PureState;
using hilbert::RealVector;
using hilbert::SpaceShape;
using hilbert::Vector;

struct SpectralData {
  SpaceShape shape;
  RealVector energies;           // ascending
  Matrix eigenvectors;           // column n = |n>, gauge: largest entry real > 0
  std::vector<std::vector<Eigen::Index>> degeneracy_classes;
  std::vector<Eigen::Index> class_of;  // index -> class id
  std::string model_hash;
  double h_norm = 0.0;  // max |E_n|

  Eigen::Index dim() const { return energies.size(); }
  bool degenerate() const;
  void check_invariants(const Matrix& h, const Tolerances& tol = tols()) const;
};

SpectralData diagonalize(const models::SplitHamiltonian& h,
                         const Tolerances& tol = tols());

// Reduced eigenstate matrices tau_n = Tr_B |n><n|, stored contiguously after
// the first full scan. Fill is idempotent and guarded, so concurrent scans
// are safe; entries are read-only afterwards.
class TauCache {
public:
  explicit TauCache(const SpectralData& sd) : sd_(&sd) {}

  const Matrix& tau(Eigen::Index n) const;
  void build_all() const;
  bool built() const { return built_; }

  // Tr_B |n><m| (cross term for degenerate blocks; not cached)
  Matrix tau_cross(Eigen::Index n, Eigen::Index m) const;

private:
  const SpectralData* sd_;
  mutable std::vector<Matrix> taus_;
  mutable std::once_flag once_;
  mutable bool built_ = false;
};

DensityMatrix eigenstate_reduced(const SpectralData& sd, Eigen::Index n);

// Diagonal ensemble p_n = <n|rho|n>. Degeneracy classes of size > 1 keep
// the full intra-class block <n|rho|m> and set the `degenerate` flag.
struct DiagonalEnsemble {
  Eigen::VectorXd p;
  bool degenerate = false;
  struct Block {
    std::vector<Eigen::Index> indices;
    Matrix coeff;  // coeff(a,b) = <n_a|rho|n_b>
  };
  std::vector<Block> blocks;
};

DiagonalEnsemble dephase(const DensityMatrix& rho, const SpectralData& sd);
DiagonalEnsemble dephase(const PureState& psi, const SpectralData& sd);
DiagonalEnsemble dephase_coeffs(const Vector& eigenbasis_amps,
                                const SpectralData& sd);

// Phi(rho) reconstructed as a global density matrix (test/plumbing helper).
DensityMatrix to_global(const DiagonalEnsemble& ens, const SpectralData& sd);

// Phi_S(rho) = sum_n p_n tau_n (+ degeneracy-block cross terms)
DensityMatrix equilibrium_from(const DiagonalEnsemble& ens,
                               const SpectralData& sd, const TauCache& tau);
DensityMatrix equilibrium_state(const DensityMatrix& rho,
                                const SpectralData& sd, const TauCache& tau);

// Tr_B of exp(-iHt) rho0 exp(iHt) at each requested time.
std::vector<Matrix> evolve_reduced(const DensityMatrix& rho0,
                                   const SpectralData& sd,
                                   const std::vector<double>& times);

namespace cache {

inline constexpr int kFormatVersion = 1;

// Directory layout:
//   meta.json     {model_hash, d_S, d_B, d_total, tolerances, format_version}
//   model.json    the originating ModelSpec
//   energies.f64  little-endian float64, ascending
//   eigvecs.c128  little-endian interleaved re/im float64, column-major
//   tau.c128      optional; n-major sequence of d_S x d_S row-major matrices
void save(const std::filesystem::path& dir, const models::ModelSpec& spec,
          const SpectralData& sd, const TauCache* tau = nullptr);

struct Loaded {
  models::ModelSpec spec;
  SpectralData sd;
};

// Refuses directories whose stored hash disagrees with the stored spec.
Loaded load(const std::filesystem::path& dir);

}  // namespace cache

}  // namespace ethlab::spectral
