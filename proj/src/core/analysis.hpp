#pragma once

#include <array>
#include <memory>
#include <mutex>

#include "core/shells.hpp"
#include "core/thermo.hpp"

namespace ethlab::analysis {

using hilbert::DensityMatrix;
using hilbert::Matrix;
using hilbert::Vector;
using shells::EnergyShell;
using spectral::SpectralData;

// Immutable per-model bundle shared by every scan: the split Hamiltonian,
// its spectral data, the tau cache, the bath eigenbasis, and the overlap
// table. Safe to share across threads once constructed.
class Session {
public:
  explicit Session(models::SplitHamiltonian h);
  Session(models::SplitHamiltonian h, SpectralData sd);

  const models::SplitHamiltonian& model() const { return h_; }
  const SpectralData& sd() const { return sd_; }
  const spectral::TauCache& tau() const { return tau_; }
  const shells::BathSpectral& bath() const;
  const shells::BathOverlapTable& overlaps() const;
  int d_s() const { return static_cast<int>(sd_.shape.d_s); }

private:
  models::SplitHamiltonian h_;
  SpectralData sd_;
  spectral::TauCache tau_;
  mutable std::unique_ptr<shells::BathSpectral> bath_;
  mutable std::unique_ptr<shells::BathOverlapTable> table_;
  mutable std::once_flag bath_once_, table_once_;
};

// ---------------------------------------------------------------------------
// ETH precision scan

struct EthReport {
  double emin = 0.0, emax = 0.0, delta = 0.0;
  double eps_measured = 0.0;  // max ||tau_m - tau_n||_1 over admissible pairs
  Eigen::Index worst_n = -1, worst_m = -1;
  std::size_t pair_count = 0;
  std::size_t state_count = 0;
  std::array<std::size_t, 40> histogram{};  // distances binned over [0, 2]
};

// Exhaustive over pairs E_n, E_m in [emin, emax] with |E_m - E_n| <= 2 delta.
EthReport eth_scan(const Session& s, double emin, double emax, double delta);

// ---------------------------------------------------------------------------
// Thermalization precision of a bath shell (Definition-1 style estimate)

struct SamplerBudget {
  std::uint64_t seed = 20240801;
  int n_random_product = 256;
  int n_random_entangled = 256;
  int n_climb_starts = 4;
  int n_climb_iters = 200;
  double climb_step = 0.3;
  double multiplier = 1.0;  // scales the counts; used by the 10x rule

  int random_product_count() const;
  int random_entangled_count() const;
  int climb_iter_count() const;
};

struct ThermReport {
  EnergyShell shell;
  DensityMatrix omega;
  double eps_product = 0.0;    // lower bound on sup over product states
  double eps_entangled = 0.0;  // lower bound on sup over in-subspace states
  double product_mean = 0.0;
  double entangled_mean = 0.0;
  std::size_t product_count = 0;
  std::size_t entangled_count = 0;
  std::string product_argmax;
  std::string entangled_argmax;
  std::vector<double> climb_trace;  // best value after each climb start
  bool lower_bound_flag = true;
};

// Estimates sup ||Phi_S(rho_S (x) rho_B) - omega||_1 via convexity reduction
// to pure products, basis enumeration, seeded Haar sampling, and local hill
// climbing. The entangled estimate samples the full embedded subspace and is
// floored at the product estimate (products are admissible entangled states).
ThermReport therm_scan(const Session& s, const EnergyShell& bath_shell,
                       const DensityMatrix& omega, const SamplerBudget& budget);

// Distance produced by one explicit product state (test hook).
double product_state_distance(const Session& s, const EnergyShell& bath_shell,
                              const Vector& psi_system, const Vector& phi_shell,
                              const DensityMatrix& omega);

// Eq. (5): eps_entangled <= 4 d_S eps_product. A violation is reported as
// inconclusive (the product side is a sampled lower bound), never a refutation.
BoundReport lemma1_check(const ThermReport& report, int d_s);

// ---------------------------------------------------------------------------
// Proposition 1 / Eq. (4)

// Per state: gate Tr[rho (I - P)] <= eps_eth, then
// ||Phi_S(rho) - Tr_B(P)/Tr(P)||_1 <= 3 eps_eth. Gated-out states carry
// inputs.skipped = true and are not claimed.
std::vector<BoundReport> prop1_check(const Session& s,
                                     const EnergyShell& global_shell,
                                     double eps_eth,
                                     const std::vector<DensityMatrix>& states);

// Same check for pure states given by eigenbasis coefficient vectors.
std::vector<BoundReport> prop1_check_coeffs(const Session& s,
                                            const EnergyShell& global_shell,
                                            double eps_eth,
                                            const std::vector<Vector>& amps);

// ---------------------------------------------------------------------------
// Eigenstate bounds, Eqs. (7) and (8)

struct EigenstateBound {
  Eigen::Index n = -1;
  double energy = 0.0;
  double lhs = 0.0;      // ||tau_n - omega||_1
  double leakage = 0.0;  // <n|Q|n>
  BoundReport eq7;       // rhs = 4 d_S eps + 2 sqrt(leakage)
  BoundReport eq8;       // rhs = 8 ||H_C||^2 / DeltaB^2 + 4 d_S eps
  bool chain_ok = true;  // 2 sqrt(leakage) <= 8 ||H_C||^2 / DeltaB^2
};

// For all n with |E_n - E| <= DeltaB/2.
std::vector<EigenstateBound> eigenstate_bound_check(const Session& s,
                                                    const EnergyShell& bath_shell,
                                                    const DensityMatrix& omega,
                                                    double eps_product);

// ---------------------------------------------------------------------------
// Equilibrium targets

enum class OmegaVariant { microcanonical_reduced, canonical_reduced };

OmegaVariant omega_variant_from_name(const std::string& name);
const char* omega_variant_name(OmegaVariant v);

// Canonical system state Tr_B exp(-beta H)/Z at explicit inverse temperature.
DensityMatrix omega_canonical(const Session& s, double beta);

// Spec'd builder: microcanonical uses the global shell at E + offset with the
// given half-width; canonical reads beta(E) off the profile.
DensityMatrix omega_builder(const Session& s, const thermo::ThermoProfile& profile,
                            double e, OmegaVariant variant, double shell_width,
                            double offset = 0.0);

// ---------------------------------------------------------------------------
// Grid scan of the inequality chain (CLI `bounds`)

struct BoundsGridConfig {
  int e_points = 10;
  int deltab_points = 10;
  double emin = 0.0, emax = 0.0;          // 0,0 -> bath valid range
  double deltab_min = 0.0, deltab_max = 0.0;  // 0 -> automatic
  SamplerBudget budget;
  OmegaVariant omega_variant = OmegaVariant::microcanonical_reduced;
  double omega_offset = 0.0;
  int prop1_random_states = 20;
};

struct BoundsCell {
  double e = 0.0, delta_b = 0.0;
  bool shell_empty = false;
  bool in_valid = false;
  double eps_required = 0.0;  // Eq. (3) equality level
  ThermReport therm;
  BoundReport lemma1;
  std::vector<EigenstateBound> eigen_bounds;
  std::vector<BoundReport> prop1;
  double eps_eth_window = 0.0;  // exhaustive scan on the cell's global window
  bool prop1_applicable = false;
  std::string note;  // set when the cell was skipped (gap in the sweep)
};

struct BoundsGridResult {
  BoundsGridConfig config;
  std::vector<BoundsCell> cells;
};

BoundsGridResult bounds_grid(const Session& s, const thermo::ThermoProfile& profile,
                             const BoundsGridConfig& config);

// ---------------------------------------------------------------------------
// Theorem 1 end-to-end audit

struct AuditConfig {
  double emin = 0.0, emax = 0.0;  // region inside the bath valid range
  int e_bins = 10;
  int deltab_points = 10;
  SamplerBudget budget;
  OmegaVariant omega_variant = OmegaVariant::microcanonical_reduced;
  double omega_shell_width = 0.0;  // 0 -> Delta from Theorem 1
  double omega_offset = 0.0;
};

struct AuditPairBin {
  double e_center = 0.0;
  bool shell_empty = false;
  double eps_product = 0.0;
  double eps_required = 0.0;     // Eq. (3) equality at (E, DeltaB = 2 Delta)
  bool cell_ideal = false;
  std::size_t window_states = 0;
  std::size_t eq7_violations = 0;
  std::size_t eq8_violations = 0;
  double max_state_dist = 0.0;   // max ||tau_n - omega|| over the window
};

struct IdealityCell {
  double e = 0.0, delta_b = 0.0;
  bool shell_empty = false;
  double eps_required = 0.0;
  double eps_product = 0.0;
  bool ideal = false;
  BoundReport lemma1;
};

struct AuditResult {
  thermo::Theorem1Constants constants;
  double eps_eth_kernel_low = 0.0;   // constants at 0.5x kernel width
  double eps_eth_kernel_high = 0.0;  // constants at 2x kernel width
  EthReport eth;
  std::vector<AuditPairBin> bins;
  std::vector<IdealityCell> ideality;
  bool triangle_ok = true;
  bool bath_ideal = false;
  double eth_pred = 0.0;
  double eth_measured = 0.0;
};

AuditResult theorem1_audit(const Session& s, const thermo::ThermoProfile& profile,
                           const AuditConfig& config);

// ---------------------------------------------------------------------------
// Trajectory distances (CLI `evolve`)

struct EvolveReport {
  std::vector<double> times;
  std::vector<double> distances;  // ||Tr_B rho(t) - Phi_S(rho)||_1
};

EvolveReport evolve_distances(const Session& s, const DensityMatrix& rho0,
                              const std::vector<double>& times);

}  // namespace ethlab::analysis
