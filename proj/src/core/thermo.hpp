#pragma once

#include <optional>

#include "core/hilbert.hpp"

namespace ethlab::thermo {

using hilbert::RealVector;

// Micro-canonical profile of a bath spectrum on a fixed energy grid.
// Units k = 1 throughout. Estimated profiles carry minus_beta_prime so that
// the ratio beta^2 / C = -dbeta/dE stays finite through beta = 0.
struct ThermoProfile {
  RealVector grid;           // ascending energies
  RealVector dos;            // smoothed density of states, >= 0
  RealVector entropy;        // S(E) = ln(2 * ref_width * dos)
  RealVector beta;           // dS/dE
  RealVector heat_capacity;  // C = -beta^2 / (dbeta/dE)
  RealVector minus_beta_prime;  // -dbeta/dE (empty for synthetic profiles)
  std::vector<bool> valid;   // dbeta/dE < 0 and enough levels per kernel width
  Eigen::Index valid_lo = -1, valid_hi = -1;  // largest contiguous valid run
  double kernel_width = 0.0;
  double ref_width = 0.0;

  bool has_valid_range() const { return valid_lo >= 0; }
  double valid_min() const { return grid(valid_lo); }
  double valid_max() const { return grid(valid_hi); }
  bool in_valid_range(double e) const;

  double beta_at(double e) const;
  double heat_capacity_at(double e) const;
  // beta^2 / C, the combination entering Eq.-style precision formulas
  double beta2_over_c_at(double e) const;

  // Synthetic profile with constant beta and C on a grid (for formula tests).
  static ThermoProfile constant(double beta, double heat_capacity, double emin,
                                double emax, Eigen::Index points);
};

double default_kernel_width(const RealVector& spectrum, int bath_sites);

// Gaussian-kernel smoothing of the eigenvalue point measure; S, beta, C by
// centered finite differences; statistics floor of 20 levels per kernel
// width. Spectra shorter than 100 levels are accepted with a stderr warning.
ThermoProfile thermo_profile(const RealVector& bath_spectrum,
                             double kernel_width = 0.0,
                             Eigen::Index grid_points = 512,
                             int bath_sites_hint = 0);

// Smallest eps for which k beta(E)^2 DeltaB ||H_C|| <= eps C(beta(E)) holds.
double precision_condition(const ThermoProfile& profile, double e,
                           double delta_b, double norm_hc);

struct Theorem1Constants {
  double eps_eth = 0.0;   // 12 sup_E (2 ||H_C||^2 d_S beta^2 / C)^{2/3}
  double delta = 0.0;     // 2 sqrt(3) ||H_C|| / sqrt(eps_eth)
  double sup_energy = 0.0;
  RealVector region_grid;
  RealVector deltab_opt;  // (4 ||H_C|| C / (d_S beta^2))^{1/3} on region_grid
};

Theorem1Constants theorem1_constants(const ThermoProfile& profile, double emin,
                                     double emax, int d_s, double norm_hc);

// Formula-level helpers (also used as oracles in tests).
double theorem1_eps_eth(double beta2_over_c, int d_s, double norm_hc);
double theorem1_delta(double eps_eth, double norm_hc);
double deltab_optimal(double beta2_over_c, int d_s, double norm_hc);

}  // namespace ethlab::thermo
