#include "core/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace ethlab::thermo {

namespace {

double interp(const RealVector& grid, const RealVector& values, double e) {
  const Eigen::Index n = grid.size();
  if (e <= grid(0)) return values(0);
  if (e >= grid(n - 1)) return values(n - 1);
  const double* begin = grid.data();
  const Eigen::Index hi = std::upper_bound(begin, begin + n, e) - begin;
  const Eigen::Index lo = hi - 1;
  const double t = (e - grid(lo)) / (grid(hi) - grid(lo));
  return (1.0 - t) * values(lo) + t * values(hi);
}

}  // namespace

bool ThermoProfile::in_valid_range(double e) const {
  return has_valid_range() && e >= valid_min() && e <= valid_max();
}

double ThermoProfile::beta_at(double e) const { return interp(grid, beta, e); }

double ThermoProfile::heat_capacity_at(double e) const {
  return interp(grid, heat_capacity, e);
}

double ThermoProfile::beta2_over_c_at(double e) const {
  if (minus_beta_prime.size() > 0) return interp(grid, minus_beta_prime, e);
  const double b = beta_at(e);
  const double c = heat_capacity_at(e);
  return b * b / c;
}

ThermoProfile ThermoProfile::constant(double beta_value, double heat_capacity_value,
                                      double emin, double emax,
                                      Eigen::Index points) {
  ThermoProfile p;
  p.grid = RealVector::LinSpaced(points, emin, emax);
  p.dos = RealVector::Ones(points);
  p.entropy = RealVector::Zero(points);
  p.beta = RealVector::Constant(points, beta_value);
  p.heat_capacity = RealVector::Constant(points, heat_capacity_value);
  p.valid.assign(static_cast<std::size_t>(points), true);
  p.valid_lo = 0;
  p.valid_hi = points - 1;
  p.kernel_width = 0.0;
  p.ref_width = 1.0;
  return p;
}

double default_kernel_width(const RealVector& spectrum, int bath_sites) {
  const Eigen::Index n = spectrum.size();
  if (n < 2) throw SpecError("thermo_profile: spectrum too short");
  const double span = spectrum(n - 1) - spectrum(0);
  const double mean_spacing = span / static_cast<double>(n - 1);
  const double sites = bath_sites > 0
                           ? static_cast<double>(bath_sites)
                           : std::log2(static_cast<double>(n));
  return 1.5 * mean_spacing * std::sqrt(std::max(sites, 1.0));
}

ThermoProfile thermo_profile(const RealVector& spectrum, double kernel_width,
                             Eigen::Index grid_points, int bath_sites_hint) {
  const Eigen::Index n = spectrum.size();
  if (n < 2) throw SpecError("thermo_profile: need at least two levels");
  if (n < 100) {
    std::cerr << "thermo_profile: warning: only " << n
              << " levels; estimates will be noisy\n";
  }
  RealVector sorted = spectrum;
  std::sort(sorted.data(), sorted.data() + n);
  const double span = sorted(n - 1) - sorted(0);
  if (!(span > 0.0)) {
    throw SpecError("thermo_profile: all-degenerate spectrum has no profile");
  }
  if (grid_points < 8) grid_points = 512;
  const double w =
      kernel_width > 0.0 ? kernel_width : default_kernel_width(sorted, bath_sites_hint);

  ThermoProfile p;
  p.kernel_width = w;
  p.ref_width = w;
  p.grid = RealVector::LinSpaced(grid_points, sorted(0), sorted(n - 1));
  p.dos.setZero(grid_points);

  const double norm = 1.0 / (w * std::sqrt(2.0 * M_PI));
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    const double e = p.grid(i);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double x = (e - sorted(k)) / w;
      if (std::abs(x) > 8.0) continue;
      acc += std::exp(-0.5 * x * x);
    }
    p.dos(i) = norm * acc;
  }

  p.entropy.resize(grid_points);
  const double floor_dos = 1e-300;
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    p.entropy(i) = std::log(2.0 * p.ref_width * std::max(p.dos(i), floor_dos));
  }

  const double de = p.grid(1) - p.grid(0);
  auto centered = [&](const RealVector& f, Eigen::Index i) {
    if (i == 0) return (f(1) - f(0)) / de;
    if (i == grid_points - 1) return (f(i) - f(i - 1)) / de;
    return (f(i + 1) - f(i - 1)) / (2.0 * de);
  };

  p.beta.resize(grid_points);
  for (Eigen::Index i = 0; i < grid_points; ++i) p.beta(i) = centered(p.entropy, i);

  p.minus_beta_prime.resize(grid_points);
  p.heat_capacity.resize(grid_points);
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    const double bp = centered(p.beta, i);
    p.minus_beta_prime(i) = -bp;
    p.heat_capacity(i) = bp != 0.0 ? -p.beta(i) * p.beta(i) / bp : 0.0;
  }

  // statistics floor: at least 20 levels within one kernel width
  p.valid.assign(static_cast<std::size_t>(grid_points), false);
  for (Eigen::Index i = 0; i < grid_points; ++i) {
    const double e = p.grid(i);
    const double* begin = sorted.data();
    const auto count = std::upper_bound(begin, begin + n, e + w) -
                       std::lower_bound(begin, begin + n, e - w);
    p.valid[static_cast<std::size_t>(i)] =
        (p.minus_beta_prime(i) > 0.0) && (count >= 20);
  }

  // largest contiguous valid run
  Eigen::Index best_lo = -1, best_hi = -1, run_lo = -1;
  for (Eigen::Index i = 0; i <= grid_points; ++i) {
    const bool v = i < grid_points && p.valid[static_cast<std::size_t>(i)];
    if (v && run_lo < 0) run_lo = i;
    if (!v && run_lo >= 0) {
      if (best_lo < 0 || (i - 1 - run_lo) > (best_hi - best_lo)) {
        best_lo = run_lo;
        best_hi = i - 1;
      }
      run_lo = -1;
    }
  }
  p.valid_lo = best_lo;
  p.valid_hi = best_hi;
  return p;
}

double precision_condition(const ThermoProfile& profile, double e,
                           double delta_b, double norm_hc) {
  if (!profile.in_valid_range(e)) {
    std::ostringstream os;
    os << "precision_condition: E = " << e << " outside the valid range";
    throw SpecError(os.str());
  }
  if (!(delta_b >= 0.0)) {
    throw SpecError("precision_condition: DeltaB must be >= 0");
  }
  return profile.beta2_over_c_at(e) * delta_b * norm_hc;
}

double theorem1_eps_eth(double beta2_over_c, int d_s, double norm_hc) {
  return 12.0 * std::pow(2.0 * norm_hc * norm_hc * static_cast<double>(d_s) *
                             beta2_over_c,
                         2.0 / 3.0);
}

double theorem1_delta(double eps_eth, double norm_hc) {
  return 2.0 * std::sqrt(3.0) * norm_hc / std::sqrt(eps_eth);
}

double deltab_optimal(double beta2_over_c, int d_s, double norm_hc) {
  return std::cbrt(4.0 * norm_hc / (static_cast<double>(d_s) * beta2_over_c));
}

Theorem1Constants theorem1_constants(const ThermoProfile& profile, double emin,
                                     double emax, int d_s, double norm_hc) {
  if (!profile.has_valid_range() || emin < profile.valid_min() ||
      emax > profile.valid_max() || emin > emax) {
    std::ostringstream os;
    os << "theorem1_constants: region [" << emin << ", " << emax
       << "] is not inside the valid range";
    throw SpecError(os.str());
  }
  Theorem1Constants out;
  std::vector<double> grid;
  std::vector<double> opts;
  double sup = -1.0;
  for (Eigen::Index i = profile.valid_lo; i <= profile.valid_hi; ++i) {
    const double e = profile.grid(i);
    if (e < emin || e > emax) continue;
    const double r = profile.beta2_over_c_at(e);
    grid.push_back(e);
    opts.push_back(deltab_optimal(r, d_s, norm_hc));
    if (r > sup) {
      sup = r;
      out.sup_energy = e;
    }
  }
  if (grid.empty()) {
    // region falls between grid points; evaluate at the endpoints
    for (double e : {emin, emax}) {
      const double r = profile.beta2_over_c_at(e);
      grid.push_back(e);
      opts.push_back(deltab_optimal(r, d_s, norm_hc));
      if (r > sup) {
        sup = r;
        out.sup_energy = e;
      }
    }
  }
  out.eps_eth = theorem1_eps_eth(sup, d_s, norm_hc);
  out.delta = theorem1_delta(out.eps_eth, norm_hc);
  out.region_grid = Eigen::Map<RealVector>(grid.data(), static_cast<Eigen::Index>(grid.size()));
  out.deltab_opt = Eigen::Map<RealVector>(opts.data(), static_cast<Eigen::Index>(opts.size()));
  return out;
}

}  // namespace ethlab::thermo
