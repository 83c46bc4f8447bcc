#include "core/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace ethlab::analysis {

using hilbert::Complex;
using shells::EnergyShell;

namespace {

// trace norm of a difference of states we constructed Hermitian ourselves
double trace_norm_h(const Matrix& x) {
  return hilbert::eigh_values(x, "analysis trace norm").cwiseAbs().sum();
}

Vector random_gaussian_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(re, im);
  }
  return v;
}

Vector random_unit_vector(Rng& rng, Eigen::Index n) {
  Vector v = random_gaussian_vector(rng, n);
  v /= v.norm();
  return v;
}

}  // namespace

Session::Session(models::SplitHamiltonian h)
    : h_(std::move(h)), sd_(spectral::diagonalize(h_)), tau_(sd_) {}

Session::Session(models::SplitHamiltonian h, SpectralData sd)
    : h_(std::move(h)), sd_(std::move(sd)), tau_(sd_) {
  if (sd_.model_hash != h_.spec.content_hash()) {
    throw SpecError("Session: spectral data does not belong to this model");
  }
  if (sd_.shape != h_.shape) {
    throw SpecError("Session: spectral data shape mismatch");
  }
}

const shells::BathSpectral& Session::bath() const {
  std::call_once(bath_once_, [this] {
    bath_ = std::make_unique<shells::BathSpectral>(shells::diagonalize_bath(h_));
  });
  return *bath_;
}

const shells::BathOverlapTable& Session::overlaps() const {
  std::call_once(table_once_, [this] {
    table_ = std::make_unique<shells::BathOverlapTable>(sd_, bath());
  });
  return *table_;
}

// ---------------------------------------------------------------------------

EthReport eth_scan(const Session& s, double emin, double emax, double delta) {
  if (!(delta > 0.0)) throw SpecError("eth_scan: delta must be > 0");
  if (!(emin <= emax)) throw SpecError("eth_scan: empty region");
  const auto& sd = s.sd();
  const auto& energies = sd.energies;

  std::vector<Eigen::Index> in_region;
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    if (energies(n) >= emin && energies(n) <= emax) in_region.push_back(n);
  }
  if (in_region.size() < 2) {
    std::ostringstream os;
    os << "eth_scan: fewer than 2 eigenstates in [" << emin << ", " << emax << "]";
    throw SpecError(os.str());
  }
  s.tau().build_all();

  struct Slot {
    double best = -1.0;
    Eigen::Index best_n = -1, best_m = -1;
    std::size_t count = 0;
    std::array<std::size_t, 40> hist{};
  };
  std::vector<Slot> slots(in_region.size());

  parallel_for(in_region.size(), [&](std::size_t ii) {
    Slot& slot = slots[ii];
    const Eigen::Index n = in_region[ii];
    for (std::size_t jj = ii + 1; jj < in_region.size(); ++jj) {
      const Eigen::Index m = in_region[jj];
      if (energies(m) - energies(n) > 2.0 * delta) break;
      const double dist = trace_norm_h(s.tau().tau(m) - s.tau().tau(n));
      slot.count += 1;
      const int bin = std::min(39, static_cast<int>(dist / 2.0 * 40.0));
      slot.hist[static_cast<std::size_t>(std::max(bin, 0))] += 1;
      if (dist > slot.best) {
        slot.best = dist;
        slot.best_n = n;
        slot.best_m = m;
      }
    }
  });

  EthReport report;
  report.emin = emin;
  report.emax = emax;
  report.delta = delta;
  report.state_count = in_region.size();
  for (const Slot& slot : slots) {
    report.pair_count += slot.count;
    for (std::size_t b = 0; b < slot.hist.size(); ++b) report.histogram[b] += slot.hist[b];
    if (slot.best > report.eps_measured) {
      report.eps_measured = slot.best;
      report.worst_n = slot.best_n;
      report.worst_m = slot.best_m;
    }
  }
  if (report.worst_n < 0 && !in_region.empty()) {
    // only n = m pairs inside the window
    report.eps_measured = 0.0;
  }
  return report;
}

// ---------------------------------------------------------------------------

int SamplerBudget::random_product_count() const {
  return std::max(0, static_cast<int>(std::lround(n_random_product * multiplier)));
}
int SamplerBudget::random_entangled_count() const {
  return std::max(0, static_cast<int>(std::lround(n_random_entangled * multiplier)));
}
int SamplerBudget::climb_iter_count() const {
  return std::max(0, static_cast<int>(std::lround(n_climb_iters * multiplier)));
}

namespace {

// Shared machinery for one (shell, omega) cell. Candidate states live in the
// embedded subspace span{|s> (x) |k>_B : k in shell}; their eigenbasis
// amplitudes come from one tall matrix-vector product.
class ShellSampler {
public:
  ShellSampler(const Session& s, const EnergyShell& shell,
               const DensityMatrix& omega)
      : s_(&s), shell_(&shell), omega_(&omega) {
    const auto& sd = s.sd();
    const Eigen::Index d = sd.dim();
    const Eigen::Index ds = sd.shape.d_s;
    const Eigen::Index db = sd.shape.d_b;
    r_ = shell.count();
    const auto& g = s.overlaps().overlaps();  // row s*d_B + k, column n
    radj_.resize(d, ds * r_);
    for (Eigen::Index si = 0; si < ds; ++si) {
      for (Eigen::Index j = 0; j < r_; ++j) {
        radj_.col(si * r_ + j) = g.row(si * db + shell.indices[j]).adjoint();
      }
    }
    s.tau().build_all();
  }

  Eigen::Index subspace_dim() const { return radj_.cols(); }
  Eigen::Index shell_rank() const { return r_; }

  // x: normalized coefficients over the (s, k) product basis
  double distance(const Vector& x) const {
    const Vector a = radj_ * x;  // eigenbasis amplitudes
    const auto& sd = s_->sd();
    const Eigen::Index ds = sd.shape.d_s;
    Matrix phi = Matrix::Zero(ds, ds);
    if (!sd.degenerate()) {
      for (Eigen::Index n = 0; n < a.size(); ++n) {
        const double p = std::norm(a(n));
        if (p > 0.0) phi += p * s_->tau().tau(n);
      }
    } else {
      const auto ens = spectral::dephase_coeffs(a, sd);
      phi = spectral::equilibrium_from(ens, sd, s_->tau()).rho;
    }
    return trace_norm_h(phi - omega_->rho);
  }

  double distance_product(const Vector& psi, const Vector& c) const {
    return distance(product_coeffs(psi, c));
  }

  Vector product_coeffs(const Vector& psi, const Vector& c) const {
    Vector x(psi.size() * r_);
    for (Eigen::Index si = 0; si < psi.size(); ++si) {
      x.segment(si * r_, r_) = psi(si) * c;
    }
    return x;
  }

  // basis candidate (s, j): distance of |s> (x) |k_j>
  double basis_distance(Eigen::Index si, Eigen::Index j) const {
    Vector x = Vector::Zero(radj_.cols());
    x(si * r_ + j) = Complex(1.0, 0.0);
    return distance(x);
  }

private:
  const Session* s_;
  const EnergyShell* shell_;
  const DensityMatrix* omega_;
  Eigen::Index r_ = 0;
  Matrix radj_;
};

struct Candidate {
  double value = -1.0;
  std::string label;
};

void keep_best(Candidate& best, double value, const std::string& label) {
  if (value > best.value) {
    best.value = value;
    best.label = label;
  }
}

}  // namespace

double product_state_distance(const Session& s, const EnergyShell& bath_shell,
                              const Vector& psi_system, const Vector& phi_shell,
                              const DensityMatrix& omega) {
  ShellSampler sampler(s, bath_shell, omega);
  Vector psi = psi_system / psi_system.norm();
  Vector c = phi_shell / phi_shell.norm();
  return sampler.distance_product(psi, c);
}

ThermReport therm_scan(const Session& s, const EnergyShell& bath_shell,
                       const DensityMatrix& omega, const SamplerBudget& budget) {
  if (bath_shell.empty()) throw SpecError("therm_scan: shell is empty");
  if (bath_shell.tag != shells::Tag::bath) {
    throw SpecError("therm_scan: expected a bath-tagged shell");
  }
  ShellSampler sampler(s, bath_shell, omega);
  const Eigen::Index ds = s.sd().shape.d_s;
  const Eigen::Index r = sampler.shell_rank();

  ThermReport report;
  report.shell = bath_shell;
  report.omega = omega;

  Candidate best_product, best_entangled;
  double product_sum = 0.0;
  std::size_t product_samples = 0;

  // (a) computational basis (x) shell basis, exhaustive
  {
    std::vector<double> vals(static_cast<std::size_t>(ds * r));
    parallel_for(vals.size(), [&](std::size_t idx) {
      const Eigen::Index si = static_cast<Eigen::Index>(idx) / r;
      const Eigen::Index j = static_cast<Eigen::Index>(idx) % r;
      vals[idx] = sampler.basis_distance(si, j);
    });
    for (std::size_t idx = 0; idx < vals.size(); ++idx) {
      product_sum += vals[idx];
      ++product_samples;
      std::ostringstream label;
      label << "basis:s=" << idx / static_cast<std::size_t>(r)
            << ",k=" << idx % static_cast<std::size_t>(r);
      keep_best(best_product, vals[idx], label.str());
    }
  }

  // (b) seeded Haar-random pure products
  {
    const int count = budget.random_product_count();
    std::vector<double> vals(static_cast<std::size_t>(count));
    parallel_for(vals.size(), [&](std::size_t i) {
      Rng rng(derive_seed(budget.seed, 0x10000 + i));
      const Vector psi = random_unit_vector(rng, ds);
      const Vector c = random_unit_vector(rng, r);
      vals[i] = sampler.distance_product(psi, c);
    });
    for (std::size_t i = 0; i < vals.size(); ++i) {
      product_sum += vals[i];
      ++product_samples;
      keep_best(best_product, vals[i], "random:" + std::to_string(i));
    }
  }

  // (c) hill climbing from seeded random starts, alternating system and bath
  // factor perturbations; shrink the step after repeated rejections
  {
    const int starts = std::max(0, budget.n_climb_starts);
    const int iters = budget.climb_iter_count();
    std::vector<double> vals(static_cast<std::size_t>(starts), -1.0);
    parallel_for(vals.size(), [&](std::size_t start) {
      Rng rng(derive_seed(budget.seed, 0x20000 + start));
      Vector psi = random_unit_vector(rng, ds);
      Vector c = random_unit_vector(rng, r);
      double value = sampler.distance_product(psi, c);
      double step = budget.climb_step;
      int rejects = 0;
      for (int it = 0; it < iters; ++it) {
        Vector psi_try = psi, c_try = c;
        if (it % 2 == 0) {
          psi_try += step * random_gaussian_vector(rng, ds);
          psi_try /= psi_try.norm();
        } else {
          c_try += step * random_gaussian_vector(rng, r);
          c_try /= c_try.norm();
        }
        const double trial = sampler.distance_product(psi_try, c_try);
        if (trial > value) {
          value = trial;
          psi = psi_try;
          c = c_try;
          rejects = 0;
        } else if (++rejects >= 10) {
          step = std::max(step * 0.7, 1e-4);
          rejects = 0;
        }
      }
      vals[start] = value;
    });
    for (std::size_t i = 0; i < vals.size(); ++i) {
      report.climb_trace.push_back(vals[i]);
      keep_best(best_product, vals[i], "climb:" + std::to_string(i));
    }
  }

  report.eps_product = std::max(best_product.value, 0.0);
  report.product_argmax = best_product.label;
  report.product_count = product_samples + report.climb_trace.size();
  report.product_mean = product_samples ? product_sum / static_cast<double>(product_samples) : 0.0;

  // entangled sampling over the full embedded subspace
  double ent_sum = 0.0;
  std::size_t ent_samples = 0;
  {
    const int count = budget.random_entangled_count();
    const Eigen::Index dim = sampler.subspace_dim();
    std::vector<double> vals(static_cast<std::size_t>(count));
    parallel_for(vals.size(), [&](std::size_t i) {
      Rng rng(derive_seed(budget.seed, 0x30000 + i));
      vals[i] = sampler.distance(random_unit_vector(rng, dim));
    });
    for (std::size_t i = 0; i < vals.size(); ++i) {
      ent_sum += vals[i];
      ++ent_samples;
      keep_best(best_entangled, vals[i], "random:" + std::to_string(i));
    }
  }
  {
    const int starts = std::max(0, budget.n_climb_starts);
    const int iters = budget.climb_iter_count();
    const Eigen::Index dim = sampler.subspace_dim();
    std::vector<double> vals(static_cast<std::size_t>(starts), -1.0);
    parallel_for(vals.size(), [&](std::size_t start) {
      Rng rng(derive_seed(budget.seed, 0x40000 + start));
      Vector x = random_unit_vector(rng, dim);
      double value = sampler.distance(x);
      double step = budget.climb_step;
      int rejects = 0;
      for (int it = 0; it < iters; ++it) {
        Vector x_try = x + step * random_gaussian_vector(rng, dim);
        x_try /= x_try.norm();
        const double trial = sampler.distance(x_try);
        if (trial > value) {
          value = trial;
          x = std::move(x_try);
          rejects = 0;
        } else if (++rejects >= 10) {
          step = std::max(step * 0.7, 1e-4);
          rejects = 0;
        }
      }
      vals[start] = value;
    });
    for (std::size_t i = 0; i < vals.size(); ++i) {
      keep_best(best_entangled, vals[i], "climb:" + std::to_string(i));
    }
  }

  // products are admissible entangled-set members, so the product maximum is
  // itself a lower bound for the entangled supremum
  report.entangled_count = ent_samples + static_cast<std::size_t>(std::max(0, budget.n_climb_starts));
  report.entangled_mean = ent_samples ? ent_sum / static_cast<double>(ent_samples) : 0.0;
  if (best_entangled.value >= report.eps_product) {
    report.eps_entangled = best_entangled.value;
    report.entangled_argmax = best_entangled.label;
  } else {
    report.eps_entangled = report.eps_product;
    report.entangled_argmax = "product:" + report.product_argmax;
  }
  return report;
}

BoundReport lemma1_check(const ThermReport& report, int d_s) {
  const double lhs = report.eps_entangled;
  const double rhs = 4.0 * static_cast<double>(d_s) * report.eps_product;
  BoundReport b = make_bound("lemma1_eq5", lhs, rhs,
                             {{"d_S", d_s},
                              {"eps_product", report.eps_product},
                              {"sampled", true}});
  b.inputs["verdict"] =
      b.holds ? "holds" : "inconclusive - tighten product optimization";
  return b;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<BoundReport> prop1_impl(const Session& s, const EnergyShell& shell,
                                    double eps_eth,
                                    const std::vector<Eigen::VectorXd>& probs,
                                    const std::vector<DensityMatrix>& phis) {
  if (shell.tag != shells::Tag::global) {
    throw SpecError("prop1_check: expected a global-tagged shell");
  }
  if (shell.empty()) throw SpecError("prop1_check: shell is empty");
  const DensityMatrix mc = shells::microcanonical_reduced(s.sd(), s.tau(), shell);

  std::vector<bool> in_shell(static_cast<std::size_t>(s.sd().dim()), false);
  for (Eigen::Index n : shell.indices) in_shell[static_cast<std::size_t>(n)] = true;

  std::vector<BoundReport> out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double out_weight = 0.0;
    for (Eigen::Index n = 0; n < probs[i].size(); ++n) {
      if (!in_shell[static_cast<std::size_t>(n)]) out_weight += probs[i](n);
    }
    if (out_weight > eps_eth + 1e-12) {
      BoundReport b = make_bound("prop1_eq4", 0.0, 3.0 * eps_eth,
                                 {{"state", i},
                                  {"peaking_weight", out_weight},
                                  {"skipped", true},
                                  {"notice", "peaking condition violated"}});
      out.push_back(std::move(b));
      continue;
    }
    const double lhs = trace_norm_h(phis[i].rho - mc.rho);
    BoundReport b = make_bound("prop1_eq4", lhs, 3.0 * eps_eth,
                               {{"state", i},
                                {"peaking_weight", out_weight},
                                {"skipped", false},
                                {"eps_eth", eps_eth}});
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

std::vector<BoundReport> prop1_check(const Session& s, const EnergyShell& shell,
                                     double eps_eth,
                                     const std::vector<DensityMatrix>& states) {
  std::vector<Eigen::VectorXd> probs;
  std::vector<DensityMatrix> phis;
  probs.reserve(states.size());
  phis.reserve(states.size());
  for (const auto& rho : states) {
    const auto ens = spectral::dephase(rho, s.sd());
    probs.push_back(ens.p);
    phis.push_back(spectral::equilibrium_from(ens, s.sd(), s.tau()));
  }
  return prop1_impl(s, shell, eps_eth, probs, phis);
}

std::vector<BoundReport> prop1_check_coeffs(const Session& s,
                                            const EnergyShell& shell,
                                            double eps_eth,
                                            const std::vector<Vector>& amps) {
  std::vector<Eigen::VectorXd> probs;
  std::vector<DensityMatrix> phis;
  probs.reserve(amps.size());
  phis.reserve(amps.size());
  for (const auto& a : amps) {
    const auto ens = spectral::dephase_coeffs(a, s.sd());
    probs.push_back(ens.p);
    phis.push_back(spectral::equilibrium_from(ens, s.sd(), s.tau()));
  }
  return prop1_impl(s, shell, eps_eth, probs, phis);
}

// ---------------------------------------------------------------------------

std::vector<EigenstateBound> eigenstate_bound_check(const Session& s,
                                                    const EnergyShell& bath_shell,
                                                    const DensityMatrix& omega,
                                                    double eps_product) {
  if (bath_shell.tag != shells::Tag::bath) {
    throw SpecError("eigenstate_bound_check: expected a bath-tagged shell");
  }
  const auto& sd = s.sd();
  const double e = bath_shell.center;
  const double delta_b = bath_shell.half_width;
  const double four_ds_eps = 4.0 * static_cast<double>(s.d_s()) * eps_product;
  const double hc2 = s.model().norm_hc * s.model().norm_hc;
  const double eq8_leak_term = 8.0 * hc2 / (delta_b * delta_b);

  std::vector<Eigen::Index> window;
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    if (std::abs(sd.energies(n) - e) <= delta_b / 2.0) window.push_back(n);
  }
  s.tau().build_all();
  s.overlaps();

  std::vector<EigenstateBound> out(window.size());
  parallel_for(window.size(), [&](std::size_t i) {
    const Eigen::Index n = window[i];
    EigenstateBound eb;
    eb.n = n;
    eb.energy = sd.energies(n);
    eb.lhs = trace_norm_h(s.tau().tau(n) - omega.rho);
    eb.leakage = s.overlaps().leakage(bath_shell, n);
    const double rhs7 = four_ds_eps + 2.0 * std::sqrt(eb.leakage);
    const double rhs8 = eq8_leak_term + four_ds_eps;
    eb.eq7 = make_bound("eigenstate_eq7", eb.lhs, rhs7,
                        {{"n", n}, {"leakage", eb.leakage}, {"sampled_eps", true}});
    eb.eq8 = make_bound("eigenstate_eq8", eb.lhs, rhs8,
                        {{"n", n}, {"delta_b", delta_b}, {"sampled_eps", true}});
    eb.chain_ok = 2.0 * std::sqrt(eb.leakage) <= eq8_leak_term + 1e-9;
    out[i] = std::move(eb);
  });
  return out;
}

// ---------------------------------------------------------------------------

OmegaVariant omega_variant_from_name(const std::string& name) {
  if (name == "microcanonical_reduced" || name == "microcanonical") {
    return OmegaVariant::microcanonical_reduced;
  }
  if (name == "canonical_reduced" || name == "canonical") {
    return OmegaVariant::canonical_reduced;
  }
  throw SpecError("omega_builder: unknown variant '" + name + "'");
}

const char* omega_variant_name(OmegaVariant v) {
  return v == OmegaVariant::microcanonical_reduced ? "microcanonical_reduced"
                                                   : "canonical_reduced";
}

DensityMatrix omega_canonical(const Session& s, double beta) {
  if (!std::isfinite(beta)) throw SpecError("omega_canonical: beta must be finite");
  const auto& sd = s.sd();
  s.tau().build_all();
  // weights exp(-beta (E_n - E_ref)) with E_ref chosen for stability
  const double e_ref = beta >= 0.0 ? sd.energies(0) : sd.energies(sd.dim() - 1);
  Eigen::VectorXd w(sd.dim());
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    w(n) = std::exp(-beta * (sd.energies(n) - e_ref));
  }
  const double z = w.sum();
  Matrix acc = Matrix::Zero(sd.shape.d_s, sd.shape.d_s);
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    acc += (w(n) / z) * s.tau().tau(n);
  }
  return DensityMatrix{hilbert::Space::system, sd.shape, std::move(acc)};
}

DensityMatrix omega_builder(const Session& s, const thermo::ThermoProfile& profile,
                            double e, OmegaVariant variant, double shell_width,
                            double offset) {
  if (variant == OmegaVariant::canonical_reduced) {
    if (!profile.in_valid_range(e)) {
      throw SpecError("omega_builder: E outside the profile valid range");
    }
    return omega_canonical(s, profile.beta_at(e));
  }
  if (!(shell_width > 0.0)) {
    throw SpecError("omega_builder: microcanonical variant needs a shell width");
  }
  const EnergyShell shell =
      shells::make_shell(s.sd().energies, e + offset, shell_width, shells::Tag::global);
  if (shell.empty()) {
    std::ostringstream os;
    os << "omega_builder: empty global shell at E = " << e + offset
       << ", width " << shell_width;
    throw SpecError(os.str());
  }
  return shells::microcanonical_reduced(s.sd(), s.tau(), shell);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Vector> random_peaked_states(const Session& s, const EnergyShell& shell,
                                         double eps_eth, int count,
                                         std::uint64_t seed) {
  // in-shell random superposition plus a controlled out-of-shell tail whose
  // weight stays strictly inside the peaking gate
  const auto& sd = s.sd();
  std::vector<bool> in_shell(static_cast<std::size_t>(sd.dim()), false);
  for (Eigen::Index n : shell.indices) in_shell[static_cast<std::size_t>(n)] = true;
  const double tail_weight = std::min(0.5 * eps_eth, 0.3);

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 0x50000 + static_cast<std::uint64_t>(i)));
    Vector a = Vector::Zero(sd.dim());
    Vector inside = random_gaussian_vector(rng, shell.count());
    inside /= inside.norm();
    for (Eigen::Index j = 0; j < shell.count(); ++j) {
      a(shell.indices[j]) = std::sqrt(1.0 - tail_weight) * inside(j);
    }
    if (tail_weight > 0.0 && shell.count() < sd.dim()) {
      Vector outside = random_gaussian_vector(rng, sd.dim() - shell.count());
      outside /= outside.norm();
      Eigen::Index k = 0;
      for (Eigen::Index n = 0; n < sd.dim(); ++n) {
        if (!in_shell[static_cast<std::size_t>(n)]) {
          a(n) = std::sqrt(tail_weight) * outside(k++);
        }
      }
    }
    a /= a.norm();
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

BoundsGridResult bounds_grid(const Session& s, const thermo::ThermoProfile& profile,
                             const BoundsGridConfig& config) {
  if (!profile.has_valid_range()) {
    throw SpecError("bounds_grid: bath profile has no valid range");
  }
  BoundsGridConfig cfg = config;
  if (cfg.emin == 0.0 && cfg.emax == 0.0) {
    cfg.emin = profile.valid_min();
    cfg.emax = profile.valid_max();
  }
  if (cfg.deltab_min <= 0.0 || cfg.deltab_max <= 0.0) {
    const double span = profile.grid(profile.grid.size() - 1) - profile.grid(0);
    cfg.deltab_min = std::max(2.0 * profile.kernel_width, span * 0.01);
    cfg.deltab_max = span / 4.0;
  }
  if (cfg.e_points < 1 || cfg.deltab_points < 1) {
    throw SpecError("bounds_grid: grid must be at least 1x1");
  }

  BoundsGridResult result;
  result.config = cfg;
  for (int i = 0; i < cfg.e_points; ++i) {
    const double e = cfg.e_points == 1
                         ? 0.5 * (cfg.emin + cfg.emax)
                         : cfg.emin + (cfg.emax - cfg.emin) * i / (cfg.e_points - 1);
    for (int j = 0; j < cfg.deltab_points; ++j) {
      const double t = cfg.deltab_points == 1
                           ? 0.5
                           : static_cast<double>(j) / (cfg.deltab_points - 1);
      const double delta_b =
          cfg.deltab_min * std::pow(cfg.deltab_max / cfg.deltab_min, t);

      BoundsCell cell;
      cell.e = e;
      cell.delta_b = delta_b;
      cell.in_valid = profile.in_valid_range(e);
      const EnergyShell shell =
          shells::make_shell(s.bath().energies, e, delta_b, shells::Tag::bath);
      cell.shell_empty = shell.empty();
      if (cell.in_valid) {
        cell.eps_required = thermo::precision_condition(profile, e, delta_b,
                                                        s.model().norm_hc);
      }
      if (!cell.shell_empty) try {
        SamplerBudget budget = cfg.budget;
        budget.seed = derive_seed(cfg.budget.seed,
                                  static_cast<std::uint64_t>(i) * 1000 +
                                      static_cast<std::uint64_t>(j));
        DensityMatrix omega =
            cfg.omega_variant == OmegaVariant::canonical_reduced && cell.in_valid
                ? omega_builder(s, profile, e, cfg.omega_variant, 0.0)
                : omega_builder(s, profile, e, OmegaVariant::microcanonical_reduced,
                                delta_b / 2.0, cfg.omega_offset);
        cell.therm = therm_scan(s, shell, omega, budget);
        cell.lemma1 = lemma1_check(cell.therm, s.d_s());
        cell.eigen_bounds =
            eigenstate_bound_check(s, shell, omega, cell.therm.eps_product);

        // Proposition 1 on the matching global window
        const EnergyShell gshell = shells::make_shell(
            s.sd().energies, e + cfg.omega_offset, delta_b / 2.0, shells::Tag::global);
        if (gshell.count() >= 2) {
          const EthReport eth = eth_scan(s, gshell.center - gshell.half_width,
                                         gshell.center + gshell.half_width,
                                         gshell.half_width);
          cell.eps_eth_window = eth.eps_measured;
          std::vector<Vector> states;
          for (Eigen::Index n : gshell.indices) {
            Vector a = Vector::Zero(s.sd().dim());
            a(n) = Complex(1.0, 0.0);
            states.push_back(std::move(a));
          }
          const auto peaked = random_peaked_states(s, gshell, eth.eps_measured,
                                                   cfg.prop1_random_states,
                                                   budget.seed);
          states.insert(states.end(), peaked.begin(), peaked.end());
          cell.prop1 = prop1_check_coeffs(s, gshell, eth.eps_measured, states);
          cell.prop1_applicable = true;
        }
      } catch (const SpecError& e) {
        cell.note = e.what();  // e.g. empty global window at a sweep edge
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

AuditResult theorem1_audit(const Session& s, const thermo::ThermoProfile& profile,
                           const AuditConfig& config) {
  if (!profile.has_valid_range()) {
    throw SpecError("theorem1_audit: bath profile has no valid range");
  }
  double emin = config.emin, emax = config.emax;
  if (emin == 0.0 && emax == 0.0) {
    emin = profile.valid_min();
    emax = profile.valid_max();
  }
  if (emin < profile.valid_min() || emax > profile.valid_max() || emin >= emax) {
    throw SpecError("theorem1_audit: region must lie inside the bath valid range");
  }

  AuditResult result;
  result.constants =
      thermo::theorem1_constants(profile, emin, emax, s.d_s(), s.model().norm_hc);
  const double delta = result.constants.delta;
  const double delta_b = 2.0 * delta;  // Appendix pairing: E at midpoint, DeltaB = 2 Delta

  // kernel-width sensitivity of the constants
  {
    const auto& be = s.bath().energies;
    for (double factor : {0.5, 2.0}) {
      try {
        const auto alt = thermo::thermo_profile(be, profile.kernel_width * factor,
                                                profile.grid.size());
        if (alt.has_valid_range()) {
          const double lo = std::max(emin, alt.valid_min());
          const double hi = std::min(emax, alt.valid_max());
          if (lo < hi) {
            const auto c = thermo::theorem1_constants(alt, lo, hi, s.d_s(),
                                                      s.model().norm_hc);
            (factor < 1.0 ? result.eps_eth_kernel_low : result.eps_eth_kernel_high) =
                c.eps_eth;
          }
        }
      } catch (const Error&) {
        // sensitivity probe is best-effort
      }
    }
  }

  result.eth = eth_scan(s, emin, emax, delta);
  result.eth_pred = result.constants.eps_eth;
  result.eth_measured = result.eth.eps_measured;

  // (ii)-(iii): bins over pair midpoints; per bin run the Definition-1 probe at
  // (E, DeltaB = 2 Delta) and the per-eigenstate bounds on the window
  const int bins = std::max(1, config.e_bins);
  s.tau().build_all();
  for (int b = 0; b < bins; ++b) {
    const double e_center = emin + (emax - emin) * (b + 0.5) / bins;
    AuditPairBin bin;
    bin.e_center = e_center;
    const EnergyShell shell =
        shells::make_shell(s.bath().energies, e_center, delta_b, shells::Tag::bath);
    bin.shell_empty = shell.empty();
    bin.eps_required =
        thermo::precision_condition(profile, e_center, delta_b, s.model().norm_hc);
    if (!bin.shell_empty) try {
      SamplerBudget budget = config.budget;
      budget.seed = derive_seed(config.budget.seed, 0x60000 + static_cast<std::uint64_t>(b));
      const DensityMatrix omega =
          config.omega_variant == OmegaVariant::canonical_reduced
              ? omega_builder(s, profile, e_center, config.omega_variant, 0.0)
              : omega_builder(s, profile, e_center,
                              OmegaVariant::microcanonical_reduced,
                              config.omega_shell_width > 0.0 ? config.omega_shell_width
                                                             : delta,
                              config.omega_offset);
      const ThermReport therm = therm_scan(s, shell, omega, budget);
      bin.eps_product = therm.eps_product;
      bin.cell_ideal = therm.eps_product <= bin.eps_required * (1.0 + 1e-9) + 1e-12;

      const auto bounds = eigenstate_bound_check(s, shell, omega, therm.eps_product);
      bin.window_states = bounds.size();
      for (const auto& eb : bounds) {
        bin.max_state_dist = std::max(bin.max_state_dist, eb.lhs);
        if (!eb.eq7.holds) ++bin.eq7_violations;
        if (!eb.eq8.holds) ++bin.eq8_violations;
      }

      // triangle identity over pairs whose midpoint falls in this bin
      const double bin_lo = emin + (emax - emin) * b / bins;
      const double bin_hi = emin + (emax - emin) * (b + 1.0) / bins;
      const auto& energies = s.sd().energies;
      for (Eigen::Index n = 0; n < s.sd().dim(); ++n) {
        if (energies(n) < emin || energies(n) > emax) continue;
        for (Eigen::Index m = n + 1; m < s.sd().dim(); ++m) {
          if (energies(m) - energies(n) > 2.0 * delta) break;
          if (energies(m) > emax) break;
          const double mid = 0.5 * (energies(n) + energies(m));
          if (mid < bin_lo || mid >= bin_hi) continue;
          const double lhs = trace_norm_h(s.tau().tau(m) - s.tau().tau(n));
          const double via_omega = trace_norm_h(s.tau().tau(m) - omega.rho) +
                                   trace_norm_h(s.tau().tau(n) - omega.rho);
          if (lhs > via_omega + 1e-9) result.triangle_ok = false;
        }
      }
    } catch (const SpecError&) {
      bin.shell_empty = true;  // treat an unusable window as a recorded gap
    }
    result.bins.push_back(std::move(bin));
  }

  // (iv): Definition-2 probe on an (E, DeltaB) grid at the Eq. (3) equality level
  const int dpoints = std::max(1, config.deltab_points);
  const double span = profile.grid(profile.grid.size() - 1) - profile.grid(0);
  const double db_lo = std::max(2.0 * profile.kernel_width, span * 0.01);
  const double db_hi = span / 4.0;
  bool all_ideal = true;
  bool any_cell = false;
  for (int b = 0; b < bins; ++b) {
    const double e_center = emin + (emax - emin) * (b + 0.5) / bins;
    for (int j = 0; j < dpoints; ++j) {
      const double t = dpoints == 1 ? 0.5 : static_cast<double>(j) / (dpoints - 1);
      const double db = db_lo * std::pow(db_hi / db_lo, t);
      IdealityCell cell;
      cell.e = e_center;
      cell.delta_b = db;
      cell.eps_required =
          thermo::precision_condition(profile, e_center, db, s.model().norm_hc);
      const EnergyShell shell =
          shells::make_shell(s.bath().energies, e_center, db, shells::Tag::bath);
      cell.shell_empty = shell.empty();
      if (!cell.shell_empty) try {
        SamplerBudget budget = config.budget;
        budget.seed = derive_seed(config.budget.seed,
                                  0x70000 + static_cast<std::uint64_t>(b) * 100 +
                                      static_cast<std::uint64_t>(j));
        const DensityMatrix omega =
            config.omega_variant == OmegaVariant::canonical_reduced
                ? omega_builder(s, profile, e_center, config.omega_variant, 0.0)
                : omega_builder(s, profile, e_center,
                                OmegaVariant::microcanonical_reduced, db / 2.0,
                                config.omega_offset);
        const ThermReport therm = therm_scan(s, shell, omega, budget);
        cell.eps_product = therm.eps_product;
        cell.ideal = therm.eps_product <= cell.eps_required * (1.0 + 1e-9) + 1e-12;
        cell.lemma1 = lemma1_check(therm, s.d_s());
        any_cell = true;
        if (!cell.ideal) all_ideal = false;
      } catch (const SpecError&) {
        cell.shell_empty = true;
      }
      result.ideality.push_back(std::move(cell));
    }
  }
  result.bath_ideal = any_cell && all_ideal;
  return result;
}

// ---------------------------------------------------------------------------

EvolveReport evolve_distances(const Session& s, const DensityMatrix& rho0,
                              const std::vector<double>& times) {
  EvolveReport report;
  report.times = times;
  const DensityMatrix eq = spectral::equilibrium_state(rho0, s.sd(), s.tau());
  const auto traj = spectral::evolve_reduced(rho0, s.sd(), times);
  report.distances.resize(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    report.distances[i] = trace_norm_h(traj[i] - eq.rho);
  }
  return report;
}

}  // namespace ethlab::analysis
