#include "core/shells.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace ethlab::shells {

const char* tag_name(Tag t) { return t == Tag::bath ? "bath" : "global"; }

EnergyShell make_shell(const RealVector& spectrum, double center,
                       double half_width, Tag tag) {
  if (!(half_width > 0.0)) {
    throw SpecError("make_shell: half-width must be > 0");
  }
  EnergyShell shell{tag, center, half_width, {}};
  const double lo = center - half_width;
  const double hi = center + half_width;
  const double* begin = spectrum.data();
  const double* end = begin + spectrum.size();
  const double* first = std::lower_bound(begin, end, lo);
  const double* last = std::upper_bound(begin, end, hi);
  shell.indices.reserve(static_cast<std::size_t>(last - first));
  for (const double* it = first; it != last; ++it) {
    shell.indices.push_back(static_cast<Eigen::Index>(it - begin));
  }
  return shell;
}

BathSpectral diagonalize_bath(const models::SplitHamiltonian& h) {
  auto [values, vectors] = hilbert::eigh(h.h_bath, "diagonalize_bath");
  return BathSpectral{std::move(values), std::move(vectors)};
}

Matrix shell_projector_global(const SpectralData& sd, const EnergyShell& shell) {
  if (shell.tag != Tag::global) {
    throw SpecError("shell_projector_global: expected a global-tagged shell");
  }
  const Eigen::Index d = sd.dim();
  Matrix p = Matrix::Zero(d, d);
  for (Eigen::Index n : shell.indices) {
    p.noalias() += sd.eigenvectors.col(n) * sd.eigenvectors.col(n).adjoint();
  }
  return p;
}

Matrix bath_shell_embedding(const BathSpectral& bath, const EnergyShell& shell,
                            const SpaceShape& shape) {
  if (shell.tag != Tag::bath) {
    throw SpecError("bath_shell_embedding: expected a bath-tagged shell");
  }
  const Eigen::Index db = shape.d_b;
  Matrix pb = Matrix::Zero(db, db);
  for (Eigen::Index k : shell.indices) {
    pb.noalias() += bath.vectors.col(k) * bath.vectors.col(k).adjoint();
  }
  return hilbert::tensor_product(hilbert::identity(shape.d_s), pb);
}

DensityMatrix microcanonical_reduced(const SpectralData& sd, const TauCache& tau,
                                     const EnergyShell& shell) {
  if (shell.tag != Tag::global) {
    throw SpecError("microcanonical_reduced: expected a global-tagged shell");
  }
  if (shell.empty()) {
    throw SpecError("microcanonical_reduced: shell is empty");
  }
  tau.build_all();
  // summation over a sorted copy keeps the result independent of the
  // caller's index enumeration order
  std::vector<Eigen::Index> order = shell.indices;
  std::sort(order.begin(), order.end());
  Matrix acc = Matrix::Zero(sd.shape.d_s, sd.shape.d_s);
  for (Eigen::Index n : order) {
    acc += tau.tau(n);
  }
  acc /= static_cast<double>(order.size());
  return DensityMatrix{hilbert::Space::system, sd.shape, std::move(acc)};
}

BoundReport leakage_bound_check(const Matrix& a1, const Matrix& a2,
                                double lambda, double delta1, double delta2,
                                const DensityMatrix& rho) {
  if (!(delta1 > 0.0)) {
    throw SpecError("leakage_bound_check: delta1 must be > 0");
  }
  if (delta2 < 0.0) {
    throw SpecError("leakage_bound_check: delta2 must be >= 0");
  }
  hilbert::require_hermitian(a1, "leakage_bound_check(A1)");
  hilbert::require_hermitian(a2, "leakage_bound_check(A2)");
  if (a1.rows() != a2.rows() || a1.rows() != rho.dim()) {
    throw SpecError("leakage_bound_check: dimension mismatch");
  }

  const auto e1 = hilbert::eigh(a1, "leakage_bound_check(A1)");
  const auto e2 = hilbert::eigh(a2, "leakage_bound_check(A2)");

  // support precondition: rho lives in the delta2-shell of A2 around lambda
  double support_residual = 0.0;
  for (Eigen::Index k = 0; k < e2.values.size(); ++k) {
    if (std::abs(e2.values(k) - lambda) <= delta2) continue;
    const auto vk = e2.vectors.col(k);
    support_residual += (vk.adjoint() * rho.rho * vk)(0, 0).real();
  }
  if (support_residual > 1e-10) {
    std::ostringstream os;
    os << "leakage_bound_check: state has weight " << support_residual
       << " outside the A2 shell; the bound is not claimed";
    throw SpecError(os.str());
  }

  double lhs = 0.0;  // Tr(rho Q), Q complement of A1's shell
  for (Eigen::Index k = 0; k < e1.values.size(); ++k) {
    if (std::abs(e1.values(k) - lambda) <= delta1) continue;
    const auto vk = e1.vectors.col(k);
    lhs += (vk.adjoint() * rho.rho * vk)(0, 0).real();
  }
  const double diff_norm = hilbert::operator_norm(a1 - a2);
  const double rhs = std::pow((diff_norm + delta2) / delta1, 2.0);

  return make_bound("lemma2_leakage", lhs, rhs,
                    {{"lambda", lambda},
                     {"delta1", delta1},
                     {"delta2", delta2},
                     {"norm_a1_minus_a2", diff_norm},
                     {"support_residual", support_residual}},
                    1e-10);
}

BathOverlapTable::BathOverlapTable(const SpectralData& sd, const BathSpectral& bath)
    : sd_(&sd), bath_(&bath) {
  const Eigen::Index ds = sd.shape.d_s, db = sd.shape.d_b, d = sd.dim();
  g_.resize(d, d);
  // g(s*d_B + k, n) = <s,k|n> = sum_b conj(U_B(b,k)) V(s*d_B + b, n)
  for (Eigen::Index s = 0; s < ds; ++s) {
    g_.middleRows(s * db, db).noalias() =
        bath.vectors.adjoint() * sd.eigenvectors.middleRows(s * db, db);
  }
  prefix_.resize(static_cast<std::size_t>(ds));
  for (Eigen::Index s = 0; s < ds; ++s) {
    Eigen::MatrixXd& pre = prefix_[static_cast<std::size_t>(s)];
    pre.setZero(db + 1, d);
    for (Eigen::Index k = 0; k < db; ++k) {
      pre.row(k + 1) = pre.row(k) + g_.row(s * db + k).cwiseAbs2();
    }
  }
}

double BathOverlapTable::leakage(const EnergyShell& shell, Eigen::Index n) const {
  if (shell.tag != Tag::bath) {
    throw SpecError("leakage: expected a bath-tagged shell");
  }
  if (n < 0 || n >= sd_->dim()) {
    throw SpecError("leakage: eigenstate index out of range");
  }
  double inside = 0.0;
  if (!shell.empty()) {
    // bath shell indices are contiguous in the sorted bath spectrum
    const Eigen::Index k0 = shell.indices.front();
    const Eigen::Index k1 = shell.indices.back();
    for (const auto& pre : prefix_) {
      inside += pre(k1 + 1, n) - pre(k0, n);
    }
  }
  return std::clamp(1.0 - inside, 0.0, 1.0);
}

double eigenstate_leakage(const SpectralData& sd, const BathOverlapTable& table,
                          const EnergyShell& bath_shell, Eigen::Index n) {
  (void)sd;
  return table.leakage(bath_shell, n);
}

nlohmann::json write_shell_report(const std::filesystem::path& dir,
                                  const std::string& stem, const EnergyShell& shell,
                                  Eigen::Index inline_limit) {
  nlohmann::json report{{"tag", tag_name(shell.tag)},
                        {"E", shell.center},
                        {"delta", shell.half_width},
                        {"count", shell.count()}};
  if (shell.count() <= inline_limit) {
    report["indices"] = shell.indices;
  } else {
    const std::string sidecar = stem + ".indices.u32";
    std::ofstream out(dir / sidecar, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw SpecError("write_shell_report: cannot open " + (dir / sidecar).string());
    }
    for (Eigen::Index idx : shell.indices) {
      const auto v = static_cast<std::uint32_t>(idx);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    report["indices_path"] = sidecar;
  }
  std::ofstream out(dir / (stem + ".json"), std::ios::binary | std::ios::trunc);
  if (!out) {
    throw SpecError("write_shell_report: cannot open " + (dir / (stem + ".json")).string());
  }
  out << report.dump(2) << "\n";
  return report;
}

}  // namespace ethlab::shells
