#include "core/shells.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace ethlab;
using namespace ethlab::shells;
using hilbert::Complex;
using hilbert::Matrix;
using hilbert::RealVector;
using hilbert::Space;
using hilbert::Vector;
using oracles::Rng;

namespace {

models::SplitHamiltonian default_model(int sys, int bath, std::uint64_t seed = 12345) {
  models::ModelSpec spec;
  spec.family = models::Family::transverse_ising;
  spec.sys_sites = sys;
  spec.bath_sites = bath;
  spec.couplings = models::Couplings{1.0, 1.0, 0.9055, 0.5, 0.4};
  spec.disorder = models::DisorderSpec{seed, 1e-3};
  return models::build_hamiltonian(spec);
}

}  // namespace

TEST_CASE("make_shell uses inclusive windows") {
  RealVector spectrum(5);
  spectrum << 0, 1, 2, 3, 4;
  const auto shell = make_shell(spectrum, 2.0, 1.0, Tag::bath);
  CHECK(shell.indices == std::vector<Eigen::Index>{1, 2, 3});

  const auto all = make_shell(spectrum, 2.0, 10.0, Tag::bath);
  CHECK(all.count() == 5);

  const auto none = make_shell(spectrum, 10.0, 0.5, Tag::bath);
  CHECK(none.empty());
  CHECK_THROWS_AS(make_shell(spectrum, 0.0, 0.0, Tag::bath), SpecError);
}

TEST_CASE("shell monotonicity in the half-width") {
  Rng rng(3);
  RealVector spectrum(200);
  for (Eigen::Index i = 0; i < 200; ++i) spectrum(i) = rng.normal() * 3.0;
  std::sort(spectrum.data(), spectrum.data() + 200);
  for (int trial = 0; trial < 50; ++trial) {
    const double e = rng.uniform(-3, 3);
    const double d1 = rng.uniform(0.01, 1.0);
    const double d2 = d1 + rng.uniform(0.0, 1.0);
    const auto small = make_shell(spectrum, e, d1, Tag::bath);
    const auto large = make_shell(spectrum, e, d2, Tag::bath);
    CHECK(std::includes(large.indices.begin(), large.indices.end(),
                        small.indices.begin(), small.indices.end()));
  }
}

TEST_CASE("shell count matches the direct counting oracle on the default bath") {
  const auto h = default_model(1, 7);
  const auto bath = diagonalize_bath(h);
  const std::vector<double> values(bath.energies.data(),
                                   bath.energies.data() + bath.energies.size());
  const double median = values[values.size() / 2];
  // pick a width that captures about a tenth of the bath spectrum
  const double span = values.back() - values.front();
  const double delta = span * 0.05;
  const auto shell = make_shell(bath.energies, median, delta, Tag::bath);
  CHECK(static_cast<std::size_t>(shell.count()) ==
        oracles::count_in_window(values, median - delta, median + delta));
  CHECK(shell.count() > 0);
}

TEST_CASE("microcanonical_reduced: singleton, full spectrum, projector oracle") {
  const auto h = default_model(1, 5);
  const auto sd = spectral::diagonalize(h);
  spectral::TauCache tau(sd);

  SUBCASE("singleton shell returns tau_n") {
    const double en = sd.energies(10);
    const auto shell = make_shell(sd.energies, en, 1e-9, Tag::global);
    REQUIRE(shell.count() == 1);
    const auto mc = microcanonical_reduced(sd, tau, shell);
    CHECK(hilbert::max_abs(mc.rho - tau.tau(10)) < 1e-14);
  }

  SUBCASE("full-spectrum shell gives the maximally mixed system state") {
    const auto shell = make_shell(sd.energies, 0.0, 1e6, Tag::global);
    REQUIRE(shell.count() == sd.dim());
    const auto mc = microcanonical_reduced(sd, tau, shell);
    CHECK(hilbert::max_abs(mc.rho - Matrix::Identity(2, 2) / 2.0) < 1e-12);
  }

  SUBCASE("mid-spectrum shell equals Tr_B(P)/Tr(P) via the projector matrix") {
    const double median = sd.energies(sd.dim() / 2);
    const auto shell = make_shell(sd.energies, median, 0.5, Tag::global);
    REQUIRE(shell.count() >= 2);
    const Matrix p = shell_projector_global(sd, shell);
    const Matrix ref = hilbert::partial_trace_bath(p, sd.shape) /
                       static_cast<double>(shell.count());
    const auto mc = microcanonical_reduced(sd, tau, shell);
    CHECK(hilbert::eigh_values(mc.rho - ref, "test").cwiseAbs().sum() <= 1e-11);
  }

  SUBCASE("empty shell is an error for downstream consumers") {
    const auto shell = make_shell(sd.energies, 1e6, 1.0, Tag::global);
    CHECK(shell.empty());
    CHECK_THROWS_AS(microcanonical_reduced(sd, tau, shell), SpecError);
  }

  SUBCASE("average is invariant under shell index order") {
    const double median = sd.energies(sd.dim() / 2);
    auto shell = make_shell(sd.energies, median, 0.5, Tag::global);
    auto shuffled = shell;
    std::reverse(shuffled.indices.begin(), shuffled.indices.end());
    const auto a = microcanonical_reduced(sd, tau, shell);
    const auto b = microcanonical_reduced(sd, tau, shuffled);
    CHECK(hilbert::max_abs(a.rho - b.rho) == 0.0);
  }
}

TEST_CASE("bath_shell_embedding: projector algebra and rank") {
  const auto h = default_model(1, 4);
  const auto sd = spectral::diagonalize(h);
  const auto bath = diagonalize_bath(h);

  const double mid = bath.energies(bath.energies.size() / 2);
  const auto shell = make_shell(bath.energies, mid, 1.0, Tag::bath);
  REQUIRE(!shell.empty());
  const Matrix p = bath_shell_embedding(bath, shell, sd.shape);
  const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;

  CHECK(hilbert::max_abs(p * p - p) < 1e-10);
  CHECK(hilbert::max_abs(p * q) < 1e-10);
  CHECK(std::abs(p.trace().real() - static_cast<double>(sd.shape.d_s * shell.count())) < 1e-10);

  SUBCASE("full bath shell embeds to the identity") {
    const auto full = make_shell(bath.energies, 0.0, 1e9, Tag::bath);
    const Matrix pf = bath_shell_embedding(bath, full, sd.shape);
    CHECK(hilbert::max_abs(pf - Matrix::Identity(pf.rows(), pf.cols())) < 1e-12);
  }

  SUBCASE("in-shell product states have zero complement weight") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      Vector psi = oracles::random_state(rng, sd.shape.d_s);
      // random bath vector inside the shell span
      Vector phi = Vector::Zero(sd.shape.d_b);
      Vector coeff = oracles::random_state(rng, shell.count());
      for (Eigen::Index j = 0; j < shell.count(); ++j) {
        phi += coeff(j) * bath.vectors.col(shell.indices[j]);
      }
      Vector chi(sd.shape.total());
      for (Eigen::Index s = 0; s < sd.shape.d_s; ++s) {
        chi.segment(s * sd.shape.d_b, sd.shape.d_b) = psi(s) * phi;
      }
      const double leak = (chi.adjoint() * q * chi)(0, 0).real();
      CHECK(std::abs(leak) < 1e-12);
    }
  }
}

TEST_CASE("leakage_bound_check: identical operators and shifted operators") {
  Rng rng(21);
  const Matrix a2 = oracles::random_hermitian(rng, 8);
  const auto eig = hilbert::eigh(a2, "test");
  const double lambda = eig.values(3);

  SUBCASE("A1 = A2, eigenstate at lambda, delta2 -> 0") {
    Matrix rho = eig.vectors.col(3) * eig.vectors.col(3).adjoint();
    const auto report = leakage_bound_check(
        a2, a2, lambda, 0.5, 0.0,
        hilbert::DensityMatrix{Space::global, {2, 4}, rho});
    CHECK(report.lhs <= 1e-12);
    CHECK(report.rhs == doctest::Approx(0.0));
    CHECK(report.holds);
  }

  SUBCASE("A1 = A2 + c with |c| < delta1") {
    const double c = 0.3;
    const Matrix a1 = a2 + c * Matrix::Identity(8, 8);
    Matrix rho = eig.vectors.col(3) * eig.vectors.col(3).adjoint();
    const auto report = leakage_bound_check(
        a1, a2, lambda, 1.0, 0.0,
        hilbert::DensityMatrix{Space::global, {2, 4}, rho});
    CHECK(report.lhs <= 1e-12);  // shifted shell still contains the state
    CHECK(report.rhs == doctest::Approx(c * c));
    CHECK(report.holds);
  }

  SUBCASE("support precondition is enforced") {
    Matrix rho = Matrix::Identity(8, 8) / 8.0;  // full support
    CHECK_THROWS_AS(leakage_bound_check(
                        a2, a2, lambda, 0.5, 1e-6,
                        hilbert::DensityMatrix{Space::global, {2, 4}, rho}),
                    SpecError);
  }
}

TEST_CASE("Eq. (dd) randomized audit: 300 instances, zero violations") {
  Rng rng(2024);
  int done = 0;
  while (done < 300) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(rng.index(13));  // up to 16
    const Matrix a2 = oracles::random_hermitian(rng, n);
    const Matrix a1 = a2 + rng.uniform(0.0, 1.0) * oracles::random_hermitian(rng, n);
    const auto e2 = hilbert::eigh(a2, "test");
    const double lambda = e2.values(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    const double delta2 = rng.uniform(0.05, 1.0);
    const double delta1 = rng.uniform(0.1, 3.0);

    // rho: random mixture of A2 eigenvectors inside [lambda - delta2, lambda + delta2]
    std::vector<Eigen::Index> in;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(e2.values(k) - lambda) <= delta2) in.push_back(k);
    }
    if (in.empty()) continue;
    Matrix rho = Matrix::Zero(n, n);
    double total = 0.0;
    std::vector<double> w(in.size());
    for (auto& x : w) {
      x = rng.uniform(0.0, 1.0);
      total += x;
    }
    for (std::size_t k = 0; k < in.size(); ++k) {
      rho += (w[k] / total) * e2.vectors.col(in[k]) * e2.vectors.col(in[k]).adjoint();
    }
    const auto report = leakage_bound_check(
        a1, a2, lambda, delta1, delta2,
        hilbert::DensityMatrix{Space::global, {2, n / 2}, rho});
    CHECK(report.holds);
    ++done;
  }
}

TEST_CASE("eigenstate_leakage: decoupled zero case and [0, 1] range") {
  // decoupled: g = 0 and h_S = 0 -> every eigenstate factorizes |s> (x) |k>;
  // the bath factor is an exact H_B eigenvector, so a state leaks iff that
  // eigenvector sits outside the shell
  models::ModelSpec spec;
  spec.family = models::Family::transverse_ising;
  spec.sys_sites = 1;
  spec.bath_sites = 4;
  spec.couplings = models::Couplings{1.0, 1.0, 0.9055, 0.0, 0.0};
  spec.disorder = models::DisorderSpec{9, 1e-3};
  const auto h = models::build_hamiltonian(spec);
  const auto sd = spectral::diagonalize(h);
  const auto bath = diagonalize_bath(h);
  const BathOverlapTable table(sd, bath);

  // bath-energy expectation identifies each eigenstate's bath factor
  Matrix hb_embedded = Matrix::Zero(sd.dim(), sd.dim());
  for (Eigen::Index s = 0; s < sd.shape.d_s; ++s) {
    hb_embedded.block(s * sd.shape.d_b, s * sd.shape.d_b, sd.shape.d_b,
                      sd.shape.d_b) = h.h_bath;
  }
  const double mid = bath.energies(bath.energies.size() / 2);
  const double delta_b = 1.0;
  const auto shell = make_shell(bath.energies, mid, delta_b, Tag::bath);
  REQUIRE(!shell.empty());
  REQUIRE(shell.count() < bath.energies.size());

  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    const double leak = eigenstate_leakage(sd, table, shell, n);
    CHECK(leak >= 0.0);
    CHECK(leak <= 1.0);
    const auto v = sd.eigenvectors.col(n);
    const double bath_energy = (v.adjoint() * hb_embedded * v)(0, 0).real();
    if (std::abs(bath_energy - mid) <= delta_b - 1e-9) {
      CHECK(leak <= 1e-10);  // factorized in-shell eigenstates never leak
    } else if (std::abs(bath_energy - mid) > delta_b + 1e-9) {
      CHECK(leak >= 1.0 - 1e-10);  // fully outside
    }
  }
}

TEST_CASE("eigenstate_leakage against the Lemma-2 formula audit") {
  const auto h = default_model(1, 6);
  const auto sd = spectral::diagonalize(h);
  const auto bath = diagonalize_bath(h);
  const BathOverlapTable table(sd, bath);

  const double mid = bath.energies(bath.energies.size() / 2);
  const double delta_b = 2.0;
  const auto shell = make_shell(bath.energies, mid, delta_b, Tag::bath);
  REQUIRE(!shell.empty());

  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    if (std::abs(sd.energies(n) - mid) > delta_b / 2.0) continue;
    const double leak = eigenstate_leakage(sd, table, shell, n);
    // Lemma 2 with A1 = H, A2 = I (x) H_B, lambda = E_n: minimize over the
    // Delta1 grid; every grid value is a valid upper bound
    double best = 2.0;
    for (double d1 : {delta_b / 2.0, delta_b, 2.0 * delta_b}) {
      // state |n> sits at E_n; the bath shell at (mid, delta_b) contains it
      // with Delta2 measured from lambda = E_n
      const double delta2 = delta_b + std::abs(sd.energies(n) - mid);
      best = std::min(best, std::pow((h.norm_hc + delta2) / d1, 2.0));
    }
    CHECK(leak <= best + 1e-9);
  }
}

TEST_CASE("shell reports: inline indices for small shells, u32 sidecar for large") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ethlab_shell_report_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  RealVector spectrum(300);
  for (Eigen::Index i = 0; i < 300; ++i) spectrum(i) = 0.01 * static_cast<double>(i);

  SUBCASE("small shell stays inline") {
    const auto shell = make_shell(spectrum, 0.5, 0.05, Tag::bath);
    REQUIRE(shell.count() <= 64);
    const auto report = write_shell_report(dir, "small", shell);
    CHECK(report.at("tag") == "bath");
    CHECK(report.contains("indices"));
    CHECK(!report.contains("indices_path"));
    CHECK(report.at("indices").size() == static_cast<std::size_t>(shell.count()));
  }

  SUBCASE("large shell goes to the sidecar") {
    const auto shell = make_shell(spectrum, 1.5, 1.0, Tag::bath);
    REQUIRE(shell.count() > 64);
    const auto report = write_shell_report(dir, "large", shell);
    CHECK(report.at("indices_path") == "large.indices.u32");
    std::ifstream in(dir / "large.indices.u32", std::ios::binary);
    REQUIRE(in.good());
    std::vector<std::uint32_t> raw(static_cast<std::size_t>(shell.count()));
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(sizeof(std::uint32_t) * raw.size()));
    REQUIRE(in.good());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      CHECK(raw[i] == static_cast<std::uint32_t>(shell.indices[i]));
    }
  }

  fs::remove_all(dir);
}

TEST_CASE("leakage table agrees with the explicit embedded projector") {
  const auto h = default_model(1, 4, 31);
  const auto sd = spectral::diagonalize(h);
  const auto bath = diagonalize_bath(h);
  const BathOverlapTable table(sd, bath);
  const double mid = bath.energies(bath.energies.size() / 2);
  const auto shell = make_shell(bath.energies, mid, 1.3, Tag::bath);
  REQUIRE(!shell.empty());
  const Matrix p = bath_shell_embedding(bath, shell, sd.shape);
  const Matrix q = Matrix::Identity(p.rows(), p.cols()) - p;
  for (Eigen::Index n = 0; n < sd.dim(); n += 3) {
    const auto v = sd.eigenvectors.col(n);
    const double direct = (v.adjoint() * q * v)(0, 0).real();
    CHECK(table.leakage(shell, n) == doctest::Approx(direct).epsilon(1e-10));
  }
}
