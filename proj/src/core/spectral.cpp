#include "core/spectral.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/parallel.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "spectral cache files are little-endian");

namespace ethlab::spectral {

using nlohmann::json;

bool SpectralData::degenerate() const {
  for (const auto& c : degeneracy_classes) {
    if (c.size() > 1) return true;
  }
  return false;
}

void SpectralData::check_invariants(const Matrix& h, const Tolerances& tol) const {
  for (Eigen::Index n = 1; n < dim(); ++n) {
    if (energies(n) < energies(n - 1)) {
      throw NumericError("SpectralData: energies are not ascending");
    }
  }
  const Matrix gram = eigenvectors.adjoint() * eigenvectors;
  const double ortho = hilbert::max_abs(gram - Matrix::Identity(dim(), dim()));
  if (ortho > tol.orthonormality) {
    std::ostringstream os;
    os << "SpectralData: orthonormality residual " << ortho;
    throw NumericError(os.str());
  }
  const Matrix resid = h * eigenvectors - eigenvectors * energies.asDiagonal();
  const double worst = resid.colwise().norm().maxCoeff();
  if (worst > tol.eigen_residual * std::max(1.0, h_norm)) {
    std::ostringstream os;
    os << "SpectralData: eigen-residual " << worst << " exceeds "
       << tol.eigen_residual * std::max(1.0, h_norm);
    throw NumericError(os.str());
  }
}

namespace {

void fix_gauge(Matrix& vectors) {
  for (Eigen::Index n = 0; n < vectors.cols(); ++n) {
    Eigen::Index r = 0;
    vectors.col(n).cwiseAbs().maxCoeff(&r);
    const Complex v = vectors(r, n);
    const double mag = std::abs(v);
    if (mag > 0) vectors.col(n) *= std::conj(v) / mag;
  }
}

std::vector<std::vector<Eigen::Index>> group_degeneracies(
    const RealVector& energies, double gap_tol) {
  std::vector<std::vector<Eigen::Index>> classes;
  for (Eigen::Index n = 0; n < energies.size(); ++n) {
    if (n == 0 || energies(n) - energies(n - 1) > gap_tol) {
      classes.emplace_back();
    }
    classes.back().push_back(n);
  }
  return classes;
}

}  // namespace

SpectralData diagonalize(const models::SplitHamiltonian& h, const Tolerances& tol) {
  SpectralData sd;
  sd.shape = h.shape;
  sd.model_hash = h.spec.content_hash();

  auto [values, vectors] = hilbert::eigh(h.h_total, "diagonalize");
  sd.energies = std::move(values);
  sd.eigenvectors = std::move(vectors);
  fix_gauge(sd.eigenvectors);
  sd.h_norm = sd.energies.size() ? sd.energies.cwiseAbs().maxCoeff() : 0.0;

  const double gap_tol = tol.degeneracy * std::max(1.0, sd.h_norm);
  sd.degeneracy_classes = group_degeneracies(sd.energies, gap_tol);
  sd.class_of.assign(sd.dim(), 0);
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(sd.degeneracy_classes.size()); ++c) {
    for (Eigen::Index n : sd.degeneracy_classes[c]) sd.class_of[n] = c;
  }

  sd.check_invariants(h.h_total, tol);
  return sd;
}

namespace {

Matrix reduce_pair(const SpectralData& sd, Eigen::Index n, Eigen::Index m) {
  const Eigen::Index ds = sd.shape.d_s, db = sd.shape.d_b;
  Matrix t = Matrix::Zero(ds, ds);
  const auto vn = sd.eigenvectors.col(n);
  const auto vm = sd.eigenvectors.col(m);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index sp = 0; sp < ds; ++sp) {
      Complex acc(0, 0);
      for (Eigen::Index b = 0; b < db; ++b) {
        acc += vn(s * db + b) * std::conj(vm(sp * db + b));
      }
      t(s, sp) = acc;
    }
  }
  return t;
}

}  // namespace

void TauCache::build_all() const {
  std::call_once(once_, [this] {
    const Eigen::Index d = sd_->dim();
    taus_.resize(d);
    parallel_for(static_cast<std::size_t>(d), [this](std::size_t n) {
      taus_[n] = reduce_pair(*sd_, static_cast<Eigen::Index>(n),
                             static_cast<Eigen::Index>(n));
    });
    built_ = true;
  });
}

const Matrix& TauCache::tau(Eigen::Index n) const {
  if (n < 0 || n >= sd_->dim()) {
    throw SpecError("TauCache: eigenstate index out of range");
  }
  build_all();
  return taus_[n];
}

Matrix TauCache::tau_cross(Eigen::Index n, Eigen::Index m) const {
  if (n < 0 || m < 0 || n >= sd_->dim() || m >= sd_->dim()) {
    throw SpecError("TauCache: eigenstate index out of range");
  }
  return reduce_pair(*sd_, n, m);
}

DensityMatrix eigenstate_reduced(const SpectralData& sd, Eigen::Index n) {
  if (n < 0 || n >= sd.dim()) {
    throw SpecError("eigenstate_reduced: eigenstate index out of range");
  }
  return DensityMatrix{hilbert::Space::system, sd.shape, reduce_pair(sd, n, n)};
}

namespace {

DiagonalEnsemble dephase_impl(const SpectralData& sd,
                              const std::function<Complex(Eigen::Index, Eigen::Index)>& overlap) {
  DiagonalEnsemble ens;
  ens.p.resize(sd.dim());
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    ens.p(n) = overlap(n, n).real();
  }
  for (const auto& cls : sd.degeneracy_classes) {
    if (cls.size() < 2) continue;
    ens.degenerate = true;
    DiagonalEnsemble::Block blk;
    blk.indices = cls;
    const Eigen::Index k = static_cast<Eigen::Index>(cls.size());
    blk.coeff.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        blk.coeff(a, b) = overlap(cls[a], cls[b]);
      }
    }
    ens.blocks.push_back(std::move(blk));
  }
  return ens;
}

}  // namespace

DiagonalEnsemble dephase(const DensityMatrix& rho, const SpectralData& sd) {
  if (rho.space != hilbert::Space::global || rho.dim() != sd.dim()) {
    throw SpecError("dephase: state does not live on the diagonalized space");
  }
  // columns <n|rho, then p_n = (<n|rho)|n>
  const Matrix rv = rho.rho * sd.eigenvectors;
  return dephase_impl(sd, [&](Eigen::Index n, Eigen::Index m) {
    return sd.eigenvectors.col(n).dot(rv.col(m));
  });
}

DiagonalEnsemble dephase(const PureState& psi, const SpectralData& sd) {
  if (psi.space != hilbert::Space::global || psi.amps.size() != sd.dim()) {
    throw SpecError("dephase: state does not live on the diagonalized space");
  }
  const Vector a = sd.eigenvectors.adjoint() * psi.amps;
  return dephase_coeffs(a, sd);
}

DiagonalEnsemble dephase_coeffs(const Vector& a, const SpectralData& sd) {
  if (a.size() != sd.dim()) {
    throw SpecError("dephase_coeffs: coefficient vector has wrong length");
  }
  return dephase_impl(sd, [&](Eigen::Index n, Eigen::Index m) {
    return a(n) * std::conj(a(m));
  });
}

DensityMatrix to_global(const DiagonalEnsemble& ens, const SpectralData& sd) {
  Matrix rho = sd.eigenvectors * ens.p.asDiagonal() * sd.eigenvectors.adjoint();
  for (const auto& blk : ens.blocks) {
    const Eigen::Index k = static_cast<Eigen::Index>(blk.indices.size());
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        if (a == b) continue;
        rho += blk.coeff(a, b) * sd.eigenvectors.col(blk.indices[a]) *
               sd.eigenvectors.col(blk.indices[b]).adjoint();
      }
    }
  }
  return DensityMatrix{hilbert::Space::global, sd.shape, std::move(rho)};
}

DensityMatrix equilibrium_from(const DiagonalEnsemble& ens,
                               const SpectralData& sd, const TauCache& tau) {
  tau.build_all();
  const Eigen::Index ds = sd.shape.d_s;
  Matrix acc = Matrix::Zero(ds, ds);
  for (Eigen::Index n = 0; n < sd.dim(); ++n) {
    if (ens.p(n) != 0.0) acc += ens.p(n) * tau.tau(n);
  }
  for (const auto& blk : ens.blocks) {
    const Eigen::Index k = static_cast<Eigen::Index>(blk.indices.size());
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        if (a == b) continue;
        acc += blk.coeff(a, b) * tau.tau_cross(blk.indices[a], blk.indices[b]);
      }
    }
  }
  return DensityMatrix{hilbert::Space::system, sd.shape, std::move(acc)};
}

DensityMatrix equilibrium_state(const DensityMatrix& rho,
                                const SpectralData& sd, const TauCache& tau) {
  return equilibrium_from(dephase(rho, sd), sd, tau);
}

std::vector<Matrix> evolve_reduced(const DensityMatrix& rho0,
                                   const SpectralData& sd,
                                   const std::vector<double>& times) {
  if (rho0.space != hilbert::Space::global || rho0.dim() != sd.dim()) {
    throw SpecError("evolve_reduced: state does not live on the diagonalized space");
  }
  for (double t : times) {
    if (!std::isfinite(t)) throw SpecError("evolve_reduced: times must be finite");
  }
  const Eigen::Index d = sd.dim();
  const Eigen::Index ds = sd.shape.d_s, db = sd.shape.d_b;
  const Matrix rho_eig = sd.eigenvectors.adjoint() * rho0.rho * sd.eigenvectors;

  std::vector<Matrix> out(times.size());

  // Small spaces: precontract the cross reduced matrices T[n,m] so each time
  // point is a d^2 * d_S^2 sum instead of two d^3 rotations.
  const bool precontract = d * d * ds * ds <= (Eigen::Index(1) << 24);
  if (precontract) {
    std::vector<Matrix> cross(static_cast<std::size_t>(d * d));
    parallel_for(static_cast<std::size_t>(d * d), [&](std::size_t idx) {
      const Eigen::Index n = static_cast<Eigen::Index>(idx) / d;
      const Eigen::Index m = static_cast<Eigen::Index>(idx) % d;
      cross[idx] = reduce_pair(sd, n, m);
    });
    parallel_for(times.size(), [&](std::size_t ti) {
      const double t = times[ti];
      Matrix acc = Matrix::Zero(ds, ds);
      for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
          const Complex c = rho_eig(n, m);
          if (c == Complex(0, 0)) continue;
          const double w = (sd.energies(n) - sd.energies(m)) * t;
          acc += (c * Complex(std::cos(w), -std::sin(w))) * cross[n * d + m];
        }
      }
      out[ti] = std::move(acc);
    });
    return out;
  }

  parallel_for(times.size(), [&](std::size_t ti) {
    const double t = times[ti];
    Matrix phased(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
      for (Eigen::Index m = 0; m < d; ++m) {
        const double w = (sd.energies(n) - sd.energies(m)) * t;
        phased(n, m) = rho_eig(n, m) * Complex(std::cos(w), -std::sin(w));
      }
    }
    const Matrix rot = sd.eigenvectors * phased * sd.eigenvectors.adjoint();
    out[ti] = hilbert::partial_trace_bath(rot, sd.shape);
  });
  return out;
}

namespace cache {

namespace {

class DirLock {
public:
  explicit DirLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw SpecError("spectral cache: directory is locked by another writer: " +
                      path_.string());
    }
  }
  ~DirLock() {
    if (fd_ >= 0) ::close(fd_);
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }

private:
  std::filesystem::path path_;
  int fd_ = -1;
};

void write_file(const std::filesystem::path& p, const void* data, std::size_t bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw SpecError("spectral cache: cannot open for writing: " + p.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw SpecError("spectral cache: short write: " + p.string());
}

std::vector<char> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary | std::ios::ate);
  if (!in) throw SpecError("spectral cache: cannot open: " + p.string());
  const std::streamsize bytes = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(bytes));
  in.read(buf.data(), bytes);
  if (!in) throw SpecError("spectral cache: short read: " + p.string());
  return buf;
}

}  // namespace

void save(const std::filesystem::path& dir, const models::ModelSpec& spec,
          const SpectralData& sd, const TauCache* tau) {
  DirLock lock(dir);

  json meta;
  meta["model_hash"] = sd.model_hash;
  meta["d_S"] = sd.shape.d_s;
  meta["d_B"] = sd.shape.d_b;
  meta["d_total"] = sd.shape.total();
  const Tolerances& tol = tols();
  meta["tolerances"] = {{"hermiticity", tol.hermiticity},
                        {"trace", tol.trace},
                        {"positivity", tol.positivity},
                        {"eigen_residual", tol.eigen_residual},
                        {"orthonormality", tol.orthonormality},
                        {"degeneracy", tol.degeneracy}};
  meta["format_version"] = kFormatVersion;
  const std::string meta_text = meta.dump(2) + "\n";
  write_file(dir / "meta.json", meta_text.data(), meta_text.size());

  const std::string spec_text = spec.to_json().dump(2) + "\n";
  write_file(dir / "model.json", spec_text.data(), spec_text.size());

  write_file(dir / "energies.f64", sd.energies.data(),
             sizeof(double) * static_cast<std::size_t>(sd.energies.size()));
  // Eigen complex storage is interleaved re/im doubles, column-major already
  write_file(dir / "eigvecs.c128", sd.eigenvectors.data(),
             sizeof(Complex) * static_cast<std::size_t>(sd.eigenvectors.size()));

  if (tau != nullptr) {
    tau->build_all();
    const Eigen::Index ds = sd.shape.d_s;
    std::vector<Complex> buf;
    buf.reserve(static_cast<std::size_t>(sd.dim() * ds * ds));
    for (Eigen::Index n = 0; n < sd.dim(); ++n) {
      const Matrix& t = tau->tau(n);
      for (Eigen::Index r = 0; r < ds; ++r) {
        for (Eigen::Index c = 0; c < ds; ++c) {
          buf.push_back(t(r, c));  // row-major per matrix
        }
      }
    }
    write_file(dir / "tau.c128", buf.data(), sizeof(Complex) * buf.size());
  }
}

Loaded load(const std::filesystem::path& dir) {
  const auto meta_raw = read_file(dir / "meta.json");
  json meta;
  try {
    meta = json::parse(meta_raw.begin(), meta_raw.end());
  } catch (const json::exception& e) {
    throw SpecError(std::string("spectral cache: bad meta.json: ") + e.what());
  }
  if (meta.at("format_version").get<int>() != kFormatVersion) {
    throw SpecError("spectral cache: unsupported format_version");
  }

  const auto spec_raw = read_file(dir / "model.json");
  Loaded out;
  out.spec = models::ModelSpec::from_json(std::string(spec_raw.begin(), spec_raw.end()));

  const std::string want_hash = meta.at("model_hash").get<std::string>();
  if (out.spec.content_hash() != want_hash) {
    throw SpecError("spectral cache: model.json does not match stored model_hash; "
                    "refusing stale cache");
  }

  SpectralData& sd = out.sd;
  sd.shape = SpaceShape{meta.at("d_S").get<Eigen::Index>(),
                        meta.at("d_B").get<Eigen::Index>()};
  const Eigen::Index d = sd.shape.total();
  if (meta.at("d_total").get<Eigen::Index>() != d) {
    throw SpecError("spectral cache: inconsistent dimensions in meta.json");
  }
  sd.model_hash = want_hash;

  const auto evals = read_file(dir / "energies.f64");
  if (evals.size() != sizeof(double) * static_cast<std::size_t>(d)) {
    throw SpecError("spectral cache: energies.f64 has unexpected size");
  }
  sd.energies.resize(d);
  std::memcpy(sd.energies.data(), evals.data(), evals.size());

  const auto evecs = read_file(dir / "eigvecs.c128");
  if (evecs.size() != sizeof(Complex) * static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
    throw SpecError("spectral cache: eigvecs.c128 has unexpected size");
  }
  sd.eigenvectors.resize(d, d);
  std::memcpy(sd.eigenvectors.data(), evecs.data(), evecs.size());

  sd.h_norm = d > 0 ? sd.energies.cwiseAbs().maxCoeff() : 0.0;
  const double gap_tol = tols().degeneracy * std::max(1.0, sd.h_norm);
  sd.degeneracy_classes = group_degeneracies(sd.energies, gap_tol);
  sd.class_of.assign(sd.dim(), 0);
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(sd.degeneracy_classes.size()); ++c) {
    for (Eigen::Index n : sd.degeneracy_classes[c]) sd.class_of[n] = c;
  }
  return out;
}

}  // namespace cache

}  // namespace ethlab::spectral
