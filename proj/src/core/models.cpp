#include "core/models.hpp"

#include <cmath>
#include <sstream>

#include "core/hash.hpp"
#include "core/rng.hpp"

namespace ethlab::models {

using hilbert::Complex;
using nlohmann::json;

namespace {

const Matrix& pauli_x() {
  static const Matrix m = [] {
    Matrix p(2, 2);
    p << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    return p;
  }();
  return m;
}

const Matrix& pauli_y() {
  static const Matrix m = [] {
    Matrix p(2, 2);
    p << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return p;
  }();
  return m;
}

const Matrix& pauli_z() {
  static const Matrix m = [] {
    Matrix p(2, 2);
    p << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
    return p;
  }();
  return m;
}

// site 0 is the slowest (most significant) bit of the basis index
void add_one_site(Matrix& h, int nsites, int site, const Matrix& op,
                  double coeff) {
  const Eigen::Index right = Eigen::Index(1) << (nsites - 1 - site);
  const Eigen::Index left = Eigen::Index(1) << site;
  for (Eigen::Index a = 0; a < left; ++a) {
    for (Eigen::Index s = 0; s < 2; ++s) {
      for (Eigen::Index sp = 0; sp < 2; ++sp) {
        const Complex v = coeff * op(s, sp);
        if (v == Complex(0, 0)) continue;
        const Eigen::Index row0 = (a * 2 + s) * right;
        const Eigen::Index col0 = (a * 2 + sp) * right;
        for (Eigen::Index b = 0; b < right; ++b) {
          h(row0 + b, col0 + b) += v;
        }
      }
    }
  }
}

// adjacent pair (site, site+1)
void add_bond(Matrix& h, int nsites, int site, const Matrix& op_a,
              const Matrix& op_b, double coeff) {
  const Eigen::Index right = Eigen::Index(1) << (nsites - 2 - site);
  const Eigen::Index left = Eigen::Index(1) << site;
  for (Eigen::Index a = 0; a < left; ++a) {
    for (Eigen::Index s1 = 0; s1 < 2; ++s1) {
      for (Eigen::Index s2 = 0; s2 < 2; ++s2) {
        for (Eigen::Index t1 = 0; t1 < 2; ++t1) {
          for (Eigen::Index t2 = 0; t2 < 2; ++t2) {
            const Complex v = coeff * op_a(s1, t1) * op_b(s2, t2);
            if (v == Complex(0, 0)) continue;
            const Eigen::Index row0 = ((a * 2 + s1) * 2 + s2) * right;
            const Eigen::Index col0 = ((a * 2 + t1) * 2 + t2) * right;
            for (Eigen::Index b = 0; b < right; ++b) {
              h(row0 + b, col0 + b) += v;
            }
          }
        }
      }
    }
  }
}

void add_chain_bond(Matrix& h, int nsites, int site, Family family,
                    double coeff, double delta_z) {
  if (family == Family::xxz) {
    add_bond(h, nsites, site, pauli_x(), pauli_x(), coeff);
    add_bond(h, nsites, site, pauli_y(), pauli_y(), coeff);
    add_bond(h, nsites, site, pauli_z(), pauli_z(), coeff * delta_z);
  } else {
    add_bond(h, nsites, site, pauli_z(), pauli_z(), coeff);
  }
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw SpecError(std::string("ModelSpec: parameter '") + name +
                    "' is not finite");
  }
}

Matrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw SpecError(std::string("ModelSpec: '") + name +
                    "' must be a non-empty array of rows");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw SpecError(std::string("ModelSpec: '") + name +
                      "' must be square; each entry is [re, im]");
    }
    for (Eigen::Index c = 0; c < rows; ++c) {
      const json& e = row.at(c);
      if (!e.is_array() || e.size() != 2) {
        throw SpecError(std::string("ModelSpec: '") + name +
                        "' entries must be [re, im] pairs");
      }
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw SpecError(std::string("ModelSpec: unknown field '") + it.key() +
                      "' in " + where);
    }
  }
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::transverse_ising: return "transverse_ising";
    case Family::xxz: return "xxz";
    case Family::custom_dense: return "custom_dense";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "transverse_ising") return Family::transverse_ising;
  if (name == "xxz") return Family::xxz;
  if (name == "custom_dense") return Family::custom_dense;
  throw SpecError("ModelSpec: unknown model_family '" + name + "'");
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SpecError(std::string("ModelSpec: JSON parse error: ") + e.what());
  }
  return from_json(j);
}

ModelSpec ModelSpec::from_json(const json& j) {
  if (!j.is_object()) throw SpecError("ModelSpec: expected a JSON object");
  check_keys(j,
             {"model_family", "sys_sites", "bath_sites", "couplings",
              "disorder", "units", "custom"},
             "model spec");
  ModelSpec spec;
  if (!j.contains("model_family")) {
    throw SpecError("ModelSpec: missing 'model_family'");
  }
  spec.family = family_from_name(j.at("model_family").get<std::string>());

  if (j.contains("sys_sites")) spec.sys_sites = j.at("sys_sites").get<int>();
  if (j.contains("bath_sites")) spec.bath_sites = j.at("bath_sites").get<int>();
  if (j.contains("units")) spec.units = j.at("units").get<std::string>();
  if (spec.units != "dimensionless") {
    throw SpecError("ModelSpec: 'units' must be \"dimensionless\" (k = 1)");
  }

  if (j.contains("couplings")) {
    const json& c = j.at("couplings");
    check_keys(c, {"J", "delta_z", "h", "h_S", "g"}, "couplings");
    if (c.contains("J")) spec.couplings.J = c.at("J").get<double>();
    if (c.contains("delta_z")) spec.couplings.delta_z = c.at("delta_z").get<double>();
    if (c.contains("h")) spec.couplings.h = c.at("h").get<double>();
    if (c.contains("h_S")) spec.couplings.h_S = c.at("h_S").get<double>();
    if (c.contains("g")) spec.couplings.g = c.at("g").get<double>();
  }
  if (j.contains("disorder")) {
    const json& d = j.at("disorder");
    check_keys(d, {"seed", "amplitude"}, "disorder");
    if (d.contains("seed")) spec.disorder.seed = d.at("seed").get<std::uint64_t>();
    if (d.contains("amplitude"))
      spec.disorder.amplitude = d.at("amplitude").get<double>();
  }
  if (spec.family == Family::custom_dense) {
    if (!j.contains("custom")) {
      throw SpecError("ModelSpec: custom_dense requires a 'custom' block");
    }
    const json& c = j.at("custom");
    check_keys(c, {"d_S", "d_B", "H_B", "H_C"}, "custom");
    CustomBlocks blocks;
    blocks.d_s = c.at("d_S").get<Eigen::Index>();
    blocks.d_b = c.at("d_B").get<Eigen::Index>();
    blocks.h_bath = matrix_from_json(c.at("H_B"), "custom.H_B");
    blocks.h_contact = matrix_from_json(c.at("H_C"), "custom.H_C");
    spec.custom = std::move(blocks);
    // site counts are optional metadata for custom models
    if (!j.contains("sys_sites")) spec.sys_sites = 0;
    if (!j.contains("bath_sites")) spec.bath_sites = 0;
  } else if (j.contains("custom")) {
    throw SpecError("ModelSpec: 'custom' block is only valid for custom_dense");
  }
  return spec;
}

json ModelSpec::to_json() const {
  json j;
  j["model_family"] = family_name(family);
  if (sys_sites > 0) j["sys_sites"] = sys_sites;
  if (bath_sites > 0) j["bath_sites"] = bath_sites;
  j["couplings"] = {{"J", couplings.J},
                    {"delta_z", couplings.delta_z},
                    {"h", couplings.h},
                    {"h_S", couplings.h_S},
                    {"g", couplings.g}};
  j["disorder"] = {{"seed", disorder.seed}, {"amplitude", disorder.amplitude}};
  j["units"] = units;
  if (custom) {
    j["custom"] = {{"d_S", custom->d_s},
                   {"d_B", custom->d_b},
                   {"H_B", matrix_to_json(custom->h_bath)},
                   {"H_C", matrix_to_json(custom->h_contact)}};
  }
  return j;
}

std::string ModelSpec::canonical_json() const { return to_json().dump(); }

std::string ModelSpec::content_hash() const {
  return sha256_hex(canonical_json());
}

SpaceShape ModelSpec::shape() const {
  if (family == Family::custom_dense) {
    if (!custom) throw SpecError("ModelSpec: custom_dense without matrices");
    return SpaceShape{custom->d_s, custom->d_b};
  }
  return SpaceShape{Eigen::Index(1) << sys_sites, Eigen::Index(1) << bath_sites};
}

bool ModelSpec::has_site_structure() const {
  if (family != Family::custom_dense) return true;
  if (sys_sites < 1 || bath_sites < 1 || !custom) return false;
  return (Eigen::Index(1) << sys_sites) == custom->d_s &&
         (Eigen::Index(1) << bath_sites) == custom->d_b;
}

std::vector<double> disorder_fields(const ModelSpec& spec) {
  const int n = spec.sys_sites + spec.bath_sites;
  std::vector<double> fields(static_cast<std::size_t>(std::max(n, 0)), 0.0);
  Rng rng(spec.disorder.seed);
  for (auto& f : fields) {
    f = spec.disorder.amplitude * rng.uniform(-1.0, 1.0);
  }
  return fields;
}

namespace {

void validate_spec(const ModelSpec& spec, const BuildOptions& opts) {
  require_finite(spec.couplings.J, "J");
  require_finite(spec.couplings.delta_z, "delta_z");
  require_finite(spec.couplings.h, "h");
  require_finite(spec.couplings.h_S, "h_S");
  require_finite(spec.couplings.g, "g");
  require_finite(spec.disorder.amplitude, "disorder.amplitude");
  if (spec.disorder.amplitude < 0) {
    throw SpecError("ModelSpec: disorder amplitude must be >= 0");
  }
  if (spec.family == Family::custom_dense) {
    const auto& c = *spec.custom;
    if (c.d_s < 2 || c.d_b < 2) {
      throw SpecError("ModelSpec: custom dims require d_S >= 2 and d_B >= 2");
    }
    if (c.d_s * c.d_b > opts.max_dim) {
      std::ostringstream os;
      os << "ModelSpec: global dimension " << c.d_s * c.d_b
         << " exceeds the cap " << opts.max_dim;
      throw SpecError(os.str());
    }
    if (c.h_bath.rows() != c.d_b || c.h_contact.rows() != c.d_s * c.d_b) {
      throw SpecError("ModelSpec: custom matrix dimensions disagree with d_S, d_B");
    }
    if (!hilbert::is_hermitian(c.h_bath) || !hilbert::is_hermitian(c.h_contact)) {
      throw SpecError("ModelSpec: custom H_B and H_C must be Hermitian");
    }
    if (spec.disorder.amplitude > 0) {
      throw SpecError("ModelSpec: disorder is not defined for custom_dense");
    }
    return;
  }
  if (spec.sys_sites < 1 || spec.bath_sites < 1) {
    throw SpecError("ModelSpec: sys_sites and bath_sites must be >= 1");
  }
  if (spec.sys_sites + spec.bath_sites > opts.max_sites) {
    std::ostringstream os;
    os << "ModelSpec: " << spec.sys_sites + spec.bath_sites
       << " sites exceed the cap of " << opts.max_sites << " spins";
    throw SpecError(os.str());
  }
}

Matrix embed_contact(const Matrix& compact, Eigen::Index rest) {
  // compact acts on the system sites plus the boundary bath site; pad with
  // identity on the remaining bath sites: kron(compact, I_rest).
  const Eigen::Index n = compact.rows();
  Matrix full = Matrix::Zero(n * rest, n * rest);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (compact(i, j) == Complex(0, 0)) continue;
      for (Eigen::Index r = 0; r < rest; ++r) {
        full(i * rest + r, j * rest + r) = compact(i, j);
      }
    }
  }
  return full;
}

}  // namespace

SplitHamiltonian build_hamiltonian(const ModelSpec& spec,
                                   const BuildOptions& opts) {
  if (spec.family == Family::custom_dense && !spec.custom) {
    throw SpecError("ModelSpec: custom_dense requires explicit matrices");
  }
  validate_spec(spec, opts);

  SplitHamiltonian out;
  out.spec = spec;
  out.shape = spec.shape();
  out.shape.validate();

  if (spec.family == Family::custom_dense) {
    out.h_bath = spec.custom->h_bath;
    out.h_contact = spec.custom->h_contact;
    out.norm_hc = hilbert::operator_norm(out.h_contact);
  } else {
    const int ns = spec.sys_sites;
    const int nb = spec.bath_sites;
    const auto& cp = spec.couplings;
    const auto fields = disorder_fields(spec);

    // bath block, bath-local site j = chain site ns + j
    out.h_bath = Matrix::Zero(out.shape.d_b, out.shape.d_b);
    for (int j = 0; j + 1 < nb; ++j) {
      add_chain_bond(out.h_bath, nb, j, spec.family, cp.J, cp.delta_z);
    }
    for (int j = 0; j < nb; ++j) {
      add_one_site(out.h_bath, nb, j, pauli_x(), cp.h);
      add_one_site(out.h_bath, nb, j, pauli_z(), fields[ns + j]);
    }

    // contact block on sys_sites + 1 chain sites, then identity padding
    const int nc = ns + 1;
    const Eigen::Index dc = Eigen::Index(1) << nc;
    Matrix compact = Matrix::Zero(dc, dc);
    for (int j = 0; j + 1 < ns; ++j) {
      add_chain_bond(compact, nc, j, spec.family, cp.J, cp.delta_z);
    }
    for (int j = 0; j < ns; ++j) {
      add_one_site(compact, nc, j, pauli_x(), cp.h);
      add_one_site(compact, nc, j, pauli_z(), cp.h_S);
      add_one_site(compact, nc, j, pauli_z(), fields[j]);
    }
    // boundary bond is transverse (sx sx) for the Ising family so that the
    // contact does not commute with the longitudinal system field
    if (spec.family == Family::xxz) {
      add_chain_bond(compact, nc, ns - 1, spec.family, cp.g, cp.delta_z);
    } else {
      add_bond(compact, nc, ns - 1, pauli_x(), pauli_x(), cp.g);
    }
    const Eigen::Index rest = out.shape.d_b / 2;
    out.h_contact = embed_contact(compact, rest);
    out.norm_hc = hilbert::operator_norm(compact);
  }

  out.h_total = out.h_contact;
  for (Eigen::Index s = 0; s < out.shape.d_s; ++s) {
    out.h_total.block(s * out.shape.d_b, s * out.shape.d_b, out.shape.d_b,
                      out.shape.d_b) += out.h_bath;
  }
  return out;
}

namespace {

// max-abs of [H, op] for a single-site sigma_z at chain position `site`
double commutator_z(const Matrix& h, int nsites, int site) {
  const Eigen::Index d = h.rows();
  const Eigen::Index mask = Eigen::Index(1) << (nsites - 1 - site);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double zi = (i & mask) ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double zj = (j & mask) ? -1.0 : 1.0;
      const double v = std::abs(h(i, j)) * std::abs(zj - zi);
      if (v > worst) worst = v;
    }
  }
  return worst;
}

// max-abs of [H, op] for a single-site sigma_x at chain position `site`
double commutator_x(const Matrix& h, int nsites, int site) {
  const Eigen::Index d = h.rows();
  const Eigen::Index mask = Eigen::Index(1) << (nsites - 1 - site);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = std::abs(h(i, j ^ mask) - h(i ^ mask, j));
      if (v > worst) worst = v;
    }
  }
  return worst;
}

}  // namespace

std::vector<BoundReport> verify_split(const SplitHamiltonian& h,
                                      const BuildOptions& opts) {
  const Tolerances& tol = tols();
  std::vector<BoundReport> reports;

  Matrix recomposed = h.h_contact;
  for (Eigen::Index s = 0; s < h.shape.d_s; ++s) {
    recomposed.block(s * h.shape.d_b, s * h.shape.d_b, h.shape.d_b,
                     h.shape.d_b) += h.h_bath;
  }
  const double split_res = hilbert::max_abs(h.h_total - recomposed);
  reports.push_back(make_bound("split_identity", split_res, tol.split_identity,
                               {{"d_total", h.shape.total()}}, 0.0));

  if (h.spec.has_site_structure() && h.spec.bath_sites >= 2) {
    const int n = h.spec.sys_sites + h.spec.bath_sites;
    double worst = 0.0;
    int worst_site = -1;
    for (int site = h.spec.sys_sites + 1; site < n; ++site) {
      const double r =
          std::max(commutator_z(h.h_contact, n, site), commutator_x(h.h_contact, n, site));
      if (r > worst) {
        worst = r;
        worst_site = site;
      }
    }
    reports.push_back(make_bound("boundary_locality", worst, tol.locality,
                                 {{"worst_site", worst_site}}, 0.0));
  }

  if (h.spec.family != Family::custom_dense) {
    double max_rel = 0.0;
    for (int delta : {-1, +1}) {
      ModelSpec other = h.spec;
      other.bath_sites += delta;
      if (other.bath_sites < 1) continue;
      if (other.sys_sites + other.bath_sites > opts.max_sites) continue;
      const SplitHamiltonian rebuilt = build_hamiltonian(other, opts);
      const double rel = std::abs(rebuilt.norm_hc - h.norm_hc) /
                         std::max(1.0, std::abs(h.norm_hc));
      max_rel = std::max(max_rel, rel);
    }
    reports.push_back(make_bound("norm_hc_bath_independence", max_rel, 1e-10,
                                 {{"norm_hc", h.norm_hc}}, 0.0));
  }
  return reports;
}

}  // namespace ethlab::models
