#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/hilbert.hpp"
#include "core/report.hpp"

namespace ethlab::models {

using hilbert::Matrix;
using hilbert::SpaceShape;

enum class Family { transverse_ising, xxz, custom_dense };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct Couplings {
  double J = 1.0;        // bond strength inside system and bath chains
  double delta_z = 1.0;  // z-anisotropy of xxz bonds
  double h = 0.0;        // transverse field on every site
  double h_S = 0.0;      // longitudinal field on system sites
  double g = 0.0;        // system-bath boundary bond strength
};

struct DisorderSpec {
  std::uint64_t seed = 0;
  double amplitude = 0.0;  // weak random longitudinal fields on all sites
};

// Explicit matrices for adversarial / degenerate test cases.
struct CustomBlocks {
  Eigen::Index d_s = 0;
  Eigen::Index d_b = 0;
  Matrix h_bath;    // d_b x d_b
  Matrix h_contact; // global (d_s*d_b)
};

// Spin-chain site layout for the built-in families: sites 0..sys_sites-1 are
// the system, the rest are the bath; site sys_sites is the boundary bath
// site. Global basis bit 0 of the chain is the slowest index.
//
// transverse_ising terms:
//   J  sz_i sz_{i+1}   on bonds inside the system and inside the bath
//   g  sx_s sx_b       on the single system-bath boundary bond
//   h  sx_i            on every site
//   h_S sz_i           on system sites
//   d_i sz_i           disorder on every site, d_i = amplitude*uniform(-1,1)
// xxz replaces each bond K sz sz by K (sx sx + sy sy + delta_z sz sz).
struct ModelSpec {
  Family family = Family::transverse_ising;
  int sys_sites = 1;
  int bath_sites = 1;
  Couplings couplings;
  DisorderSpec disorder;
  std::string units = "dimensionless";
  std::optional<CustomBlocks> custom;

  static ModelSpec from_json(const std::string& text);
  static ModelSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  // Canonical serialization (sorted keys, defaults filled); its SHA-256
  // identifies cached spectra.
  std::string canonical_json() const;
  std::string content_hash() const;

  SpaceShape shape() const;
  bool has_site_structure() const;  // power-of-two dims with declared sites
};

struct BuildOptions {
  int max_sites = 13;            // sys_sites + bath_sites cap
  Eigen::Index max_dim = 8192;   // global dimension cap
};

// H = H_C + I_S (x) H_B.  H_B carries all bath-bath bonds and bath fields;
// H_C carries the system terms, the boundary bond, and the system disorder.
struct SplitHamiltonian {
  ModelSpec spec;
  SpaceShape shape;
  Matrix h_bath;     // d_B x d_B
  Matrix h_contact;  // global
  Matrix h_total;    // global
  double norm_hc = 0.0;  // operator norm of H_C, precomputed
};

SplitHamiltonian build_hamiltonian(const ModelSpec& spec,
                                   const BuildOptions& opts = {});

// Residual checks for the three SplitHamiltonian invariants:
//   split_identity          H == H_C + I (x) H_B entrywise
//   boundary_locality       H_C commutes with interior bath-site operators
//   norm_hc_bath_independence   ||H_C|| stable under bath resizing
// The last check rebuilds the model at neighboring bath sizes and is skipped
// (not emitted) for custom_dense models.
std::vector<BoundReport> verify_split(const SplitHamiltonian& h,
                                      const BuildOptions& opts = {});

// Disorder fields for the given spec, one per chain site. Exposed for tests.
std::vector<double> disorder_fields(const ModelSpec& spec);

}  // namespace ethlab::models
