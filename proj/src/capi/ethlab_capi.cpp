#include "ethlab/ethlab.h"

#include <cstring>
#include <string>

#include "core/analysis.hpp"
#include "core/report_json.hpp"
#include "core/rng.hpp"
#include "core/svg.hpp"

using namespace ethlab;
using nlohmann::json;

struct ethlab_model {
  models::SplitHamiltonian h;
};

struct ethlab_session {
  std::unique_ptr<analysis::Session> session;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
ethlab_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ETHLAB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return e.code() == ErrorCode::numeric ? ETHLAB_ERR_NUMERIC : ETHLAB_ERR_SPEC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ETHLAB_ERR_NUMERIC;
  }
}

json parse_params(const char* params_json) {
  if (params_json == nullptr || params_json[0] == '\0') return json::object();
  try {
    return json::parse(params_json);
  } catch (const json::exception& e) {
    throw SpecError(std::string("params: JSON parse error: ") + e.what());
  }
}

analysis::SamplerBudget budget_from(const json& j) {
  analysis::SamplerBudget b;
  if (!j.is_object()) return b;
  b.seed = j.value("seed", b.seed);
  b.n_random_product = j.value("n_random_product", b.n_random_product);
  b.n_random_entangled = j.value("n_random_entangled", b.n_random_entangled);
  b.n_climb_starts = j.value("n_climb_starts", b.n_climb_starts);
  b.n_climb_iters = j.value("n_climb_iters", b.n_climb_iters);
  b.climb_step = j.value("climb_step", b.climb_step);
  b.multiplier = j.value("multiplier", b.multiplier);
  return b;
}

thermo::ThermoProfile profile_for(const analysis::Session& s, const json& params) {
  const double width = params.value("kernel_width", 0.0);
  const Eigen::Index points = params.value("grid_points", Eigen::Index(512));
  return thermo::thermo_profile(s.bath().energies, width, points,
                                s.model().spec.bath_sites);
}

const analysis::Session& session_of(const ethlab_session* s) {
  if (s == nullptr || !s->session) throw SpecError("null session handle");
  return *s->session;
}

}  // namespace

extern "C" {

const char* ethlab_version(void) { return "0.1.0"; }

const char* ethlab_last_error(void) { return g_last_error.c_str(); }

void ethlab_string_free(char* s) { std::free(s); }

ethlab_status ethlab_model_build(const char* spec_json, ethlab_model** out) {
  return guarded([&] {
    if (spec_json == nullptr || out == nullptr) {
      throw SpecError("ethlab_model_build: null argument");
    }
    const auto spec = models::ModelSpec::from_json(std::string(spec_json));
    auto model = std::make_unique<ethlab_model>();
    model->h = models::build_hamiltonian(spec);
    *out = model.release();
  });
}

void ethlab_model_free(ethlab_model* m) { delete m; }

ethlab_status ethlab_model_hash(const ethlab_model* m, char** out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr) throw SpecError("null argument");
    *out = dup_string(m->h.spec.content_hash());
  });
}

ethlab_status ethlab_model_spec_json(const ethlab_model* m, char** out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr) throw SpecError("null argument");
    *out = dup_string(m->h.spec.to_json().dump(2));
  });
}

ethlab_status ethlab_model_verify(const ethlab_model* m, char** out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr) throw SpecError("null argument");
    const auto checks = models::verify_split(m->h);
    *out = dup_string(reports::split_report_json(checks, m->h).dump(2));
  });
}

ethlab_status ethlab_model_thermo_profile(const ethlab_model* m,
                                          const char* params_json, char** out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr) throw SpecError("null argument");
    const json params = parse_params(params_json);
    const auto bath = shells::diagonalize_bath(m->h);
    const auto profile = thermo::thermo_profile(
        bath.energies, params.value("kernel_width", 0.0),
        params.value("grid_points", Eigen::Index(512)), m->h.spec.bath_sites);
    *out = dup_string(reports::to_json(profile).dump(2));
  });
}

ethlab_status ethlab_diagonalize(const ethlab_model* m, ethlab_session** out) {
  return guarded([&] {
    if (m == nullptr || out == nullptr) throw SpecError("null argument");
    auto s = std::make_unique<ethlab_session>();
    s->session = std::make_unique<analysis::Session>(m->h);
    *out = s.release();
  });
}

void ethlab_session_free(ethlab_session* s) { delete s; }

ethlab_status ethlab_session_save(const ethlab_session* s, const char* dir,
                                  int with_tau) {
  return guarded([&] {
    if (s == nullptr || dir == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    spectral::cache::save(dir, session.model().spec, session.sd(),
                          with_tau ? &session.tau() : nullptr);
  });
}

ethlab_status ethlab_session_load(const char* dir, ethlab_session** out) {
  return guarded([&] {
    if (dir == nullptr || out == nullptr) throw SpecError("null argument");
    auto loaded = spectral::cache::load(dir);
    auto s = std::make_unique<ethlab_session>();
    s->session = std::make_unique<analysis::Session>(
        models::build_hamiltonian(loaded.spec), std::move(loaded.sd));
    *out = s.release();
  });
}

ethlab_status ethlab_session_info(const ethlab_session* s, char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const auto& sd = session.sd();
    json info{{"schema_version", kSchemaVersion},
              {"kind", "session_info"},
              {"model_hash", sd.model_hash},
              {"d_S", sd.shape.d_s},
              {"d_B", sd.shape.d_b},
              {"d_total", sd.shape.total()},
              {"e_min", sd.energies(0)},
              {"e_max", sd.energies(sd.dim() - 1)},
              {"degenerate", sd.degenerate()},
              {"norm_hc", session.model().norm_hc}};
    *out = dup_string(info.dump(2));
  });
}

ethlab_status ethlab_eth_scan(const ethlab_session* s, const char* params_json,
                              char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    const double emin = params.at("emin").get<double>();
    const double emax = params.at("emax").get<double>();
    if (params.contains("deltas")) {
      json points = json::array();
      for (const auto& d : params.at("deltas")) {
        points.push_back(reports::to_json(
            analysis::eth_scan(session, emin, emax, d.get<double>())));
      }
      json sweep{{"schema_version", kSchemaVersion},
                 {"kind", "eth_sweep"},
                 {"emin", emin},
                 {"emax", emax},
                 {"points", std::move(points)}};
      *out = dup_string(sweep.dump(2));
    } else {
      const double delta = params.at("delta").get<double>();
      *out = dup_string(
          reports::to_json(analysis::eth_scan(session, emin, emax, delta)).dump(2));
    }
  });
}

ethlab_status ethlab_therm_scan(const ethlab_session* s, const char* params_json,
                                char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    const double e = params.at("E").get<double>();
    const double delta_b = params.at("delta_b").get<double>();
    const auto budget = budget_from(params.value("budget", json()));

    const auto shell = shells::make_shell(session.bath().energies, e, delta_b,
                                          shells::Tag::bath);
    if (shell.empty()) {
      throw SpecError("therm_scan: the requested bath shell is empty");
    }
    const json omega_params = params.value("omega", json::object());
    const auto variant = analysis::omega_variant_from_name(
        omega_params.value("variant", "microcanonical_reduced"));
    hilbert::DensityMatrix omega = [&] {
      if (variant == analysis::OmegaVariant::canonical_reduced) {
        if (omega_params.contains("beta")) {
          return analysis::omega_canonical(session,
                                           omega_params.at("beta").get<double>());
        }
        const auto profile = profile_for(session, params);
        return analysis::omega_builder(session, profile, e, variant, 0.0);
      }
      // the microcanonical target never reads the profile
      thermo::ThermoProfile unused;
      return analysis::omega_builder(
          session, unused, e, variant,
          omega_params.value("shell_width", delta_b / 2.0),
          omega_params.value("offset", 0.0));
    }();
    const auto report = analysis::therm_scan(session, shell, omega, budget);
    json j = reports::to_json(report);
    j["lemma1"] = reports::to_json(analysis::lemma1_check(report, session.d_s()));
    *out = dup_string(j.dump(2));
  });
}

ethlab_status ethlab_bounds_grid(const ethlab_session* s, const char* params_json,
                                 char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    analysis::BoundsGridConfig cfg;
    cfg.e_points = params.value("e_points", cfg.e_points);
    cfg.deltab_points = params.value("deltab_points", cfg.deltab_points);
    cfg.emin = params.value("emin", cfg.emin);
    cfg.emax = params.value("emax", cfg.emax);
    cfg.deltab_min = params.value("deltab_min", cfg.deltab_min);
    cfg.deltab_max = params.value("deltab_max", cfg.deltab_max);
    cfg.budget = budget_from(params.value("budget", json()));
    cfg.omega_variant = analysis::omega_variant_from_name(
        params.value("omega_variant", "microcanonical_reduced"));
    cfg.omega_offset = params.value("omega_offset", 0.0);
    cfg.prop1_random_states = params.value("prop1_random_states", cfg.prop1_random_states);
    const auto profile = profile_for(session, params);
    json report = reports::to_json(analysis::bounds_grid(session, profile, cfg));
    report["norm_hc"] = session.model().norm_hc;
    report["d_S"] = session.d_s();
    *out = dup_string(report.dump(2));
  });
}

ethlab_status ethlab_theorem1_audit(const ethlab_session* s,
                                    const char* params_json, char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    analysis::AuditConfig cfg;
    cfg.emin = params.value("emin", 0.0);
    cfg.emax = params.value("emax", 0.0);
    cfg.e_bins = params.value("e_bins", cfg.e_bins);
    cfg.deltab_points = params.value("deltab_points", cfg.deltab_points);
    cfg.budget = budget_from(params.value("budget", json()));
    cfg.omega_variant = analysis::omega_variant_from_name(
        params.value("omega_variant", "microcanonical_reduced"));
    cfg.omega_shell_width = params.value("omega_shell_width", 0.0);
    cfg.omega_offset = params.value("omega_offset", 0.0);
    const auto profile = profile_for(session, params);
    if (cfg.emin == 0.0 && cfg.emax == 0.0 && profile.has_valid_range()) {
      cfg.emin = profile.valid_min();
      cfg.emax = profile.valid_max();
    }
    *out = dup_string(
        reports::to_json(analysis::theorem1_audit(session, profile, cfg)).dump(2));
  });
}

ethlab_status ethlab_evolve(const ethlab_session* s, const char* params_json,
                            char** out) {
  return guarded([&] {
    if (out == nullptr) throw SpecError("null argument");
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    const auto& sd = session.sd();

    std::vector<double> times;
    if (params.contains("times")) {
      times = params.at("times").get<std::vector<double>>();
    } else {
      const double tmax = params.at("tmax").get<double>();
      const int points = params.value("points", 200);
      const std::string spacing = params.value("spacing", "linear");
      for (int i = 0; i < points; ++i) {
        if (spacing == "log") {
          const double tmin = params.value("tmin", tmax * 1e-4);
          times.push_back(tmin * std::pow(tmax / tmin,
                                          points == 1 ? 0.0 : double(i) / (points - 1)));
        } else {
          times.push_back(tmax * (points == 1 ? 1.0 : double(i) / (points - 1)));
        }
      }
    }

    const json state = params.value("state", json::object());
    const std::string type = state.value("type", "haar_product");
    hilbert::Vector amps(sd.dim());
    if (type == "haar_product") {
      Rng rng(state.value("seed", std::uint64_t(1)));
      hilbert::Vector psi(sd.shape.d_s), phi(sd.shape.d_b);
      for (Eigen::Index i = 0; i < psi.size(); ++i) {
        psi(i) = hilbert::Complex(rng.normal(), rng.normal());
      }
      for (Eigen::Index i = 0; i < phi.size(); ++i) {
        phi(i) = hilbert::Complex(rng.normal(), rng.normal());
      }
      psi /= psi.norm();
      phi /= phi.norm();
      for (Eigen::Index si = 0; si < sd.shape.d_s; ++si) {
        amps.segment(si * sd.shape.d_b, sd.shape.d_b) = psi(si) * phi;
      }
    } else if (type == "basis") {
      const Eigen::Index idx = state.at("index").get<Eigen::Index>();
      if (idx < 0 || idx >= sd.dim()) throw SpecError("evolve: basis index out of range");
      amps.setZero();
      amps(idx) = hilbert::Complex(1.0, 0.0);
    } else {
      throw SpecError("evolve: unknown state type '" + type + "'");
    }
    hilbert::PureState psi{hilbert::Space::global, sd.shape, amps};
    psi.validate();
    const auto report =
        analysis::evolve_distances(session, psi.to_density(), times);
    *out = dup_string(reports::to_json(report).dump(2));
  });
}

ethlab_status ethlab_write_shell_report(const ethlab_session* s,
                                        const char* params_json, const char* dir,
                                        const char* stem, char** out) {
  return guarded([&] {
    if (dir == nullptr || stem == nullptr || out == nullptr) {
      throw SpecError("null argument");
    }
    const auto& session = session_of(s);
    const json params = parse_params(params_json);
    const std::string tag = params.value("tag", "bath");
    const double e = params.at("E").get<double>();
    const double delta = params.at("delta").get<double>();
    const auto shell =
        tag == "bath"
            ? shells::make_shell(session.bath().energies, e, delta, shells::Tag::bath)
            : shells::make_shell(session.sd().energies, e, delta, shells::Tag::global);
    const auto report = shells::write_shell_report(dir, stem, shell);
    *out = dup_string(report.dump(2));
  });
}

ethlab_status ethlab_report_csv(const char* report_json, char** out) {
  return guarded([&] {
    if (report_json == nullptr || out == nullptr) throw SpecError("null argument");
    const json report = parse_params(report_json);
    *out = dup_string(reports::report_csv(report));
  });
}

ethlab_status ethlab_render_svg(const char* report_json, const char* kind,
                                const char* aux_json, char** out) {
  return guarded([&] {
    if (report_json == nullptr || kind == nullptr || out == nullptr) {
      throw SpecError("null argument");
    }
    const json report = parse_params(report_json);
    const json aux = parse_params(aux_json);
    const std::string k(kind);
    if (k == "eth") {
      *out = dup_string(svg::render_eth_sweep(report));
    } else if (k == "thermo") {
      *out = dup_string(svg::render_profile(report));
    } else if (k == "bounds") {
      *out = dup_string(svg::render_bounds_cell(report, aux.value("norm_hc", 0.0),
                                                aux.value("d_S", 2)));
    } else {
      throw SpecError("ethlab_render_svg: unknown kind '" + k + "'");
    }
  });
}

}  // extern "C"
