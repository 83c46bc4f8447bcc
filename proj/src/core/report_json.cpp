#include "core/report_json.hpp"

#include <cstdio>

namespace ethlab::reports {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json to_json(const BoundReport& r) {
  return json{{"name", r.name},
              {"lhs", r.lhs},
              {"rhs", r.rhs},
              {"slack", r.slack()},
              {"holds", r.holds},
              {"inputs", r.inputs}};
}

json to_json(const analysis::EthReport& r) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "eth_report"},
              {"emin", r.emin},
              {"emax", r.emax},
              {"delta", r.delta},
              {"eps_measured", r.eps_measured},
              {"worst_pair", json::array({r.worst_n, r.worst_m})},
              {"pair_count", r.pair_count},
              {"state_count", r.state_count},
              {"distance_histogram",
               json{{"range", json::array({0.0, 2.0})},
                    {"counts", r.histogram}}}};
}

json to_json(const shells::EnergyShell& s) {
  return json{{"tag", shells::tag_name(s.tag)},
              {"E", s.center},
              {"delta", s.half_width},
              {"count", s.count()},
              {"empty", s.empty()}};
}

namespace {

json complex_matrix_json(const hilbert::Matrix& m) {
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

}  // namespace

json to_json(const analysis::ThermReport& r) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "therm_report"},
              {"shell", to_json(r.shell)},
              {"omega", complex_matrix_json(r.omega.rho)},
              {"eps_product", r.eps_product},
              {"eps_entangled", r.eps_entangled},
              {"lower_bound", r.lower_bound_flag},
              {"product", json{{"mean", r.product_mean},
                               {"max", r.eps_product},
                               {"count", r.product_count},
                               {"argmax", r.product_argmax}}},
              {"entangled", json{{"mean", r.entangled_mean},
                                 {"max", r.eps_entangled},
                                 {"count", r.entangled_count},
                                 {"argmax", r.entangled_argmax}}},
              {"climb_trace", r.climb_trace}};
}

json to_json(const analysis::EigenstateBound& r) {
  return json{{"n", r.n},
              {"energy", r.energy},
              {"lhs", r.lhs},
              {"leakage", r.leakage},
              {"eq7", to_json(r.eq7)},
              {"eq8", to_json(r.eq8)},
              {"chain_ok", r.chain_ok}};
}

json to_json(const analysis::BoundsGridResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cell{{"E", c.e},
              {"delta_b", c.delta_b},
              {"shell_empty", c.shell_empty},
              {"in_valid", c.in_valid},
              {"eps_required", c.eps_required}};
    if (!c.note.empty()) cell["note"] = c.note;
    if (!c.shell_empty && c.note.empty()) {
      cell["therm"] = to_json(c.therm);
      cell["lemma1"] = to_json(c.lemma1);
      json bounds = json::array();
      for (const auto& eb : c.eigen_bounds) bounds.push_back(to_json(eb));
      cell["eigenstate_bounds"] = std::move(bounds);
      if (c.prop1_applicable) {
        cell["eps_eth_window"] = c.eps_eth_window;
        json prop1 = json::array();
        for (const auto& p : c.prop1) prop1.push_back(to_json(p));
        cell["prop1"] = std::move(prop1);
      }
    }
    cells.push_back(std::move(cell));
  }
  return json{{"schema_version", kSchemaVersion},
              {"kind", "bounds_grid"},
              {"grid", json{{"e_points", r.config.e_points},
                            {"deltab_points", r.config.deltab_points},
                            {"emin", r.config.emin},
                            {"emax", r.config.emax},
                            {"deltab_min", r.config.deltab_min},
                            {"deltab_max", r.config.deltab_max}}},
              {"omega_variant", analysis::omega_variant_name(r.config.omega_variant)},
              {"seed", r.config.budget.seed},
              {"cells", std::move(cells)}};
}

json to_json(const analysis::AuditResult& r) {
  json bins = json::array();
  for (const auto& b : r.bins) {
    bins.push_back(json{{"E", b.e_center},
                        {"shell_empty", b.shell_empty},
                        {"eps_product", b.eps_product},
                        {"eps_required", b.eps_required},
                        {"cell_ideal", b.cell_ideal},
                        {"window_states", b.window_states},
                        {"eq7_violations", b.eq7_violations},
                        {"eq8_violations", b.eq8_violations},
                        {"max_state_dist", b.max_state_dist}});
  }
  json ideality = json::array();
  for (const auto& c : r.ideality) {
    json cell{{"E", c.e},
              {"delta_b", c.delta_b},
              {"shell_empty", c.shell_empty},
              {"eps_required", c.eps_required},
              {"eps_product", c.eps_product},
              {"ideal", c.ideal}};
    if (!c.shell_empty) cell["lemma1"] = to_json(c.lemma1);
    ideality.push_back(std::move(cell));
  }
  return json{{"schema_version", kSchemaVersion},
              {"kind", "audit_verdict"},
              {"eth_pred", r.eth_pred},
              {"eth_measured", r.eth_measured},
              {"bath_ideal", r.bath_ideal},
              {"triangle_ok", r.triangle_ok},
              {"constants", json{{"eps_eth", r.constants.eps_eth},
                                 {"delta", r.constants.delta},
                                 {"sup_energy", r.constants.sup_energy},
                                 {"eps_eth_kernel_half", r.eps_eth_kernel_low},
                                 {"eps_eth_kernel_double", r.eps_eth_kernel_high}}},
              {"eth_scan", to_json(r.eth)},
              {"pair_bins", std::move(bins)},
              {"ideality_grid", std::move(ideality)}};
}

json to_json(const analysis::EvolveReport& r) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "evolve_report"},
              {"times", r.times},
              {"distances", r.distances}};
}

json to_json(const thermo::ThermoProfile& p) {
  json valid = json::array();
  for (bool v : p.valid) valid.push_back(v ? 1 : 0);
  json j{{"schema_version", kSchemaVersion},
         {"kind", "thermo_profile"},
         {"kernel_width", p.kernel_width},
         {"ref_width", p.ref_width},
         {"grid", std::vector<double>(p.grid.data(), p.grid.data() + p.grid.size())},
         {"dos", std::vector<double>(p.dos.data(), p.dos.data() + p.dos.size())},
         {"entropy", std::vector<double>(p.entropy.data(), p.entropy.data() + p.entropy.size())},
         {"beta", std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size())},
         {"heat_capacity", std::vector<double>(p.heat_capacity.data(),
                                               p.heat_capacity.data() + p.heat_capacity.size())},
         {"in_valid_range", std::move(valid)}};
  if (p.has_valid_range()) {
    j["valid_range"] = json::array({p.valid_min(), p.valid_max()});
  } else {
    j["valid_range"] = nullptr;
  }
  return j;
}

json split_report_json(const std::vector<BoundReport>& checks,
                       const models::SplitHamiltonian& h) {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(to_json(c));
  return json{{"schema_version", kSchemaVersion},
              {"kind", "split_report"},
              {"model_hash", h.spec.content_hash()},
              {"norm_hc", h.norm_hc},
              {"checks", std::move(arr)}};
}

std::string profile_csv(const json& p) {
  const auto& grid = p.at("grid");
  const auto& dos = p.at("dos");
  const auto& entropy = p.at("entropy");
  const auto& beta = p.at("beta");
  const auto& cap = p.at("heat_capacity");
  const auto& valid = p.at("in_valid_range");
  std::string out = "E,dos,S,beta,C,in_valid_range\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += format_double(grid.at(i).get<double>());
    out += ',';
    out += format_double(dos.at(i).get<double>());
    out += ',';
    out += format_double(entropy.at(i).get<double>());
    out += ',';
    out += format_double(beta.at(i).get<double>());
    out += ',';
    out += format_double(cap.at(i).get<double>());
    out += ',';
    out += valid.at(i).get<int>() ? '1' : '0';
    out += '\n';
  }
  return out;
}

namespace {

void bounds_row(std::string& out, double e, double delta_b, const std::string& check,
                long long index, const json& b) {
  out += format_double(e);
  out += ',';
  out += format_double(delta_b);
  out += ',';
  out += check;
  out += ',';
  out += std::to_string(index);
  out += ',';
  out += format_double(b.at("lhs").get<double>());
  out += ',';
  out += format_double(b.at("rhs").get<double>());
  out += ',';
  out += format_double(b.at("slack").get<double>());
  out += ',';
  out += b.at("holds").get<bool>() ? '1' : '0';
  out += '\n';
}

}  // namespace

std::string bounds_csv(const json& r) {
  std::string out = "E,delta_b,check,index,lhs,rhs,slack,holds\n";
  for (const auto& c : r.at("cells")) {
    if (c.at("shell_empty").get<bool>() || c.contains("note")) continue;
    const double e = c.at("E").get<double>();
    const double db = c.at("delta_b").get<double>();
    bounds_row(out, e, db, "lemma1_eq5", -1, c.at("lemma1"));
    for (const auto& eb : c.at("eigenstate_bounds")) {
      const long long n = eb.at("n").get<long long>();
      bounds_row(out, e, db, "eigenstate_eq7", n, eb.at("eq7"));
      bounds_row(out, e, db, "eigenstate_eq8", n, eb.at("eq8"));
    }
    if (c.contains("prop1")) {
      long long i = 0;
      for (const auto& p : c.at("prop1")) {
        if (!p.at("inputs").value("skipped", false)) {
          bounds_row(out, e, db, "prop1_eq4", i, p);
        }
        ++i;
      }
    }
  }
  return out;
}

std::string audit_ideality_csv(const json& r) {
  std::string out = "E,delta_b,shell_empty,eps_required,eps_product,ideal\n";
  for (const auto& c : r.at("ideality_grid")) {
    out += format_double(c.at("E").get<double>());
    out += ',';
    out += format_double(c.at("delta_b").get<double>());
    out += ',';
    out += c.at("shell_empty").get<bool>() ? '1' : '0';
    out += ',';
    out += format_double(c.at("eps_required").get<double>());
    out += ',';
    out += format_double(c.at("eps_product").get<double>());
    out += ',';
    out += c.at("ideal").get<bool>() ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string evolve_csv(const json& r) {
  const auto& times = r.at("times");
  const auto& dists = r.at("distances");
  std::string out = "t,dist\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += format_double(times.at(i).get<double>());
    out += ',';
    out += format_double(dists.at(i).get<double>());
    out += '\n';
  }
  return out;
}

std::string eth_sweep_csv(const json& r) {
  std::string out = "delta,eps_measured,pair_count\n";
  const auto row = [&out](const json& p) {
    out += format_double(p.at("delta").get<double>());
    out += ',';
    out += format_double(p.at("eps_measured").get<double>());
    out += ',';
    out += std::to_string(p.at("pair_count").get<std::size_t>());
    out += '\n';
  };
  if (r.contains("points")) {
    for (const auto& p : r.at("points")) row(p);
  } else {
    row(r);
  }
  return out;
}

std::string report_csv(const json& report) {
  const std::string kind = report.value("kind", "");
  if (kind == "thermo_profile") return profile_csv(report);
  if (kind == "bounds_grid") return bounds_csv(report);
  if (kind == "audit_verdict") return audit_ideality_csv(report);
  if (kind == "evolve_report") return evolve_csv(report);
  if (kind == "eth_report" || kind == "eth_sweep") return eth_sweep_csv(report);
  throw SpecError("report_csv: no CSV schema for report kind '" + kind + "'");
}

}  // namespace ethlab::reports
