#pragma once

#include <string>

#include "core/analysis.hpp"

namespace ethlab::reports {

using nlohmann::json;

// %.17g round-trip formatting, shared by every CSV writer.
std::string format_double(double v);

json to_json(const BoundReport& r);
json to_json(const analysis::EthReport& r);
json to_json(const analysis::ThermReport& r);
json to_json(const analysis::EigenstateBound& r);
json to_json(const analysis::BoundsGridResult& r);
json to_json(const analysis::AuditResult& r);
json to_json(const analysis::EvolveReport& r);
json to_json(const thermo::ThermoProfile& p);
json to_json(const shells::EnergyShell& s);
json split_report_json(const std::vector<BoundReport>& checks,
                       const models::SplitHamiltonian& h);

// CSV renderings of finished report JSON (column schemas fixed by the
// external interfaces); shared by the C API and the CLI.
std::string profile_csv(const json& profile_report);  // E,dos,S,beta,C,in_valid_range
std::string bounds_csv(const json& bounds_report);  // E,delta_b,check,index,lhs,rhs,slack,holds
std::string audit_ideality_csv(const json& audit_report);
std::string evolve_csv(const json& evolve_report);  // t,dist
std::string eth_sweep_csv(const json& sweep_report);  // delta,eps_measured,pair_count

// Dispatch by report "kind"; throws SpecError for kinds without a CSV form.
std::string report_csv(const json& report);

}  // namespace ethlab::reports
