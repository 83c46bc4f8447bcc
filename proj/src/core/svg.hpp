#pragma once

#include <string>

#include "json.hpp"

namespace ethlab::svg {

// Deterministic static figures from report JSON. Unknown or empty data sets
// render as axes plus a "no data" annotation rather than failing.

// eps_eth(delta) polyline from an eth_sweep report
std::string render_eth_sweep(const nlohmann::json& sweep_report);

// ||tau_n - omega||_1 vs E_n scatter for one bounds cell, with the Eq. (8)
// bound line recomputed from the stored inputs and overlaid.
std::string render_bounds_cell(const nlohmann::json& cell, double norm_hc,
                               int d_s);

// beta(E) and C(E) panels from a thermo_profile report
std::string render_profile(const nlohmann::json& profile_report);

}  // namespace ethlab::svg
