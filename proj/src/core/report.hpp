#pragma once

#include <string>

#include "json.hpp"

namespace ethlab {

inline constexpr int kSchemaVersion = 1;

// Uniform carrier for one measured inequality: lhs vs rhs, with the inputs
// that produced them.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  nlohmann::json inputs;  // parameter record

  double slack() const { return rhs - lhs; }
};

inline BoundReport make_bound(std::string name, double lhs, double rhs,
                              nlohmann::json inputs = {},
                              double slack_tol = 1e-9) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.holds = lhs <= rhs + slack_tol;
  r.inputs = std::move(inputs);
  return r;
}

}  // namespace ethlab
