#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace ethlab::svg {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double width = 640, height = 420;
  double left = 64, right = 20, top = 24, bottom = 48;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double px(double x) const {
    const double t = (x - xmin) / (xmax - xmin);
    return left + t * (width - left - right);
  }
  double py(double y) const {
    const double t = (y - ymin) / (ymax - ymin);
    return height - bottom - t * (height - top - bottom);
  }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = lo;
    lo = c - 1.0;
    hi = c + 1.0;
    return;
  }
  const double pad = 0.06 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string open_svg(const Frame& f) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(f.width) +
         "\" height=\"" + fmt(f.height) + "\" viewBox=\"0 0 " + fmt(f.width) +
         " " + fmt(f.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

std::string axes(const Frame& f, const std::string& xlabel,
                 const std::string& ylabel, const std::string& title) {
  std::string out;
  out += "<line x1=\"" + fmt(f.left) + "\" y1=\"" + fmt(f.height - f.bottom) +
         "\" x2=\"" + fmt(f.width - f.right) + "\" y2=\"" +
         fmt(f.height - f.bottom) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt(f.left) + "\" y1=\"" + fmt(f.top) + "\" x2=\"" +
         fmt(f.left) + "\" y2=\"" + fmt(f.height - f.bottom) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.xmin + (f.xmax - f.xmin) * i / 4.0;
    const double y = f.ymin + (f.ymax - f.ymin) * i / 4.0;
    out += "<text x=\"" + fmt(f.px(x)) + "\" y=\"" + fmt(f.height - f.bottom + 16) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + fmt(x) + "</text>\n";
    out += "<text x=\"" + fmt(f.left - 6) + "\" y=\"" + fmt(f.py(y) + 3) +
           "\" font-size=\"10\" text-anchor=\"end\">" + fmt(y) + "</text>\n";
  }
  out += "<text x=\"" + fmt((f.left + f.width - f.right) / 2) + "\" y=\"" +
         fmt(f.height - 10) + "\" font-size=\"12\" text-anchor=\"middle\">" +
         xlabel + "</text>\n";
  out += "<text x=\"14\" y=\"" + fmt((f.top + f.height - f.bottom) / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt((f.top + f.height - f.bottom) / 2) + ")\">" + ylabel + "</text>\n";
  out += "<text x=\"" + fmt((f.left + f.width - f.right) / 2) + "\" y=\"16\"" +
         " font-size=\"13\" text-anchor=\"middle\">" + title + "</text>\n";
  return out;
}

std::string no_data(const Frame& f) {
  return "<text x=\"" + fmt((f.left + f.width - f.right) / 2) + "\" y=\"" +
         fmt((f.top + f.height - f.bottom) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" fill=\"gray\">no data</text>\n";
}

std::string polyline(const Frame& f, const std::vector<double>& xs,
                     const std::vector<double>& ys, const char* color) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pts += fmt(f.px(xs[i])) + "," + fmt(f.py(ys[i])) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_eth_sweep(const json& report) {
  std::vector<double> deltas, eps;
  if (report.contains("points")) {
    for (const auto& p : report.at("points")) {
      deltas.push_back(p.at("delta").get<double>());
      eps.push_back(p.at("eps_measured").get<double>());
    }
  } else if (report.contains("delta")) {
    deltas.push_back(report.at("delta").get<double>());
    eps.push_back(report.at("eps_measured").get<double>());
  }

  Frame f;
  if (deltas.empty()) {
    f.xmin = 0;
    f.xmax = 1;
    f.ymin = 0;
    f.ymax = 1;
    std::string out = open_svg(f);
    out += axes(f, "delta", "eps_eth", "ETH precision vs scale");
    out += no_data(f);
    out += "</svg>\n";
    return out;
  }
  f.xmin = *std::min_element(deltas.begin(), deltas.end());
  f.xmax = *std::max_element(deltas.begin(), deltas.end());
  f.ymin = 0.0;
  f.ymax = *std::max_element(eps.begin(), eps.end());
  pad_range(f.xmin, f.xmax);
  pad_range(f.ymin, f.ymax);

  std::string out = open_svg(f);
  out += axes(f, "delta", "eps_eth", "ETH precision vs scale");
  out += polyline(f, deltas, eps, "#1f77b4");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    out += "<circle cx=\"" + fmt(f.px(deltas[i])) + "\" cy=\"" +
           fmt(f.py(eps[i])) + "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_bounds_cell(const json& cell, double norm_hc, int d_s) {
  std::vector<double> xs, ys;
  double eps_product = 0.0, delta_b = 0.0;
  if (cell.contains("therm")) {
    eps_product = cell.at("therm").at("eps_product").get<double>();
  }
  if (cell.contains("delta_b")) delta_b = cell.at("delta_b").get<double>();
  if (cell.contains("eigenstate_bounds")) {
    for (const auto& eb : cell.at("eigenstate_bounds")) {
      xs.push_back(eb.at("energy").get<double>());
      ys.push_back(eb.at("lhs").get<double>());
    }
  }

  Frame f;
  const char* title = "eigenstate distance to omega";
  if (xs.empty()) {
    f.xmin = 0;
    f.xmax = 1;
    f.ymin = 0;
    f.ymax = 1;
    std::string out = open_svg(f);
    out += axes(f, "E_n", "||tau_n - omega||_1", title);
    out += no_data(f);
    out += "</svg>\n";
    return out;
  }
  // bound line recomputed from the report's stored inputs
  const double bound = delta_b > 0.0
                           ? 8.0 * norm_hc * norm_hc / (delta_b * delta_b) +
                                 4.0 * static_cast<double>(d_s) * eps_product
                           : 0.0;
  f.xmin = *std::min_element(xs.begin(), xs.end());
  f.xmax = *std::max_element(xs.begin(), xs.end());
  f.ymin = 0.0;
  f.ymax = std::max(*std::max_element(ys.begin(), ys.end()),
                    std::min(bound, 4.0));
  pad_range(f.xmin, f.xmax);
  pad_range(f.ymin, f.ymax);

  std::string out = open_svg(f);
  out += axes(f, "E_n", "||tau_n - omega||_1", title);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += "<circle cx=\"" + fmt(f.px(xs[i])) + "\" cy=\"" + fmt(f.py(ys[i])) +
           "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  if (bound > 0.0 && bound <= f.ymax) {
    out += "<line x1=\"" + fmt(f.left) + "\" y1=\"" + fmt(f.py(bound)) +
           "\" x2=\"" + fmt(f.width - f.right) + "\" y2=\"" + fmt(f.py(bound)) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"6 3\"/>\n";
    out += "<text x=\"" + fmt(f.width - f.right - 4) + "\" y=\"" +
           fmt(f.py(bound) - 4) +
           "\" font-size=\"10\" text-anchor=\"end\" fill=\"#d62728\">eq8 bound</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_profile(const json& report) {
  std::vector<double> grid, beta, cap;
  if (report.contains("grid")) {
    grid = report.at("grid").get<std::vector<double>>();
    beta = report.at("beta").get<std::vector<double>>();
    cap = report.at("heat_capacity").get<std::vector<double>>();
  }

  Frame f;
  if (grid.empty()) {
    std::string out = open_svg(f);
    out += axes(f, "E", "beta, C", "bath thermodynamic profile");
    out += no_data(f);
    out += "</svg>\n";
    return out;
  }
  f.xmin = grid.front();
  f.xmax = grid.back();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : beta) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : cap) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  f.ymin = lo;
  f.ymax = hi;
  pad_range(f.xmin, f.xmax);
  pad_range(f.ymin, f.ymax);

  std::string out = open_svg(f);
  out += axes(f, "E", "beta (blue), C (green)", "bath thermodynamic profile");
  out += polyline(f, grid, beta, "#1f77b4");
  out += polyline(f, grid, cap, "#2ca02c");
  out += "</svg>\n";
  return out;
}

}  // namespace ethlab::svg
