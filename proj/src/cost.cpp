#include "ncs/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ncs/simulation.hpp"

namespace ncs {

namespace {

void check_window(std::span<const double> y, std::span<const double> y_nom,
                  const Gamma& gamma) {
  if (y.size() != y_nom.size())
    throw std::invalid_argument("cost: traces must share the time grid");
  for (auto [b, e] : gamma.ranges)
    if (b < 0 || e > static_cast<int>(y.size()) || b >= e)
      throw std::invalid_argument("cost: bad evaluation window");
}

}  // namespace

double accumulated_error(std::span<const double> y,
                         std::span<const double> y_nom, const Gamma& gamma) {
  check_window(y, y_nom, gamma);
  double total = 0.0;
  for (auto [b, e] : gamma.ranges)
    for (int i = b; i < e; ++i)
      total += std::abs(y[static_cast<std::size_t>(i)] -
                        y_nom[static_cast<std::size_t>(i)]);
  return total;
}

double overshoot_deviation(std::span<const double> y,
                           std::span<const double> y_nom, const Gamma& gamma) {
  check_window(y, y_nom, gamma);
  double max_y = -std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_n = max_y, min_n = min_y;
  for (auto [b, e] : gamma.ranges)
    for (int i = b; i < e; ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      const double ni = y_nom[static_cast<std::size_t>(i)];
      max_y = std::max(max_y, yi);
      min_y = std::min(min_y, yi);
      max_n = std::max(max_n, ni);
      min_n = std::min(min_n, ni);
    }
  return std::max(std::abs(max_y - max_n), std::abs(min_y - min_n));
}

namespace {

double improvement(double value, double worst) {
  if (worst == 0.0) return value == 0.0 ? 100.0 : 0.0;
  return 100.0 - 100.0 * value / worst;
}

}  // namespace

std::vector<CostEntry> cost_indexes(
    std::span<const double> y_nom,
    const std::vector<std::pair<std::string, std::span<const double>>>&
        candidates,
    const Gamma& gamma) {
  if (candidates.empty())
    throw std::invalid_argument("cost: designated worst trace missing");
  const Gamma g = gamma.empty()
                      ? Gamma::full(static_cast<int>(y_nom.size()))
                      : gamma;

  std::vector<CostEntry> out;
  out.reserve(candidates.size());
  const double e_worst = accumulated_error(candidates[0].second, y_nom, g);
  const double o_worst = overshoot_deviation(candidates[0].second, y_nom, g);
  for (const auto& [label, y] : candidates) {
    CostEntry entry;
    entry.label = label;
    entry.e = accumulated_error(y, y_nom, g);
    entry.o = overshoot_deviation(y, y_nom, g);
    entry.j1 = improvement(entry.e, e_worst);
    entry.j2 = improvement(entry.o, o_worst);
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<SweepCell> sweep_mismatch(const Scenario& base,
                                      std::span<const double> q_values,
                                      std::span<const double> r_values,
                                      const Gamma& gamma) {
  if (q_values.empty() || r_values.empty())
    throw std::invalid_argument("sweep: empty grid");

  auto run_cell = [&](double q, double r) {
    Scenario sc = base;
    sc.mode = Mode::delay_independent;
    sc.mismatch_q = q;
    sc.mismatch_r = r;
    return run_simulation(sc);
  };

  // Nominal output comes from the exact-model run.
  const SimulationTrace nominal = run_cell(0.0, 0.0);
  std::vector<double> y_nom;
  y_nom.reserve(nominal.rows.size());
  for (const auto& row : nominal.rows) y_nom.push_back(row.y);
  const Gamma g = gamma.empty() ? Gamma::full(static_cast<int>(y_nom.size()))
                                : gamma;

  struct RawCell {
    double q, r, e, o;
    bool diverged;
  };
  std::vector<RawCell> raw;
  for (double r : r_values)
    for (double q : q_values) {
      const SimulationTrace tr =
          (q == 0.0 && r == 0.0) ? nominal : run_cell(q, r);
      std::vector<double> y;
      y.reserve(tr.rows.size());
      for (const auto& row : tr.rows) y.push_back(row.y);
      raw.push_back({q, r, accumulated_error(y, y_nom, g),
                     overshoot_deviation(y, y_nom, g), tr.diverged});
    }

  const double worst_q = q_values.back();
  const double worst_r = r_values.back();
  double e_worst = 0.0, o_worst = 0.0;
  for (const auto& c : raw)
    if (c.q == worst_q && c.r == worst_r) {
      e_worst = c.e;
      o_worst = c.o;
    }

  std::vector<SweepCell> out;
  for (const auto& c : raw)
    out.push_back({c.q, c.r, c.e, improvement(c.e, e_worst), c.o,
                   improvement(c.o, o_worst), c.diverged});
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_cost_csv(const std::string& path,
                    const std::vector<CostEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "label,e_y,j1,o_y,j2\n";
  for (const auto& e : entries)
    os << e.label << ',' << fmt(e.e) << ',' << fmt(e.j1) << ',' << fmt(e.o)
       << ',' << fmt(e.j2) << '\n';
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "q,r,e_w,j3,o_w,j4,diverged\n";
  for (const auto& c : cells)
    os << fmt(c.q) << ',' << fmt(c.r) << ',' << fmt(c.e_w) << ',' << fmt(c.j3)
       << ',' << fmt(c.o_w) << ',' << fmt(c.j4) << ',' << (c.diverged ? 1 : 0)
       << '\n';
}

}  // namespace ncs
