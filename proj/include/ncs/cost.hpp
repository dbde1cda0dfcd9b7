#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncs/scenario.hpp"
#include "ncs/trace.hpp"

namespace ncs {

// Evaluation window(s): half-open index ranges into the shared time grid.
struct Gamma {
  std::vector<std::pair<int, int>> ranges;

  static Gamma full(int count) { return Gamma{{{0, count}}}; }
  bool empty() const { return ranges.empty(); }
};

// sum over Gamma of |y - y_nom|.
double accumulated_error(std::span<const double> y,
                         std::span<const double> y_nom, const Gamma& gamma);

// max(|max y - max y_nom|, |min y - min y_nom|) over Gamma.
double overshoot_deviation(std::span<const double> y,
                           std::span<const double> y_nom, const Gamma& gamma);

struct CostEntry {
  std::string label;
  double e = 0.0;  // accumulated error vs nominal
  double j1 = 0.0;
  double o = 0.0;  // overshoot deviation vs nominal
  double j2 = 0.0;
};

// J indexes of each candidate against the nominal output. The first
// candidate is the designated worst trace and normalizes the rest;
// J = 100 - 100 E/E_worst, so the worst scores 0 and nominal-equal scores
// exactly 100.
std::vector<CostEntry> cost_indexes(
    std::span<const double> y_nom,
    const std::vector<std::pair<std::string, std::span<const double>>>&
        candidates,
    const Gamma& gamma);

struct SweepCell {
  double q = 0.0;
  double r = 0.0;
  double e_w = 0.0;
  double j3 = 0.0;
  double o_w = 0.0;
  double j4 = 0.0;
  bool diverged = false;
};

// Mismatch grid in delay-independent mode, one run per (q, r) cell with a
// shared seed. The (0, 0) run provides the nominal output, the
// (q_max, r_max) corner normalizes J3/J4.
std::vector<SweepCell> sweep_mismatch(const Scenario& base,
                                      std::span<const double> q_values,
                                      std::span<const double> r_values,
                                      const Gamma& gamma = {});

void write_cost_csv(const std::string& path,
                    const std::vector<CostEntry>& entries);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells);

}  // namespace ncs
