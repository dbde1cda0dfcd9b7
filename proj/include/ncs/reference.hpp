#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace ncs {

struct StepSpec {
  double time = 0.0;
  double level = 0.0;
};

// Reference program. Steps are low-pass filtered so the nominal loop stays
// clear of the actuator saturation; the Lissajous pair serves the 2D
// trajectory mode with per-axis rail limits.
struct ReferenceSpec {
  enum class Type { steps, lissajous };
  enum class Axis { x, y };

  Type type = Type::steps;

  std::vector<StepSpec> steps;
  double filter_tc = 0.5;  // seconds; 0 disables the filter

  double amp_x = 0.02;
  double amp_y = 0.015;
  int ratio_a = 3;
  int ratio_b = 2;
  double omega = 0.15707963267948966;  // base rate, one figure per 40 s
  double phase = 1.5707963267948966;
  Axis axis = Axis::x;

  double rail_x = 0.050;
  double rail_y = 0.040;

  void validate() const;
};

// Reference sampled on the basic-period grid.
std::vector<double> sample_reference(const ReferenceSpec& spec, double dt,
                                     int count);

// x(t) = Ax sin(a w t + phase), y(t) = Ay sin(b w t).
std::pair<std::function<double(double)>, std::function<double(double)>>
reference_lissajous(const ReferenceSpec& spec);

}  // namespace ncs
