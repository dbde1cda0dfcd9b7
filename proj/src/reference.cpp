#include "ncs/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace ncs {

void ReferenceSpec::validate() const {
  if (type == Type::steps) {
    if (filter_tc < 0.0)
      throw std::invalid_argument("reference: negative filter constant");
    for (std::size_t i = 1; i < steps.size(); ++i)
      if (steps[i].time < steps[i - 1].time)
        throw std::invalid_argument("reference: steps must be time-ordered");
  } else {
    if (std::abs(amp_x) > rail_x || std::abs(amp_y) > rail_y)
      throw std::invalid_argument(
          "reference: lissajous amplitude exceeds the rail bounds");
    if (ratio_a < 1 || ratio_b < 1 || !(omega > 0.0))
      throw std::invalid_argument("reference: bad lissajous parameters");
  }
}

std::pair<std::function<double(double)>, std::function<double(double)>>
reference_lissajous(const ReferenceSpec& spec) {
  spec.validate();
  const double ax = spec.amp_x, ay = spec.amp_y;
  const double wa = spec.ratio_a * spec.omega, wb = spec.ratio_b * spec.omega;
  const double ph = spec.phase;
  return {[=](double t) { return ax * std::sin(wa * t + ph); },
          [=](double t) { return ay * std::sin(wb * t); }};
}

std::vector<double> sample_reference(const ReferenceSpec& spec, double dt,
                                     int count) {
  spec.validate();
  if (!(dt > 0.0) || count < 0)
    throw std::invalid_argument("sample_reference: bad grid");

  std::vector<double> out(static_cast<std::size_t>(count), 0.0);
  if (spec.type == ReferenceSpec::Type::lissajous) {
    auto [fx, fy] = reference_lissajous(spec);
    const auto& f = (spec.axis == ReferenceSpec::Axis::x) ? fx : fy;
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(i * dt);
    return out;
  }

  // Piecewise-constant program through a first-order filter with the exact
  // discrete pole.
  const double alpha =
      spec.filter_tc > 0.0 ? std::exp(-dt / spec.filter_tc) : 0.0;
  double filtered = 0.0;
  std::size_t next_step = 0;
  double level = 0.0;
  for (int i = 0; i < count; ++i) {
    const double now = i * dt;
    while (next_step < spec.steps.size() &&
           spec.steps[next_step].time <= now + 1e-12) {
      level = spec.steps[next_step].level;
      ++next_step;
    }
    filtered = alpha * filtered + (1.0 - alpha) * level;
    out[static_cast<std::size_t>(i)] = filtered;
  }
  return out;
}

}  // namespace ncs
