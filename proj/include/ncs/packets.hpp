#pragma once

#include <cstdint>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

// Remote-to-local payload: the PI action for the current sensor period
// followed by the M predicted ones, [v_k, v_{k+1}, ..., v_{k+M}].
struct ControlPacket {
  std::int64_t seq = 0;
  std::vector<double> actions;

  int horizon() const { return static_cast<int>(actions.size()) - 1; }
};

// Local-to-remote payload: output and full state sensed at the period
// boundary.
struct MeasurementPacket {
  std::int64_t seq = 0;
  double y = 0.0;
  Vector x;
};

}  // namespace ncs
