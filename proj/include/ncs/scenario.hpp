#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ncs/controller.hpp"
#include "ncs/network.hpp"
#include "ncs/plant.hpp"
#include "ncs/reference.hpp"

namespace ncs {

enum class Mode { nominal, no_prediction, delay_independent };

Mode mode_from_name(const std::string& name);
std::string mode_name(Mode m);

// Everything one run needs. Mismatch percentages perturb only the
// simulated plant; controller and predictor keep the nominal model.
struct Scenario {
  ContinuousPlant plant;
  double mismatch_q = 0.0;  // % increase of the static gain
  double mismatch_r = 0.0;  // % increase of the time constant
  TimingConfig timing;
  DualRateGains gains;
  DelayModel delay;
  DropoutModel dropout;
  ReferenceSpec reference;
  double duration = 40.0;
  std::uint64_t seed = 12345;
  Mode mode = Mode::delay_independent;
  double divergence_limit = 1e3;

  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

// Flat key-value file: `section.key = value`, '#' comments.
KeyValues parse_config_file(const std::string& path);
KeyValues parse_config_text(const std::string& text);

Scenario scenario_from_map(const KeyValues& kv);

Scenario load_scenario(const std::string& path,
                       const KeyValues& overrides = {});

}  // namespace ncs
