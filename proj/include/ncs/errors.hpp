#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

// Raised when more consecutive dropouts occurred than the prediction
// horizon of the last received packet covers.
struct PredictionExhausted : std::runtime_error {
  explicit PredictionExhausted(const std::string& what)
      : std::runtime_error(what) {}
};

// Raised by the wire codec on truncated or foreign datagrams.
struct MalformedPacket : std::runtime_error {
  explicit MalformedPacket(const std::string& what)
      : std::runtime_error(what) {}
};

// Raised when tau_max >= NT, i.e. packet disorder cannot be excluded.
struct DisorderGuardViolation : std::runtime_error {
  explicit DisorderGuardViolation(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ncs
