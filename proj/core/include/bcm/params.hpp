#pragma once

#include <stdexcept>
#include <string>

namespace bcm {

/// Deviation threshold and confidence factor of the bounded confidence model.
struct ModelParams {
  double delta = 0.5;
  double w = 0.5;

  ModelParams() = default;
  ModelParams(double delta_, double w_) : delta(delta_), w(w_) { validate(); }

  /// Throws std::invalid_argument unless 0 < delta <= 1 and 0 < w < 1.
  void validate() const {
    if (!(delta > 0.0 && delta <= 1.0)) {
      throw std::invalid_argument("delta must lie in (0, 1], got " + std::to_string(delta));
    }
    if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("w must lie in (0, 1), got " + std::to_string(w));
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

}  // namespace bcm
