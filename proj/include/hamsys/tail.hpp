#pragma once

#include <optional>

#include "hamsys/model.hpp"

namespace hamsys {

/// Continuation of a windowed measure beyond [-window, window]: a uniform
/// lattice {k * spacing} carrying mass density * spacing per point.
///
/// With spacing = pi / a the lattice reproduces density * L2(R) on PW_a
/// exactly, so any truncated-window computation can be closed off against it.
struct TailModel {
  double spacing = 1.0;
  double density = 1.0;
  double window = 0.0;

  double bandwidth() const;
  /// Lattice indices k with |k * spacing| <= window.
  long last_inner_index() const;
};

/// Spacing from `type` when given (spacing = pi / type), otherwise from the
/// atom span; density from a tapered mass average over the outer half of the window.
TailModel estimate_tail_model(const SpectralMeasure& mu, std::optional<double> type = std::nullopt);

}  // namespace hamsys
