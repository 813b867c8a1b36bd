#pragma once

#include "hvacflex/thermal.hpp"

namespace hvacflex::fixture {

/// C=1, dt=1, R_out=1, eta_ac=1, P in [0, 10], comfort [19, 21], no solar.
inline BuildingModel one_zone(int horizon = 1) {
  BuildingModel b;
  b.id = "one";
  b.horizon = horizon;
  b.dt = 1.0;
  ZoneParams z;
  z.capacitance = 1.0;
  z.r_out = 1.0;
  z.eta_ac = 1.0;
  z.p_min = 0.0;
  z.p_max = 10.0;
  z.setpoint.assign(static_cast<std::size_t>(horizon), 20.0);
  z.tolerance.assign(static_cast<std::size_t>(horizon), 1.0);
  b.zones.push_back(z);
  return b;
}

inline ExogenousEnvelope constant_envelope(int horizon, Vector2 lo, Vector2 hi) {
  ExogenousEnvelope env;
  env.lower.assign(static_cast<std::size_t>(horizon), lo);
  env.upper.assign(static_cast<std::size_t>(horizon), hi);
  return env;
}

/// Outdoor temperature in [28, 32], no radiation.
inline ExogenousEnvelope one_zone_envelope(int horizon = 1) {
  return constant_envelope(horizon, Vector2(28.0, 0.0), Vector2(32.0, 0.0));
}

}  // namespace hvacflex::fixture
