#pragma once

// Per-road fundamental diagram of the Aw-Rascle-Zhang model with the
// power-law pressure p(rho) = (v_ref / gamma) * (rho / rho_max)^gamma.
//
// Units are fixed throughout the library: density in veh/km, speed in km/h,
// flux in veh/h. Nothing here converts units.

namespace arznet {

using Density = double;
using Speed = double;
using Flux = double;

/// Densities strictly below this value are vacuum.
inline constexpr Density kVacuumDensity = 1e-10;

struct RoadParams {
  Density rho_max = 0.0;
  Speed v_ref = 0.0;
  double gamma = 0.0;

  /// Throws DomainError unless all three fields are strictly positive
  /// and finite.
  void validate() const;

  friend bool operator==(const RoadParams&, const RoadParams&) = default;
};

/// Primitive state (rho, v).
struct TrafficState {
  Density rho = 0.0;
  Speed v = 0.0;

  friend bool operator==(const TrafficState&, const TrafficState&) = default;
};

/// Conservative pair (rho, y) with y = rho * w.
struct ConservedState {
  Density rho = 0.0;
  double y = 0.0;
};

struct CharacteristicSpeeds {
  Speed lambda1 = 0.0;
  Speed lambda2 = 0.0;
};

Speed pressure(const RoadParams& road, Density rho);
Speed pressure_derivative(const RoadParams& road, Density rho);
Density pressure_inv(const RoadParams& road, Speed value);

/// Density maximising the flux (c - p(rho)) * rho along the curve {w = c}.
Density sonic_point(const RoadParams& road, Speed c);

/// Maximal flux along {w = c}, i.e. the flux at the sonic point.
Flux capacity(const RoadParams& road, Speed c);

/// Flux carried by density rho on the curve {w = c}; may be negative when
/// rho exceeds the jam density of that curve.
Flux flux_on_curve(const RoadParams& road, Density rho, Speed c);

Flux demand(const RoadParams& road, Density rho, Speed c);
Flux supply(const RoadParams& road, Density rho, Speed c);

CharacteristicSpeeds eigenvalues(const RoadParams& road, const TrafficState& s);

/// Lagrangian attribute w = v + p(rho).
Speed attribute(const RoadParams& road, const TrafficState& s);

inline Flux flow(const TrafficState& s) { return s.rho * s.v; }

ConservedState to_conservative(const RoadParams& road, const TrafficState& s);

/// Inverse of to_conservative. Vacuum cells (rho < kVacuumDensity) report
/// v = v_ref, so their attribute is v_ref as well.
TrafficState to_primitive(const RoadParams& road, const ConservedState& u);

/// Equilibrium speed V(rho) = v_ref * (1 - rho / rho_max), clamped at 0.
Speed equilibrium_speed(const RoadParams& road, Density rho);

/// State on the equilibrium curve at the given density.
TrafficState equilibrium_state(const RoadParams& road, Density rho);

/// Free-flow density rho <= rho_max / 2 whose equilibrium flux is q.
/// Throws DomainError when q is negative or above rho_max * v_ref / 4.
Density free_flow_density(const RoadParams& road, Flux q);

/// Throws DomainError for negative or non-finite components.
void validate_state(const TrafficState& s);

} // namespace arznet
