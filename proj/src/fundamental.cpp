#include "arznet/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "arznet/errors.hpp"

namespace arznet {

namespace {

void require_non_negative(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be finite and non-negative, got " +
                      std::to_string(value));
  }
}

} // namespace

void RoadParams::validate() const {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(rho_max) || !positive(v_ref) || !positive(gamma)) {
    throw DomainError("road parameters must be strictly positive (rho_max=" +
                      std::to_string(rho_max) + ", v_ref=" + std::to_string(v_ref) +
                      ", gamma=" + std::to_string(gamma) + ")");
  }
}

void validate_state(const TrafficState& s) {
  require_non_negative(s.rho, "density");
  require_non_negative(s.v, "speed");
}

Speed pressure(const RoadParams& road, Density rho) {
  require_non_negative(rho, "density");
  return road.v_ref / road.gamma * std::pow(rho / road.rho_max, road.gamma);
}

Speed pressure_derivative(const RoadParams& road, Density rho) {
  require_non_negative(rho, "density");
  if (rho == 0.0 && road.gamma < 1.0) {
    return INFINITY;
  }
  return road.v_ref / road.rho_max * std::pow(rho / road.rho_max, road.gamma - 1.0);
}

Density pressure_inv(const RoadParams& road, Speed value) {
  require_non_negative(value, "pressure value");
  return road.rho_max * std::pow(road.gamma * value / road.v_ref, 1.0 / road.gamma);
}

Density sonic_point(const RoadParams& road, Speed c) {
  require_non_negative(c, "attribute");
  return road.rho_max *
         std::pow(c * road.gamma / (road.v_ref * (1.0 + road.gamma)), 1.0 / road.gamma);
}

Flux capacity(const RoadParams& road, Speed c) {
  // p(sigma(c)) = c / (1 + gamma) in closed form.
  const Density sigma = sonic_point(road, c);
  return c * road.gamma / (1.0 + road.gamma) * sigma;
}

Flux flux_on_curve(const RoadParams& road, Density rho, Speed c) {
  // Zero past the end of the curve, where rounding can leave c - p slightly negative.
  return std::max(0.0, c - pressure(road, rho)) * rho;
}

Flux demand(const RoadParams& road, Density rho, Speed c) {
  require_non_negative(rho, "density");
  require_non_negative(c, "attribute");
  const Density sigma = sonic_point(road, c);
  return rho <= sigma ? flux_on_curve(road, rho, c) : capacity(road, c);
}

Flux supply(const RoadParams& road, Density rho, Speed c) {
  require_non_negative(rho, "density");
  require_non_negative(c, "attribute");
  const Density sigma = sonic_point(road, c);
  return rho <= sigma ? capacity(road, c) : flux_on_curve(road, rho, c);
}

CharacteristicSpeeds eigenvalues(const RoadParams& road, const TrafficState& s) {
  // rho * p'(rho) = gamma * p(rho) for the power law; avoids 0 * inf at vacuum.
  return {s.v - road.gamma * pressure(road, s.rho), s.v};
}

Speed attribute(const RoadParams& road, const TrafficState& s) {
  return s.v + pressure(road, s.rho);
}

ConservedState to_conservative(const RoadParams& road, const TrafficState& s) {
  return {s.rho, s.rho * attribute(road, s)};
}

TrafficState to_primitive(const RoadParams& road, const ConservedState& u) {
  if (u.rho < kVacuumDensity) {
    return {std::max(u.rho, 0.0), road.v_ref};
  }
  const Speed w = u.y / u.rho;
  return {u.rho, std::max(w - pressure(road, u.rho), 0.0)};
}

Speed equilibrium_speed(const RoadParams& road, Density rho) {
  require_non_negative(rho, "density");
  return std::max(road.v_ref * (1.0 - rho / road.rho_max), 0.0);
}

TrafficState equilibrium_state(const RoadParams& road, Density rho) {
  return {rho, equilibrium_speed(road, rho)};
}

Density free_flow_density(const RoadParams& road, Flux q) {
  const Flux q_max = road.rho_max * road.v_ref / 4.0;
  if (!(q >= 0.0) || q > q_max) {
    throw DomainError("desired flux " + std::to_string(q) + " outside [0, " +
                      std::to_string(q_max) + "]");
  }
  // rho^2 / rho_max - rho + q / v_ref = 0, smaller root. The rationalised
  // form avoids cancellation for small q.
  const double disc = std::sqrt(std::max(0.0, 1.0 - q / q_max));
  return 2.0 * q / road.v_ref / (1.0 + disc);
}

} // namespace arznet
