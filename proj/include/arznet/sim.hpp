#pragma once

// First-order Godunov scheme for the ARZ system on a network of roads.
// Interior cell interfaces use the 1-to-1 junction flux; network nodes use
// the junction Riemann solvers on the adjacent boundary cells. Roads without
// an upstream (downstream) junction are fed (drained) through a ghost cell
// frozen at the road's initial state.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arznet/fundamental.hpp"
#include "arznet/junction.hpp"

namespace arznet {

struct DiscretizedRoad {
  std::string id;
  RoadParams params;
  double length = 1.0;  // km
  std::size_t cells = 0;
  double dx = 0.0;      // km
  std::vector<ConservedState> states;
  /// Initial Riemann datum; ghost cells at open ends stay at this state.
  TrafficState far_field;
};

/// Uniform road at `initial`. Throws DomainError for a non-positive length
/// or zero cells.
DiscretizedRoad make_road(std::string id, const RoadParams& params, double length,
                          std::size_t cells, const TrafficState& initial);

struct NetworkJunction {
  std::string id;
  JunctionSpec spec;
  /// Indices into Network::roads, in the order of spec.incoming/outgoing.
  std::vector<std::size_t> incoming;
  std::vector<std::size_t> outgoing;
};

struct Network {
  std::vector<DiscretizedRoad> roads;
  std::vector<NetworkJunction> junctions;
  /// Junction index at each road end; empty means an open boundary.
  std::vector<std::optional<std::size_t>> upstream_junction;
  std::vector<std::optional<std::size_t>> downstream_junction;
};

/// Wires roads and junctions together. The junction specs refer to roads by
/// id. Throws DomainError for unknown ids, a road attached twice at the same
/// end, or a spec whose road parameters differ from the road's.
Network make_network(std::vector<DiscretizedRoad> roads,
                     std::vector<std::pair<std::string, JunctionSpec>> junctions);

struct InterfaceFlux {
  Flux mass = 0.0;
  double momentum = 0.0;
};

/// Godunov flux between two cells: min{demand(left), supply(modified right)}
/// with the left attribute advected downstream.
InterfaceFlux interface_flux(const Branch& left, const Branch& right);

/// max over cells of max(|lambda1|, lambda2).
double max_wave_speed(const Network& net);

/// cfl * min dx / max_wave_speed; infinite for a network at rest.
double stable_time_step(const Network& net, double cfl);

struct StepFluxes {
  /// Mass fluxes at every interface, road by road, upstream to downstream.
  std::vector<std::vector<InterfaceFlux>> interfaces;
  /// Junction fluxes and carried attributes, per junction per branch.
  std::vector<std::vector<Flux>> junction_q;
  std::vector<std::vector<Speed>> junction_w;
  /// Rates through open boundaries.
  InterfaceFlux inflow;
  InterfaceFlux outflow;
  /// max(|lambda1|, lambda2) over the cells of each road.
  std::vector<double> max_speed;
};

/// Fluxes of the current network state, without updating it.
StepFluxes compute_fluxes(const Network& net);

/// One conservative update of length dt. Throws CflViolation when
/// dt * max_wave_speed exceeds cfl_limit * dx on some road, and
/// NumericalFailure if a density or momentum turns negative.
StepFluxes step(Network& net, double dt, double cfl_limit = 1.0);

struct SimConfig {
  double cfl = 0.5;
  double t_end = 1.0;  // h
  std::size_t output_stride = 100;
  /// Relative change of every interface flux per step below which the run
  /// counts as steady.
  double steady_tolerance = 1e-10;
  std::size_t steady_window = 100;
  bool stop_when_steady = true;

  /// Throws DomainError for cfl outside ]0,1], negative t_end or a zero
  /// stride.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct FluxSample {
  double t = 0.0;
  std::string branch_id;  // "<junction>:<road>"
  Flux q = 0.0;
  Speed w = 0.0;
};

struct LedgerEntry {
  double t = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  double inflow_mass = 0.0;
  double inflow_momentum = 0.0;
  double outflow_mass = 0.0;
  double outflow_momentum = 0.0;

  /// |mass - (initial + inflow - outflow)| / (initial + inflow).
  double mass_imbalance(double initial_mass) const;
  double momentum_imbalance(double initial_momentum) const;
};

struct ProfileRow {
  std::string road_id;
  std::size_t cell = 0;
  Density rho = 0.0;
  Speed v = 0.0;
};

struct SimResult {
  std::vector<FluxSample> flux_series;
  std::vector<LedgerEntry> ledger;
  std::vector<ProfileRow> profiles;
  double initial_mass = 0.0;
  double initial_momentum = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  bool steady = false;
  /// Junction fluxes of the last step (or of the initial state when no step
  /// was taken).
  std::vector<std::vector<Flux>> junction_q;
  std::vector<std::vector<Speed>> junction_w;
  Network final_network;
};

/// Total density integral sum(rho dx) and momentum integral sum(y dx).
double total_mass(const Network& net);
double total_momentum(const Network& net);

/// Advances to config.t_end, or until steady when config.stop_when_steady.
SimResult run(Network net, const SimConfig& config);

void write_flux_series(std::ostream& os, const SimResult& result);
void write_profiles(std::ostream& os, const SimResult& result);
void write_ledger(std::ostream& os, const SimResult& result);

} // namespace arznet
