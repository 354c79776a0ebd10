#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arznet/fundamental.hpp"

namespace arznet {

/// A road adjacent to a junction together with its Riemann datum.
struct Branch {
  RoadParams road;
  TrafficState state;
};

enum class Side { Incoming, Outgoing };

struct JunctionRoad {
  std::string id;
  RoadParams params;

  friend bool operator==(const JunctionRoad&, const JunctionRoad&) = default;
};

struct OneToOne {
  friend bool operator==(const OneToOne&, const OneToOne&) = default;
};

/// 1-to-m diverge; alphas[j] is the share of the incoming flux sent to
/// outgoing road j.
struct Diverge {
  std::vector<double> alphas;
  friend bool operator==(const Diverge&, const Diverge&) = default;
};

/// 2-to-1 merge with priority P for the first incoming road.
struct Merge {
  double priority = 0.5;
  friend bool operator==(const Merge&, const Merge&) = default;
};

using JunctionKind = std::variant<OneToOne, Diverge, Merge>;

struct JunctionSpec {
  std::vector<JunctionRoad> incoming;
  std::vector<JunctionRoad> outgoing;
  JunctionKind kind;

  std::size_t arity() const { return incoming.size() + outgoing.size(); }

  /// Checks arity against the kind, alphas in ]0,1[ summing to one, and
  /// P in ]0,1[. Throws DomainError.
  void validate() const;

  friend bool operator==(const JunctionSpec&, const JunctionSpec&) = default;
};

/// Riemann data, incoming branches first, then outgoing ones.
struct JunctionInput {
  std::vector<TrafficState> states;
};

enum class MergeCase { E1, E2, E3, H1a, H1b, H2a, H2b, H2c };

/// Which branch of the merge construction produced a solution. `mirrored`
/// marks the w1 > w2 situations, which are solved with the roles of the two
/// incoming roads exchanged.
struct MergeCaseTag {
  MergeCase kind = MergeCase::E1;
  bool mirrored = false;

  friend bool operator==(const MergeCaseTag&, const MergeCaseTag&) = default;
};

std::string to_string(MergeCaseTag tag);

struct JunctionSolution {
  std::size_t incoming_count = 0;
  /// Flux per branch (veh/h), same ordering as JunctionInput.
  std::vector<Flux> q;
  /// Attribute carried into each outgoing road.
  std::vector<Speed> w_out;
  /// Boundary states (rho_hat, v_hat) per branch.
  std::vector<TrafficState> boundary_states;
  /// Realised q1 / (q1 + q2); merges only.
  std::optional<double> ratio;
  std::optional<MergeCaseTag> merge_case;
  /// Tolerance the solver worked with, 1e-9 * max(1, flux scale).
  double tolerance = 0.0;

  Flux incoming_total() const;
  Flux outgoing_total() const;
};

/// rho_tilde = p^{-1}(max{0, w_in - v_out}): density behind the contact
/// discontinuity that brings attribute w_in into a road moving at v_out.
Density modified_density(const RoadParams& out_road, Speed w_in, Speed v_out);

/// modified_density applied to the outgoing road's Riemann datum. An empty
/// road (vacuum) imposes no downstream constraint and yields 0.
Density downstream_density(const RoadParams& out_road, Speed w_in, const TrafficState& out_state);

JunctionSolution solve_one_to_one(const Branch& in, const Branch& out);

/// 1-to-m diverge with fixed assignment shares. Shares must lie in ]0,1[ and
/// sum to one; a single outgoing road must go through collapse_degenerate.
JunctionSolution solve_diverge(const Branch& in, std::span<const Branch> outs,
                               std::span<const double> alphas);

/// Replaces a 1-to-1 "diverge" (single outgoing road, share 1) by OneToOne.
JunctionSpec collapse_degenerate(JunctionSpec spec);

/// Dispatches on spec.kind. Validates spec and input first.
JunctionSolution solve(const JunctionSpec& spec, const JunctionInput& input);

/// Solves rho * (w - p(rho)) = q for the boundary state on one branch.
///
/// Incoming roads take the congested root unless the demand bound is
/// active, in which case a free-flow datum is kept and a congested one moves
/// to the sonic point. Outgoing roads take the free-flow root unless the
/// supply bound is active, in which case a congested modified density is
/// kept and the sonic point is used otherwise.
///
/// Throws InfeasibleFlux if q exceeds the capacity of {w = const} by more
/// than the flux tolerance.
TrafficState reconstruct_boundary_state(const RoadParams& road, Speed w, Flux q, Side side,
                                        const TrafficState& ref_state, bool bound_active);

struct WaveViolation {
  std::size_t branch = 0;
  std::string what;
  double value = 0.0;
};

struct AdmissibilityReport {
  std::vector<WaveViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that every wave between the Riemann datum and the boundary state
/// leaves the junction: non-positive speeds on incoming roads, non-negative
/// on outgoing ones. Shock speeds come from Rankine-Hugoniot, rarefaction
/// edges from the first eigenvalue, contacts travel at v.
AdmissibilityReport check_admissibility(const JunctionSpec& spec, const JunctionInput& input,
                                        const JunctionSolution& solution);

struct ConsistencyReport {
  double max_flux_deviation = 0.0;
  double tolerance = 0.0;
  std::optional<MergeCaseTag> merge_case;
};

/// Re-solves the junction from its own boundary states and reports how far
/// the fluxes move.
ConsistencyReport check_consistency(const JunctionSpec& spec, const JunctionInput& input);

} // namespace arznet
