#pragma once

#include <optional>

#include "arznet/fundamental.hpp"
#include "arznet/junction.hpp"

namespace arznet {

/// Closed form K * (w + delta)^exponent of the outgoing supply on one side
/// of the free/congested switch.
struct SupplyBranch {
  double K = 0.0;
  Speed delta = 0.0;
  double exponent = 1.0;

  Flux evaluate(Speed w) const;
  double derivative(Speed w, Speed dw) const;
};

/// Outgoing supply of a 2-to-1 merge as a function of the flux ratio
/// p = q1 / (q1 + q2), together with its critical ratios.
struct MergeGeometry {
  Speed w1 = 0.0;
  Speed w2 = 0.0;
  /// w1 - w2.
  Speed dw = 0.0;
  /// |dw| below 1e-12 * max(w1, w2, 1): treated as equal attributes.
  bool dw_zero = true;

  RoadParams out_road;
  Speed v_out = 0.0;
  /// Outgoing road empty: supply is the capacity for every ratio.
  bool out_vacuum = false;

  /// (gamma3 + 1) / gamma3 * v3; infinite for an empty outgoing road.
  Speed switch_attribute = 0.0;
  SupplyBranch free_branch;
  SupplyBranch congested_branch;

  /// Ratio at which the supply switches branch; absent when dw_zero.
  std::optional<double> p_hat;
  /// Stationary point of q1(p) = p * S(p); absent when dw_zero.
  std::optional<double> p_star;
  /// Stationary point of q2(p) = (1 - p) * S(p); absent when dw_zero.
  std::optional<double> p_star2;

  Speed mixed_attribute(double p) const { return w2 + p * dw; }
  const SupplyBranch& branch_at(double p) const;

  /// Supply at ratio p with no range check; p outside [0,1] evaluates the
  /// analytic continuation (clamped at a zero attribute).
  Flux supply_at(double p) const;

  /// One-sided derivative dS/dp; `from_above` picks the branch right of p.
  double supply_derivative(double p, bool from_above) const;

  /// Same junction with the two incoming roads exchanged.
  MergeGeometry mirrored() const;
};

MergeGeometry merge_geometry(Speed w1, Speed w2, const RoadParams& out_road,
                             const TrafficState& out_state);
MergeGeometry merge_geometry(const Branch& in1, const Branch& in2, const Branch& out);

/// Outgoing supply S(p) for p in [0,1]. Throws DomainError otherwise.
Flux sigma_tilde(const MergeGeometry& geom, double p);

struct FluxPair {
  Flux q1 = 0.0;
  Flux q2 = 0.0;
};

/// Data feeding the second step of the merge construction. q_star is the
/// Pareto end point of the boundary curve: the maximiser of q1 at P* when
/// w1 < w2, of q2 at P** when w1 > w2.
struct MergeBounds {
  Flux demand1 = 0.0;
  Flux demand2 = 0.0;
  Flux q_tilde1 = 0.0;
  Flux q_tilde2 = 0.0;
  Flux q_star1 = 0.0;
  Flux q_star2 = 0.0;
  double tolerance = 0.0;
};

/// Solves the min/max fixed-point system selected by `tag`. All data is in
/// the junction's own frame; mirrored tags are handled internally.
/// Throws NumericalFailure when the residual does not change sign over the
/// search interval or the final residual exceeds the tolerance.
FluxPair fixed_point_ratio(const MergeGeometry& geom, MergeCaseTag tag, const MergeBounds& bounds);

struct MergeDetails {
  MergeGeometry geometry;
  MergeBounds bounds;
  MergeCaseTag tag;
  /// F(P) = min{D1 / P, D2 / (1 - P), S(P)}.
  Flux priority_flux = 0.0;
};

/// Pareto-optimal priority-based 2-to-1 merge. Branch order in the result:
/// in1, in2, out.
JunctionSolution solve_merge(const Branch& in1, const Branch& in2, const Branch& out,
                             double priority, MergeDetails* details = nullptr);

} // namespace arznet
