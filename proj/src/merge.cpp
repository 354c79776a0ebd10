#include "arznet/merge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "arznet/errors.hpp"
#include "arznet/numerics.hpp"

namespace arznet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MergeGeometry build_geometry(Speed w1, Speed w2, const RoadParams& out_road, Speed v_out,
                             bool out_vacuum) {
  out_road.validate();
  MergeGeometry g;
  g.w1 = w1;
  g.w2 = w2;
  g.dw = w1 - w2;
  g.dw_zero = std::fabs(g.dw) < 1e-12 * std::max({w1, w2, 1.0});
  g.out_road = out_road;
  g.v_out = v_out;
  g.out_vacuum = out_vacuum;

  const double gamma3 = out_road.gamma;
  const double rho_max = out_road.rho_max;
  const double v_ref = out_road.v_ref;

  g.free_branch.K = std::pow(gamma3 / (gamma3 + 1.0), (gamma3 + 1.0) / gamma3) * rho_max /
                    std::pow(v_ref, 1.0 / gamma3);
  g.free_branch.delta = 0.0;
  g.free_branch.exponent = (gamma3 + 1.0) / gamma3;

  g.congested_branch.K = v_out * rho_max * std::pow(gamma3 / v_ref, 1.0 / gamma3);
  g.congested_branch.delta = -v_out;
  g.congested_branch.exponent = 1.0 / gamma3;

  g.switch_attribute = out_vacuum ? kInf : (gamma3 + 1.0) / gamma3 * v_out;

  if (g.dw_zero) {
    return g;
  }
  if (std::isfinite(g.switch_attribute)) {
    g.p_hat = (g.switch_attribute - w2) / g.dw;
  }
  // The stationary points sit on the free branch iff the relevant attribute
  // is below (2 gamma3 + 1) / gamma3 * v3.
  const Speed critical = out_vacuum ? kInf : (2.0 * gamma3 + 1.0) / gamma3 * v_out;
  if (w2 <= critical) {
    g.p_star = -gamma3 / (2.0 * gamma3 + 1.0) * w2 / g.dw;
  } else {
    g.p_star = -gamma3 / (gamma3 + 1.0) * (w2 - v_out) / g.dw;
  }
  if (w1 <= critical) {
    g.p_star2 = (1.0 - gamma3 * (2.0 * w2 - w1) / g.dw) / (2.0 * gamma3 + 1.0);
  } else {
    g.p_star2 = (1.0 - gamma3 * (w2 - v_out) / g.dw) / (gamma3 + 1.0);
  }
  return g;
}

FluxPair swapped(FluxPair q) { return {q.q2, q.q1}; }

MergeBounds swapped(const MergeBounds& b) {
  return {b.demand2, b.demand1, b.q_tilde2, b.q_tilde1, b.q_star2, b.q_star1, b.tolerance};
}

std::string describe(const char* what, double lo, double hi, double r_lo, double r_hi) {
  std::ostringstream msg;
  msg.precision(17);
  msg << what << ": interval [" << lo << ", " << hi << "], residuals (" << r_lo << ", " << r_hi
      << ")";
  return msg.str();
}

// Solves x = min{cap, max{lower, S(ratio) - fixed}} along a line where the
// other incoming flux is held at `fixed`. `fixed_is_first` selects whether
// the free unknown is q2 (true) or q1 (false).
Flux solve_on_line(const MergeGeometry& g, bool fixed_is_first, Flux fixed, Flux lower, Flux cap,
                   double tol) {
  auto ratio = [&](Flux x) {
    const Flux total = x + fixed;
    if (total <= 0.0) {
      return fixed_is_first ? 0.0 : 1.0;
    }
    return fixed_is_first ? fixed / total : x / total;
  };
  auto residual = [&](Flux x) {
    return std::min(cap, std::max(lower, g.supply_at(ratio(x)) - fixed)) - x;
  };

  lower = std::min(lower, cap);
  const double r_cap = residual(cap);
  if (r_cap >= 0.0) {
    return cap;
  }
  const double r_lower = residual(lower);
  if (r_lower < 0.0) {
    if (r_lower >= -tol) {
      return lower;
    }
    throw NumericalFailure(describe("merge fixed point has no bracket", lower, cap, r_lower, r_cap));
  }
  const auto r = bisect(residual, lower, cap, r_lower, r_cap);
  if (!r.converged || std::fabs(r.residual) > tol) {
    std::ostringstream msg;
    msg << describe("merge fixed point did not converge", lower, cap, r_lower, r_cap)
        << ", final residual " << r.residual << " after " << r.iterations << " iterations";
    throw NumericalFailure(msg.str());
  }
  return r.root;
}

// Second step for w1 <= w2; `b` is in the same frame as `g`.
FluxPair resolve_canonical(const MergeGeometry& g, MergeCase kind, const MergeBounds& b) {
  const double tol = b.tolerance;
  switch (kind) {
    case MergeCase::E1:
      return {b.q_tilde1, b.q_tilde2};
    case MergeCase::E2:
      return {b.demand1, solve_on_line(g, true, b.demand1, b.q_tilde2, b.demand2, tol)};
    case MergeCase::E3:
      return {solve_on_line(g, false, b.demand2, b.q_tilde1, b.demand1, tol), b.demand2};
    case MergeCase::H1a:
      return {b.q_star1, b.q_star2};
    case MergeCase::H1b:
      return {b.demand1, solve_on_line(g, true, b.demand1, b.q_star2, b.demand2, tol)};
    case MergeCase::H2a:
    case MergeCase::H2c:
      return {solve_on_line(g, false, b.demand2, b.q_tilde1, b.demand1, tol), b.demand2};
    case MergeCase::H2b:
      if (b.q_star2 >= b.demand2) {
        return {b.demand1, b.demand2};
      }
      return {b.demand1, solve_on_line(g, true, b.demand1, b.q_star2, b.demand2, tol)};
  }
  return {};
}

} // namespace

Flux SupplyBranch::evaluate(Speed w) const {
  const double base = w + delta;
  return base > 0.0 ? K * std::pow(base, exponent) : 0.0;
}

double SupplyBranch::derivative(Speed w, Speed dw) const {
  const double base = w + delta;
  return base > 0.0 ? K * exponent * std::pow(base, exponent - 1.0) * dw : 0.0;
}

const SupplyBranch& MergeGeometry::branch_at(double p) const {
  return mixed_attribute(p) <= switch_attribute ? free_branch : congested_branch;
}

Flux MergeGeometry::supply_at(double p) const {
  const Speed w = std::max(0.0, mixed_attribute(p));
  return (w <= switch_attribute ? free_branch : congested_branch).evaluate(w);
}

double MergeGeometry::supply_derivative(double p, bool from_above) const {
  const Speed w = mixed_attribute(p);
  bool congested = w > switch_attribute;
  if (w == switch_attribute) {
    congested = (dw > 0.0) == from_above;
  }
  return (congested ? congested_branch : free_branch).derivative(w, dw);
}

MergeGeometry MergeGeometry::mirrored() const {
  return build_geometry(w2, w1, out_road, v_out, out_vacuum);
}

MergeGeometry merge_geometry(Speed w1, Speed w2, const RoadParams& out_road,
                             const TrafficState& out_state) {
  return build_geometry(w1, w2, out_road, out_state.v, out_state.rho < kVacuumDensity);
}

MergeGeometry merge_geometry(const Branch& in1, const Branch& in2, const Branch& out) {
  return merge_geometry(attribute(in1.road, in1.state), attribute(in2.road, in2.state), out.road,
                        out.state);
}

Flux sigma_tilde(const MergeGeometry& geom, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("flux ratio must lie in [0,1], got " + std::to_string(p));
  }
  return geom.supply_at(p);
}

FluxPair fixed_point_ratio(const MergeGeometry& geom, MergeCaseTag tag, const MergeBounds& bounds) {
  if (tag.mirrored) {
    return swapped(resolve_canonical(geom.mirrored(), tag.kind, swapped(bounds)));
  }
  return resolve_canonical(geom, tag.kind, bounds);
}

JunctionSolution solve_merge(const Branch& in1, const Branch& in2, const Branch& out,
                             double priority, MergeDetails* details) {
  if (!(priority > 0.0 && priority < 1.0)) {
    throw DomainError("merge priority must lie in ]0,1[, got " + std::to_string(priority));
  }
  validate_state(in1.state);
  validate_state(in2.state);
  validate_state(out.state);

  const Speed w1 = attribute(in1.road, in1.state);
  const Speed w2 = attribute(in2.road, in2.state);
  const Flux d1 = demand(in1.road, in1.state.rho, w1);
  const Flux d2 = demand(in2.road, in2.state.rho, w2);
  const MergeGeometry geom = merge_geometry(in1, in2, out);

  // Work in the frame where w1 <= w2; w1 > w2 is the mirror image.
  const bool mirrored = !geom.dw_zero && geom.dw > 0.0;
  const MergeGeometry g = mirrored ? geom.mirrored() : geom;
  const double p = mirrored ? 1.0 - priority : priority;
  const Flux dem1 = mirrored ? d2 : d1;
  const Flux dem2 = mirrored ? d1 : d2;

  const Flux s_p = g.supply_at(p);
  const Flux by_demand1 = dem1 / p;
  const Flux by_demand2 = dem2 / (1.0 - p);
  const Flux f_p = std::min({by_demand1, by_demand2, s_p});

  MergeBounds b;
  b.demand1 = dem1;
  b.demand2 = dem2;
  b.q_tilde1 = p * f_p;
  b.q_tilde2 = (1.0 - p) * f_p;
  b.tolerance = flux_tolerance(std::max({d1, d2, g.supply_at(0.0), g.supply_at(1.0)}));

  const bool supply_binds = s_p <= by_demand1 && s_p <= by_demand2;
  const bool demand1_binds = !supply_binds && by_demand1 <= by_demand2;
  const bool easy = g.dw_zero || !g.p_star || p <= *g.p_star;

  MergeCase kind;
  if (easy) {
    kind = supply_binds ? MergeCase::E1 : (demand1_binds ? MergeCase::E2 : MergeCase::E3);
  } else {
    const double p_star = *g.p_star;
    const Flux s_star = g.supply_at(p_star);
    b.q_star1 = p_star * s_star;
    b.q_star2 = (1.0 - p_star) * s_star;
    if (supply_binds && b.q_star2 <= dem2) {
      kind = b.q_star1 <= dem1 ? MergeCase::H1a : MergeCase::H1b;
    } else if (supply_binds) {
      kind = MergeCase::H2a;
    } else {
      kind = demand1_binds ? MergeCase::H2b : MergeCase::H2c;
    }
  }

  const MergeCaseTag tag{kind, mirrored};
  const MergeBounds bounds = mirrored ? swapped(b) : b;
  const FluxPair q = fixed_point_ratio(geom, tag, bounds);

  const Flux q3 = q.q1 + q.q2;
  const double ratio = q3 > 0.0 ? q.q1 / q3 : priority;
  const Speed w_mixed = q3 > 0.0 ? (q.q1 * w1 + q.q2 * w2) / q3 : geom.mixed_attribute(priority);
  const Flux s3 = geom.supply_at(ratio);
  const double tol = bounds.tolerance;

  JunctionSolution sol;
  sol.incoming_count = 2;
  sol.q = {q.q1, q.q2, q3};
  sol.w_out = {w_mixed};
  sol.ratio = ratio;
  sol.merge_case = tag;
  sol.tolerance = tol;
  sol.boundary_states = {
      reconstruct_boundary_state(in1.road, w1, q.q1, Side::Incoming, in1.state, q.q1 >= d1 - tol),
      reconstruct_boundary_state(in2.road, w2, q.q2, Side::Incoming, in2.state, q.q2 >= d2 - tol),
      reconstruct_boundary_state(out.road, w_mixed, q3, Side::Outgoing, out.state, q3 >= s3 - tol),
  };

  if (details != nullptr) {
    details->geometry = geom;
    details->bounds = bounds;
    details->tag = tag;
    details->priority_flux = f_p;
  }
  return sol;
}

} // namespace arznet
