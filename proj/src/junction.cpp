#include "arznet/junction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "arznet/errors.hpp"
#include "arznet/merge.hpp"
#include "arznet/numerics.hpp"

namespace arznet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// State on the curve {w = const} at density rho.
TrafficState on_curve(const RoadParams& road, Speed w, Density rho) {
  return {rho, std::max(w - pressure(road, rho), 0.0)};
}

// Root of rho * (w - p(rho)) = q on the free-flow (rho <= sigma) or the
// congested (rho >= sigma) side of the curve.
Density root_on_curve(const RoadParams& road, Speed w, Flux q, bool congested) {
  const Density sigma = sonic_point(road, w);
  const Flux cap = capacity(road, w);
  if (q >= cap) {
    return sigma;
  }
  if (q <= 0.0) {
    return congested ? pressure_inv(road, w) : 0.0;
  }
  auto f = [&](Density rho) { return flux_on_curve(road, rho, w) - q; };
  const Density lo = congested ? sigma : 0.0;
  const Density hi = congested ? pressure_inv(road, w) : sigma;
  const auto r = bisect(f, lo, hi, f(lo), f(hi));
  return r.root;
}

} // namespace

std::string to_string(MergeCaseTag tag) {
  static constexpr const char* names[] = {"E1", "E2", "E3", "H1a", "H1b", "H2a", "H2b", "H2c"};
  std::string s = names[static_cast<int>(tag.kind)];
  if (tag.mirrored) {
    s += "'";
  }
  return s;
}

Flux JunctionSolution::incoming_total() const {
  return std::accumulate(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(incoming_count), 0.0);
}

Flux JunctionSolution::outgoing_total() const {
  return std::accumulate(q.begin() + static_cast<std::ptrdiff_t>(incoming_count), q.end(), 0.0);
}

void JunctionSpec::validate() const {
  for (const auto& r : incoming) r.params.validate();
  for (const auto& r : outgoing) r.params.validate();
  std::visit(overloaded{
                 [&](const OneToOne&) {
                   if (incoming.size() != 1 || outgoing.size() != 1) {
                     throw DomainError("1-to-1 junction needs exactly one incoming and one outgoing road");
                   }
                 },
                 [&](const Diverge& d) {
                   if (incoming.size() != 1 || outgoing.empty()) {
                     throw DomainError("diverge needs one incoming and at least one outgoing road");
                   }
                   if (d.alphas.size() != outgoing.size()) {
                     throw DomainError("diverge needs one assignment share per outgoing road");
                   }
                   double sum = 0.0;
                   for (double a : d.alphas) {
                     if (!(a > 0.0 && a < 1.0)) {
                       throw DomainError("assignment shares must lie in ]0,1[, got " + std::to_string(a));
                     }
                     sum += a;
                   }
                   if (std::fabs(sum - 1.0) > 1e-12) {
                     throw DomainError("assignment shares must sum to 1, got " + std::to_string(sum));
                   }
                 },
                 [&](const Merge& m) {
                   if (incoming.size() != 2 || outgoing.size() != 1) {
                     throw DomainError("merge needs two incoming roads and one outgoing road");
                   }
                   if (!(m.priority > 0.0 && m.priority < 1.0)) {
                     throw DomainError("merge priority must lie in ]0,1[, got " + std::to_string(m.priority));
                   }
                 },
             },
             kind);
}

Density modified_density(const RoadParams& out_road, Speed w_in, Speed v_out) {
  if (!(w_in >= 0.0) || !(v_out >= 0.0)) {
    throw DomainError("modified density needs non-negative attribute and speed");
  }
  return pressure_inv(out_road, std::max(0.0, w_in - v_out));
}

Density downstream_density(const RoadParams& out_road, Speed w_in, const TrafficState& out_state) {
  if (out_state.rho < kVacuumDensity) {
    return 0.0;
  }
  return modified_density(out_road, w_in, out_state.v);
}

TrafficState reconstruct_boundary_state(const RoadParams& road, Speed w, Flux q, Side side,
                                        const TrafficState& ref_state, bool bound_active) {
  if (q < 0.0) {
    throw DomainError("boundary flux must be non-negative");
  }
  const Flux cap = capacity(road, w);
  if (q > cap + flux_tolerance(cap)) {
    std::ostringstream msg;
    msg << "flux " << q << " exceeds the capacity " << cap << " of the curve w=" << w;
    throw InfeasibleFlux(msg.str());
  }
  const Density sigma = sonic_point(road, w);

  if (side == Side::Incoming) {
    if (!bound_active) {
      return on_curve(road, w, root_on_curve(road, w, q, /*congested=*/true));
    }
    if (ref_state.rho <= sigma) {
      return ref_state;
    }
    return on_curve(road, w, sigma);
  }

  if (!bound_active) {
    return on_curve(road, w, root_on_curve(road, w, q, /*congested=*/false));
  }
  const Density rho_tilde = downstream_density(road, w, ref_state);
  if (rho_tilde > sigma) {
    return on_curve(road, w, rho_tilde);
  }
  return on_curve(road, w, sigma);
}

JunctionSolution solve_one_to_one(const Branch& in, const Branch& out) {
  validate_state(in.state);
  validate_state(out.state);
  const Speed w1 = attribute(in.road, in.state);
  const Flux d1 = demand(in.road, in.state.rho, w1);
  const Density rho_tilde = downstream_density(out.road, w1, out.state);
  const Flux s2 = supply(out.road, rho_tilde, w1);
  const Flux q = std::min(d1, s2);
  const double tol = flux_tolerance(std::max(d1, s2));

  JunctionSolution sol;
  sol.incoming_count = 1;
  sol.q = {q, q};
  sol.w_out = {w1};
  sol.tolerance = tol;
  sol.boundary_states = {
      reconstruct_boundary_state(in.road, w1, q, Side::Incoming, in.state, q >= d1 - tol),
      reconstruct_boundary_state(out.road, w1, q, Side::Outgoing, out.state, q >= s2 - tol),
  };
  return sol;
}

JunctionSolution solve_diverge(const Branch& in, std::span<const Branch> outs,
                               std::span<const double> alphas) {
  if (outs.empty() || outs.size() != alphas.size()) {
    throw DomainError("diverge needs one assignment share per outgoing road");
  }
  double alpha_sum = 0.0;
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw DomainError("degenerate assignment share " + std::to_string(a) +
                        "; collapse the junction to 1-to-1 instead");
    }
    alpha_sum += a;
  }
  if (std::fabs(alpha_sum - 1.0) > 1e-12) {
    throw DomainError("assignment shares must sum to 1");
  }
  validate_state(in.state);
  for (const auto& b : outs) validate_state(b.state);

  const Speed w1 = attribute(in.road, in.state);
  const Flux d1 = demand(in.road, in.state.rho, w1);
  std::vector<Flux> supplies(outs.size());
  Flux q1 = d1;
  double scale = d1;
  for (std::size_t j = 0; j < outs.size(); ++j) {
    const Density rho_tilde = downstream_density(outs[j].road, w1, outs[j].state);
    supplies[j] = supply(outs[j].road, rho_tilde, w1);
    q1 = std::min(q1, supplies[j] / alphas[j]);
    scale = std::max(scale, supplies[j]);
  }
  const double tol = flux_tolerance(scale);

  // The incoming flux is re-summed from the shares so that mass balances
  // exactly in floating point; the change is at rounding level.
  std::vector<Flux> out_q(outs.size());
  for (std::size_t j = 0; j < outs.size(); ++j) out_q[j] = alphas[j] * q1;
  q1 = std::accumulate(out_q.begin(), out_q.end(), 0.0);

  JunctionSolution sol;
  sol.incoming_count = 1;
  sol.tolerance = tol;
  sol.q.push_back(q1);
  sol.boundary_states.push_back(
      reconstruct_boundary_state(in.road, w1, q1, Side::Incoming, in.state, q1 >= d1 - tol));
  for (std::size_t j = 0; j < outs.size(); ++j) {
    sol.q.push_back(out_q[j]);
    sol.w_out.push_back(w1);
    sol.boundary_states.push_back(reconstruct_boundary_state(
        outs[j].road, w1, out_q[j], Side::Outgoing, outs[j].state, out_q[j] >= supplies[j] - tol));
  }
  return sol;
}

JunctionSpec collapse_degenerate(JunctionSpec spec) {
  if (const auto* d = std::get_if<Diverge>(&spec.kind)) {
    if (spec.incoming.size() == 1 && spec.outgoing.size() == 1 && d->alphas.size() == 1 &&
        d->alphas.front() == 1.0) {
      spec.kind = OneToOne{};
    }
  }
  return spec;
}

JunctionSolution solve(const JunctionSpec& spec, const JunctionInput& input) {
  spec.validate();
  if (input.states.size() != spec.arity()) {
    throw DomainError("junction input has " + std::to_string(input.states.size()) +
                      " states, expected " + std::to_string(spec.arity()));
  }
  std::vector<Branch> branches;
  branches.reserve(spec.arity());
  for (std::size_t i = 0; i < spec.incoming.size(); ++i) {
    branches.push_back({spec.incoming[i].params, input.states[i]});
  }
  for (std::size_t j = 0; j < spec.outgoing.size(); ++j) {
    branches.push_back({spec.outgoing[j].params, input.states[spec.incoming.size() + j]});
  }
  return std::visit(overloaded{
                        [&](const OneToOne&) { return solve_one_to_one(branches[0], branches[1]); },
                        [&](const Diverge& d) {
                          return solve_diverge(branches[0], std::span(branches).subspan(1), d.alphas);
                        },
                        [&](const Merge& m) {
                          return solve_merge(branches[0], branches[1], branches[2], m.priority);
                        },
                    },
                    spec.kind);
}

AdmissibilityReport check_admissibility(const JunctionSpec& spec, const JunctionInput& input,
                                        const JunctionSolution& solution) {
  AdmissibilityReport report;
  const std::size_t n_in = spec.incoming.size();
  auto params_of = [&](std::size_t i) -> const RoadParams& {
    return i < n_in ? spec.incoming[i].params : spec.outgoing[i - n_in].params;
  };
  auto flag = [&](std::size_t i, std::string what, double value) {
    report.violations.push_back({i, std::move(what), value});
  };

  for (std::size_t i = 0; i < spec.arity(); ++i) {
    const RoadParams& road = params_of(i);
    const TrafficState& datum = input.states[i];
    const TrafficState& hat = solution.boundary_states[i];
    const double speed_tol = 1e-8 * std::max(1.0, road.v_ref);
    const double flux_tol = std::max(solution.tolerance, flux_tolerance(road.rho_max * road.v_ref));
    const double rho_tol = 1e-12 * road.rho_max;

    if (std::fabs(flow(hat) - solution.q[i]) > flux_tol) {
      flag(i, "boundary state does not carry the junction flux", flow(hat) - solution.q[i]);
    }

    if (i < n_in) {
      // (P1): datum -> boundary state along the first family, speeds <= 0.
      const Speed w = attribute(road, datum);
      if (std::fabs(attribute(road, hat) - w) > 1e-9 * std::max(1.0, w)) {
        flag(i, "incoming boundary state leaves the first-family curve", attribute(road, hat) - w);
        continue;
      }
      if (std::fabs(hat.rho - datum.rho) <= rho_tol) {
        continue;
      }
      if (hat.rho > datum.rho) {
        const double s = (flow(hat) - flow(datum)) / (hat.rho - datum.rho);
        if (s > speed_tol) flag(i, "incoming shock moves downstream", s);
      } else {
        const double edge = eigenvalues(road, hat).lambda1;
        if (edge > speed_tol) flag(i, "incoming rarefaction edge moves downstream", edge);
      }
      continue;
    }

    // (P2): boundary state -> datum, 1-wave to the modified state then a
    // contact at the datum speed; all speeds >= 0.
    const std::size_t j = i - n_in;
    const Speed w_hat = solution.w_out[j];
    if (std::fabs(attribute(road, hat) - w_hat) > 1e-9 * std::max(1.0, w_hat)) {
      flag(i, "outgoing boundary state does not carry the mixed attribute", attribute(road, hat) - w_hat);
      continue;
    }
    if (datum.rho >= kVacuumDensity && datum.v < -speed_tol) {
      flag(i, "contact discontinuity moves upstream", datum.v);
    }
    const Density rho_mid = downstream_density(road, w_hat, datum);
    if (std::fabs(hat.rho - rho_mid) <= rho_tol) {
      continue;
    }
    if (hat.rho < rho_mid) {
      const TrafficState mid = on_curve(road, w_hat, rho_mid);
      const double s = (flow(mid) - flow(hat)) / (rho_mid - hat.rho);
      if (s < -speed_tol) flag(i, "outgoing shock moves upstream", s);
    } else {
      const double edge = eigenvalues(road, hat).lambda1;
      if (edge < -speed_tol) flag(i, "outgoing rarefaction edge moves upstream", edge);
    }
  }
  return report;
}

ConsistencyReport check_consistency(const JunctionSpec& spec, const JunctionInput& input) {
  const JunctionSolution first = solve(spec, input);
  const JunctionSolution second = solve(spec, JunctionInput{first.boundary_states});
  ConsistencyReport report;
  report.tolerance = first.tolerance;
  report.merge_case = first.merge_case;
  for (std::size_t i = 0; i < first.q.size(); ++i) {
    report.max_flux_deviation = std::max(report.max_flux_deviation, std::fabs(second.q[i] - first.q[i]));
  }
  return report;
}

} // namespace arznet
