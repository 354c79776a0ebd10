#include "arznet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "arznet/csv.hpp"
#include "arznet/errors.hpp"

namespace arznet {

DiscretizedRoad make_road(std::string id, const RoadParams& params, double length,
                          std::size_t cells, const TrafficState& initial) {
  params.validate();
  validate_state(initial);
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw DomainError("road " + id + ": length must be positive");
  }
  if (cells == 0) {
    throw DomainError("road " + id + ": needs at least one cell");
  }
  DiscretizedRoad road;
  road.id = std::move(id);
  road.params = params;
  road.length = length;
  road.cells = cells;
  road.dx = length / static_cast<double>(cells);
  road.far_field = initial;
  road.states.assign(cells, to_conservative(params, initial));
  return road;
}

Network make_network(std::vector<DiscretizedRoad> roads,
                     std::vector<std::pair<std::string, JunctionSpec>> junctions) {
  Network net;
  net.roads = std::move(roads);
  net.upstream_junction.assign(net.roads.size(), std::nullopt);
  net.downstream_junction.assign(net.roads.size(), std::nullopt);

  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    if (!index.emplace(net.roads[r].id, r).second) {
      throw DomainError("duplicate road id " + net.roads[r].id);
    }
  }
  auto lookup = [&](const std::string& junction, const JunctionRoad& road) {
    const auto it = index.find(road.id);
    if (it == index.end()) {
      throw DomainError("junction " + junction + " refers to unknown road " + road.id);
    }
    if (!(net.roads[it->second].params == road.params)) {
      throw DomainError("junction " + junction + ": parameters of road " + road.id +
                        " differ from the road definition");
    }
    return it->second;
  };

  for (auto& [id, spec] : junctions) {
    spec.validate();
    NetworkJunction nj{id, spec, {}, {}};
    const std::size_t k = net.junctions.size();
    for (const auto& road : spec.incoming) {
      const std::size_t r = lookup(id, road);
      if (net.downstream_junction[r]) {
        throw DomainError("road " + road.id + " ends in more than one junction");
      }
      net.downstream_junction[r] = k;
      nj.incoming.push_back(r);
    }
    for (const auto& road : spec.outgoing) {
      const std::size_t r = lookup(id, road);
      if (net.upstream_junction[r]) {
        throw DomainError("road " + road.id + " starts in more than one junction");
      }
      net.upstream_junction[r] = k;
      nj.outgoing.push_back(r);
    }
    net.junctions.push_back(std::move(nj));
  }
  return net;
}

InterfaceFlux interface_flux(const Branch& left, const Branch& right) {
  const Speed w_left = attribute(left.road, left.state);
  const Flux d = demand(left.road, left.state.rho, w_left);
  const Density rho_tilde = downstream_density(right.road, w_left, right.state);
  const Flux s = supply(right.road, rho_tilde, w_left);
  const Flux q = std::min(d, s);
  return {q, q * w_left};
}

double max_wave_speed(const Network& net) {
  double speed = 0.0;
  for (const auto& road : net.roads) {
    for (const auto& u : road.states) {
      const auto lambda = eigenvalues(road.params, to_primitive(road.params, u));
      speed = std::max({speed, std::fabs(lambda.lambda1), lambda.lambda2});
    }
  }
  return speed;
}

double stable_time_step(const Network& net, double cfl) {
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& road : net.roads) {
    double speed = 0.0;
    for (const auto& u : road.states) {
      const auto lambda = eigenvalues(road.params, to_primitive(road.params, u));
      speed = std::max({speed, std::fabs(lambda.lambda1), lambda.lambda2});
    }
    if (speed > 0.0) {
      dt = std::min(dt, cfl * road.dx / speed);
    }
  }
  return dt;
}

namespace {

// Per-cell quantities reused by both adjacent interfaces.
struct CellData {
  TrafficState prim;
  Speed w = 0.0;
  Density sigma = 0.0;
  Flux cap = 0.0;
  Flux demand = 0.0;
};

void fill_cells(const DiscretizedRoad& road, std::vector<CellData>& cells, double& speed) {
  const RoadParams& rp = road.params;
  const double share = rp.gamma / (1.0 + rp.gamma);
  cells.resize(road.cells);
  speed = 0.0;
  for (std::size_t k = 0; k < road.cells; ++k) {
    CellData& c = cells[k];
    c.prim = to_primitive(rp, road.states[k]);
    const Speed p = pressure(rp, c.prim.rho);
    c.w = c.prim.v + p;
    c.sigma = sonic_point(rp, c.w);
    c.cap = c.w * share * c.sigma;
    c.demand = c.prim.rho <= c.sigma ? c.prim.rho * c.prim.v : c.cap;
    speed = std::max({speed, std::fabs(c.prim.v - rp.gamma * p), c.prim.v});
  }
}

// interface_flux between two cells of the same road, from cached data.
InterfaceFlux interior_flux(const RoadParams& rp, const CellData& left, const CellData& right) {
  Flux s = left.cap;
  if (right.prim.rho >= kVacuumDensity) {
    // p(rho_tilde) = gap, and rho_tilde > sigma iff gap > p(sigma) = w / (1 + gamma).
    const Speed gap = std::max(0.0, left.w - right.prim.v);
    if (gap > left.w / (1.0 + rp.gamma)) s = (left.w - gap) * pressure_inv(rp, gap);
  }
  const Flux q = std::min(left.demand, s);
  return {q, q * left.w};
}

StepFluxes fluxes_of(const Network& net) {
  StepFluxes out;
  out.interfaces.resize(net.roads.size());
  out.max_speed.resize(net.roads.size());
  std::vector<std::vector<CellData>> data(net.roads.size());

  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    const auto& road = net.roads[r];
    auto& faces = out.interfaces[r];
    auto& cells = data[r];
    fill_cells(road, cells, out.max_speed[r]);

    faces.assign(road.cells + 1, InterfaceFlux{});
    for (std::size_t k = 1; k < road.cells; ++k) {
      faces[k] = interior_flux(road.params, cells[k - 1], cells[k]);
    }
    if (!net.upstream_junction[r]) {
      faces.front() = interface_flux({road.params, road.far_field}, {road.params, cells.front().prim});
      out.inflow.mass += faces.front().mass;
      out.inflow.momentum += faces.front().momentum;
    }
    if (!net.downstream_junction[r]) {
      faces.back() = interface_flux({road.params, cells.back().prim}, {road.params, road.far_field});
      out.outflow.mass += faces.back().mass;
      out.outflow.momentum += faces.back().momentum;
    }
  }

  for (const auto& junction : net.junctions) {
    JunctionInput input;
    for (std::size_t r : junction.incoming) input.states.push_back(data[r].back().prim);
    for (std::size_t r : junction.outgoing) input.states.push_back(data[r].front().prim);
    const JunctionSolution sol = solve(junction.spec, input);

    std::vector<Speed> carried;
    for (std::size_t i = 0; i < junction.incoming.size(); ++i) {
      const std::size_t r = junction.incoming[i];
      const Speed w = data[r].back().w;
      out.interfaces[r].back() = {sol.q[i], sol.q[i] * w};
      carried.push_back(w);
    }
    for (std::size_t j = 0; j < junction.outgoing.size(); ++j) {
      const std::size_t r = junction.outgoing[j];
      const Flux q = sol.q[junction.incoming.size() + j];
      out.interfaces[r].front() = {q, q * sol.w_out[j]};
      carried.push_back(sol.w_out[j]);
    }
    out.junction_q.push_back(sol.q);
    out.junction_w.push_back(std::move(carried));
  }
  return out;
}

void check_cfl(const Network& net, const StepFluxes& f, double dt, double cfl_limit) {
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    const auto& road = net.roads[r];
    if (dt * f.max_speed[r] > cfl_limit * road.dx * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "time step " << dt << " violates the CFL bound on road " << road.id << " (dx=" << road.dx
          << ", max speed=" << f.max_speed[r] << ", cfl=" << cfl_limit << ")";
      throw CflViolation(msg.str());
    }
  }
}

void apply(Network& net, const StepFluxes& fluxes, double dt) {
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    auto& road = net.roads[r];
    const auto& faces = fluxes.interfaces[r];
    const double ratio = dt / road.dx;
    const double rho_floor = -1e-12 * road.params.rho_max;
    const double y_floor = rho_floor * road.params.v_ref;
    for (std::size_t k = 0; k < road.cells; ++k) {
      auto& u = road.states[k];
      u.rho -= ratio * (faces[k + 1].mass - faces[k].mass);
      u.y -= ratio * (faces[k + 1].momentum - faces[k].momentum);
      if (u.rho < rho_floor || u.y < y_floor) {
        std::ostringstream msg;
        msg << "negative state on road " << road.id << " cell " << k << ": rho=" << u.rho
            << ", y=" << u.y;
        throw NumericalFailure(msg.str());
      }
    }
  }
}

double time_step(const Network& net, const StepFluxes& f, double cfl) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < net.roads.size(); ++r) {
    if (f.max_speed[r] > 0.0) dt = std::min(dt, cfl * net.roads[r].dx / f.max_speed[r]);
  }
  return dt;
}

} // namespace

StepFluxes compute_fluxes(const Network& net) { return fluxes_of(net); }

StepFluxes step(Network& net, double dt, double cfl_limit) {
  if (!(dt >= 0.0)) {
    throw DomainError("time step must be non-negative");
  }
  StepFluxes fluxes = fluxes_of(net);
  check_cfl(net, fluxes, dt, cfl_limit);
  apply(net, fluxes, dt);
  return fluxes;
}

void SimConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) {
    throw DomainError("cfl must lie in ]0,1]");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw DomainError("t_end must be finite and non-negative");
  }
  if (output_stride == 0) {
    throw DomainError("output stride must be positive");
  }
  if (!(steady_tolerance >= 0.0)) {
    throw DomainError("steady tolerance must be non-negative");
  }
}

double LedgerEntry::mass_imbalance(double initial_mass) const {
  const double reference = std::max(initial_mass + inflow_mass, 1e-300);
  return std::fabs(mass - (initial_mass + inflow_mass - outflow_mass)) / reference;
}

double LedgerEntry::momentum_imbalance(double initial_momentum) const {
  const double reference = std::max(initial_momentum + inflow_momentum, 1e-300);
  return std::fabs(momentum - (initial_momentum + inflow_momentum - outflow_momentum)) / reference;
}

double total_mass(const Network& net) {
  long double sum = 0.0L;
  for (const auto& road : net.roads) {
    long double road_sum = 0.0L;
    for (const auto& u : road.states) road_sum += u.rho;
    sum += road_sum * road.dx;
  }
  return static_cast<double>(sum);
}

double total_momentum(const Network& net) {
  long double sum = 0.0L;
  for (const auto& road : net.roads) {
    long double road_sum = 0.0L;
    for (const auto& u : road.states) road_sum += u.y;
    sum += road_sum * road.dx;
  }
  return static_cast<double>(sum);
}

namespace {

void record_fluxes(SimResult& res, const Network& net, const StepFluxes& f, double t) {
  for (std::size_t k = 0; k < net.junctions.size(); ++k) {
    const auto& junction = net.junctions[k];
    std::size_t b = 0;
    for (std::size_t r : junction.incoming) {
      res.flux_series.push_back({t, junction.id + ":" + net.roads[r].id, f.junction_q[k][b], f.junction_w[k][b]});
      ++b;
    }
    for (std::size_t r : junction.outgoing) {
      res.flux_series.push_back({t, junction.id + ":" + net.roads[r].id, f.junction_q[k][b], f.junction_w[k][b]});
      ++b;
    }
  }
}

double max_relative_change(const StepFluxes& a, const StepFluxes& b) {
  double change = 0.0;
  for (std::size_t r = 0; r < a.interfaces.size(); ++r) {
    for (std::size_t k = 0; k < a.interfaces[r].size(); ++k) {
      const double qa = a.interfaces[r][k].mass;
      const double qb = b.interfaces[r][k].mass;
      change = std::max(change, std::fabs(qa - qb) / std::max(1.0, std::fabs(qb)));
    }
  }
  return change;
}

} // namespace

SimResult run(Network net, const SimConfig& config) {
  config.validate();
  SimResult res;
  res.initial_mass = total_mass(net);
  res.initial_momentum = total_momentum(net);

  long double in_mass = 0.0L, in_y = 0.0L, out_mass = 0.0L, out_y = 0.0L;
  auto ledger_entry = [&](double t) {
    return LedgerEntry{t,
                       total_mass(net),
                       total_momentum(net),
                       static_cast<double>(in_mass),
                       static_cast<double>(in_y),
                       static_cast<double>(out_mass),
                       static_cast<double>(out_y)};
  };

  StepFluxes previous = compute_fluxes(net);
  record_fluxes(res, net, previous, 0.0);
  res.ledger.push_back(ledger_entry(0.0));
  res.junction_q = previous.junction_q;
  res.junction_w = previous.junction_w;

  double t = 0.0;
  std::size_t quiet_steps = 0;
  bool recorded_last = true;
  while (t < config.t_end) {
    StepFluxes f = fluxes_of(net);
    const double dt = std::min(time_step(net, f, config.cfl), config.t_end - t);
    const double t_start = t;
    check_cfl(net, f, dt, config.cfl);
    apply(net, f, dt);
    in_mass += static_cast<long double>(dt) * f.inflow.mass;
    in_y += static_cast<long double>(dt) * f.inflow.momentum;
    out_mass += static_cast<long double>(dt) * f.outflow.mass;
    out_y += static_cast<long double>(dt) * f.outflow.momentum;
    // Guard against t never reaching t_end through rounding.
    t = (config.t_end - (t + dt) <= 1e-15 * config.t_end) ? config.t_end : t + dt;
    ++res.steps;

    if (res.steps > 1 && max_relative_change(f, previous) < config.steady_tolerance) {
      ++quiet_steps;
    } else {
      quiet_steps = 0;
    }
    res.steady = quiet_steps >= config.steady_window;
    res.junction_q = f.junction_q;
    res.junction_w = f.junction_w;

    recorded_last = res.steps % config.output_stride == 0;
    if (recorded_last) {
      record_fluxes(res, net, f, t_start);
      res.ledger.push_back(ledger_entry(t));
    }
    previous = std::move(f);
    if (res.steady && config.stop_when_steady) {
      break;
    }
  }
  if (!recorded_last) {
    record_fluxes(res, net, previous, t);
    res.ledger.push_back(ledger_entry(t));
  }
  res.t_final = t;

  for (const auto& road : net.roads) {
    for (std::size_t k = 0; k < road.cells; ++k) {
      const TrafficState s = to_primitive(road.params, road.states[k]);
      res.profiles.push_back({road.id, k, s.rho, s.v});
    }
  }
  res.final_network = std::move(net);
  return res;
}

void write_flux_series(std::ostream& os, const SimResult& result) {
  os << "t,branch_id,q,w\n";
  for (const auto& s : result.flux_series) {
    os << format_double(s.t) << ',' << s.branch_id << ',' << format_double(s.q) << ','
       << format_double(s.w) << '\n';
  }
}

void write_profiles(std::ostream& os, const SimResult& result) {
  os << "branch_id,cell,rho,v\n";
  for (const auto& p : result.profiles) {
    os << p.road_id << ',' << p.cell << ',' << format_double(p.rho) << ',' << format_double(p.v)
       << '\n';
  }
}

void write_ledger(std::ostream& os, const SimResult& result) {
  os << "t,mass,momentum,inflow_mass,inflow_momentum,outflow_mass,outflow_momentum,"
        "mass_imbalance,momentum_imbalance\n";
  for (const auto& e : result.ledger) {
    os << format_double(e.t) << ',' << format_double(e.mass) << ',' << format_double(e.momentum)
       << ',' << format_double(e.inflow_mass) << ',' << format_double(e.inflow_momentum) << ','
       << format_double(e.outflow_mass) << ',' << format_double(e.outflow_momentum) << ','
       << format_double(e.mass_imbalance(result.initial_mass)) << ','
       << format_double(e.momentum_imbalance(result.initial_momentum)) << '\n';
  }
}

} // namespace arznet
