#include "arznet/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>

#include "arznet/csv.hpp"
#include "arznet/errors.hpp"
#include "arznet/merge.hpp"
#include "arznet/oracle.hpp"

namespace arznet {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InfeasibleFlux& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CflViolation& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ParseError(path.string() + ": cannot open for writing");
  }
  return os;
}

std::size_t only_merge(const Scenario& s) {
  if (s.junctions.size() != 1 || !std::holds_alternative<Merge>(s.junctions.front().kind)) {
    throw DomainError("scenario must contain exactly one merge junction");
  }
  return 0;
}

const char* kind_name(const JunctionKind& kind) {
  if (std::holds_alternative<OneToOne>(kind)) return "one_to_one";
  if (std::holds_alternative<Diverge>(kind)) return "diverge";
  return "merge";
}

} // namespace

void SimOverrides::apply(Scenario& scenario) const {
  if (cfl) scenario.sim.cfl = *cfl;
  if (t_end) scenario.sim.t_end = *t_end;
  if (cells) {
    for (auto& r : scenario.roads) r.cells = *cells;
  }
  scenario.validate();
}

unsigned thread_hint() {
  if (const char* env = std::getenv("ARZNET_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) {
      return static_cast<unsigned>(std::min(n, 1024L));
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_solve(const fs::path& scenario_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load_scenario(scenario_path);
    if (s.junctions.size() != 1) {
      throw DomainError("solve needs a scenario with exactly one junction, found " +
                        std::to_string(s.junctions.size()));
    }
    const JunctionConfig& j = s.junctions.front();
    const JunctionSpec spec = junction_spec(s, 0);
    const JunctionInput input = junction_input(s, 0);
    const JunctionSolution sol = solve(spec, input);

    const auto old_precision = out.precision(10);
    out << "junction " << j.id << " (" << kind_name(j.kind) << ")\n";
    if (sol.merge_case) out << "case " << to_string(*sol.merge_case) << '\n';
    out << "q = (";
    for (std::size_t i = 0; i < sol.q.size(); ++i) out << (i ? ", " : "") << sol.q[i];
    out << ")\n";
    out << "w_out = (";
    for (std::size_t i = 0; i < sol.w_out.size(); ++i) out << (i ? ", " : "") << sol.w_out[i];
    out << ")\n";
    if (sol.ratio) out << "ratio = (" << *sol.ratio << ", " << 1.0 - *sol.ratio << ")\n";
    out << "boundary states:\n";
    for (std::size_t i = 0; i < sol.boundary_states.size(); ++i) {
      const bool incoming = i < spec.incoming.size();
      const std::string& road = incoming ? j.incoming[i] : j.outgoing[i - spec.incoming.size()];
      out << "  " << (incoming ? "in  " : "out ") << road << ": rho = " << sol.boundary_states[i].rho
          << ", v = " << sol.boundary_states[i].v << '\n';
    }
    out.precision(old_precision);
    return kExitOk;
  });
}

int cmd_simulate(const fs::path& scenario_path, const fs::path& out_dir, const SimOverrides& overrides,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario s = load_scenario(scenario_path);
    overrides.apply(s);
    const SimResult res = run(build_network(s), s.sim);

    fs::create_directories(out_dir);
    {
      auto os = open_output(out_dir / "flux_series.csv");
      write_flux_series(os, res);
    }
    {
      auto os = open_output(out_dir / "profiles.csv");
      write_profiles(os, res);
    }
    {
      auto os = open_output(out_dir / "ledger.csv");
      write_ledger(os, res);
    }

    double mass_err = 0.0, momentum_err = 0.0;
    for (const auto& e : res.ledger) {
      mass_err = std::max(mass_err, e.mass_imbalance(res.initial_mass));
      momentum_err = std::max(momentum_err, e.momentum_imbalance(res.initial_momentum));
    }
    const auto old_precision = out.precision(10);
    out << "t = " << res.t_final << " h after " << res.steps << " steps, "
        << (res.steady ? "steady" : "not steady") << '\n';
    for (std::size_t k = 0; k < s.junctions.size(); ++k) {
      out << "junction " << s.junctions[k].id << ": q = (";
      for (std::size_t i = 0; i < res.junction_q[k].size(); ++i) {
        out << (i ? ", " : "") << res.junction_q[k][i];
      }
      out << ")\n";
    }
    out << "ledger: max relative imbalance mass " << mass_err << ", momentum " << momentum_err << '\n';
    out.precision(old_precision);
    return kExitOk;
  });
}

std::vector<CapacityDropRow> capacity_drop(const Scenario& base, std::span<const double> sweep,
                                           bool direct, unsigned threads) {
  const std::size_t k = only_merge(base);
  const JunctionConfig& j = base.junctions[k];
  const RoadConfig& road2 = base.road(j.incoming[1]);
  const Flux cap2 = road2.params.rho_max * road2.params.v_ref / 4.0;
  for (double q : sweep) {
    if (!(q >= 0.0 && q <= cap2)) {
      throw DomainError("sweep value " + format_double(q) + " outside [0, " + format_double(cap2) +
                        "] for road " + road2.id);
    }
  }

  std::vector<CapacityDropRow> rows(sweep.size());
  auto one = [&](std::size_t i) {
    Scenario s = base;
    RoadConfig& r2 = s.road(j.incoming[1]);
    r2.rho0.reset();
    r2.v0.reset();
    r2.q_desired = sweep[i];

    CapacityDropRow row;
    row.desired1 = flow(s.road(j.incoming[0]).initial_state());
    row.desired2 = sweep[i];
    std::vector<Flux> q;
    if (direct) {
      q = solve(junction_spec(s, k), junction_input(s, k)).q;
    } else {
      const SimResult res = run(build_network(s), s.sim);
      q = res.junction_q[k];
      row.steady = res.steady;
    }
    row.actual1 = q[0];
    row.actual2 = q[1];
    row.outflow = q[2];
    const double p = std::get<Merge>(s.junctions[k].kind).priority;
    row.ratio1 = row.outflow > 0.0 ? row.actual1 / row.outflow : p;
    row.ratio2 = row.outflow > 0.0 ? row.actual2 / row.outflow : 1.0 - p;
    rows[i] = row;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sweep.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < sweep.size(); ++i) one(i);
    return rows;
  }
  // Rows are independent; a worker stops at the first exception and the
  // earliest failing row is rethrown.
  std::vector<std::exception_ptr> errors(sweep.size());
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < sweep.size(); i += workers) {
          try {
            one(i);
          } catch (...) {
            errors[i] = std::current_exception();
            return;
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_capacity_drop_csv(std::ostream& os, std::span<const CapacityDropRow> rows) {
  os << "desired_q1,actual_q1,desired_q2,actual_q2,outflow,ratio1,ratio2\n";
  for (const auto& r : rows) {
    os << format_double(r.desired1) << ',' << format_double(r.actual1) << ','
       << format_double(r.desired2) << ',' << format_double(r.actual2) << ','
       << format_double(r.outflow) << ',' << format_double(r.ratio1) << ','
       << format_double(r.ratio2) << '\n';
  }
}

void print_capacity_drop_table(std::ostream& os, std::span<const CapacityDropRow> rows) {
  os << "  road 1 desired   actual |  road 2 desired   actual |  outflow | ratio 1  ratio 2\n";
  for (const auto& r : rows) {
    os << std::setw(16) << format_fixed(r.desired1, 1) << std::setw(9) << format_fixed(r.actual1, 1)
       << " |" << std::setw(16) << format_fixed(r.desired2, 1) << std::setw(9)
       << format_fixed(r.actual2, 1) << " |" << std::setw(9) << format_fixed(r.outflow, 1) << " |"
       << std::setw(8) << format_fixed(r.ratio1, 3) << std::setw(9) << format_fixed(r.ratio2, 3)
       << (r.steady ? "" : "  (not steady)") << '\n';
  }
}

int cmd_capacity_drop(const fs::path& scenario_path, const std::optional<fs::path>& out_dir,
                      std::span<const double> sweep, bool direct, const SimOverrides& overrides,
                      std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario s = load_scenario(scenario_path);
    overrides.apply(s);
    const auto rows = capacity_drop(s, sweep, direct, thread_hint());
    if (out_dir) {
      fs::create_directories(*out_dir);
      auto os = open_output(*out_dir / "capacity_drop.csv");
      write_capacity_drop_csv(os, rows);
    }
    print_capacity_drop_table(out, rows);
    for (const auto& r : rows) {
      if (!r.steady) {
        err << "warning: desired flux " << format_double(r.desired2)
            << " did not reach a steady state before t_end\n";
      }
    }
    return kExitOk;
  });
}

int cmd_pareto_dump(const fs::path& scenario_path, std::size_t grid,
                    const std::optional<fs::path>& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (grid == 0) {
      throw DomainError("grid resolution must be positive");
    }
    const Scenario s = load_scenario(scenario_path);
    const std::size_t k = only_merge(s);
    const JunctionSpec spec = junction_spec(s, k);
    const JunctionInput input = junction_input(s, k);
    const Branch in1{spec.incoming[0].params, input.states[0]};
    const Branch in2{spec.incoming[1].params, input.states[1]};
    const Branch road3{spec.outgoing[0].params, input.states[2]};

    MergeDetails details;
    const JunctionSolution sol =
        solve_merge(in1, in2, road3, std::get<Merge>(spec.kind).priority, &details);
    std::vector<oracle::Marker> markers{
        {"solution", {sol.q[0], sol.q[1]}},
        {"q_tilde", {details.bounds.q_tilde1, details.bounds.q_tilde2}},
    };
    const auto& g = details.geometry;
    if (g.p_star && *g.p_star >= 0.0 && *g.p_star <= 1.0) {
      const Flux s_star = g.supply_at(*g.p_star);
      markers.push_back({"q_star", {*g.p_star * s_star, (1.0 - *g.p_star) * s_star}});
    }

    const auto ctx = oracle::make_merge_context(in1, in2, road3);
    const auto sample = oracle::sample_pareto(ctx, grid, thread_hint());
    if (out_dir) {
      fs::create_directories(*out_dir);
      auto os = open_output(*out_dir / "pareto.csv");
      oracle::write_csv(os, sample, ctx, markers);
    } else {
      oracle::write_csv(out, sample, ctx, markers);
    }
    return kExitOk;
  });
}

} // namespace arznet
