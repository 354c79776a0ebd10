// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// gating criterion fails. Heavier than the unit tests; run in Release.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "arznet/commands.hpp"
#include "arznet/csv.hpp"
#include "arznet/merge.hpp"
#include "arznet/numerics.hpp"
#include "arznet/oracle.hpp"
#include "arznet/scenario.hpp"
#include "arznet/sim.hpp"
#include "support/instances.hpp"

using namespace arznet;
using arznet::testing::InstanceGenerator;
using arznet::testing::MergeInstance;

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct TableRow {
  Flux desired2, actual1, actual2, outflow;
};

// Published capacity-drop values at the merge.
constexpr std::array<TableRow, 8> kTable{{
    {1000.0, 2500.0, 1000.0, 3500.0},
    {1400.0, 2500.0, 1400.0, 3900.0},
    {1500.0, 2413.1, 1500.0, 3913.1},
    {1750.0, 2155.0, 1750.0, 3905.0},
    {2000.0, 1945.3, 1945.3, 3890.6},
    {2500.0, 1924.6, 1924.6, 3849.3},
    {3000.0, 1903.9, 1903.9, 3807.7},
    {3500.0, 1881.9, 1881.9, 3763.8},
}};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void fail_if(bool bad, const std::string& why) {
    if (bad && pass) detail << "[" << why << "] ";
    if (bad) pass = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

const fs::path kScenario = fs::path(ARZNET_SCENARIO_DIR) / "merge_capacity_drop.json";

// Rows from the simulated sweep, kept for the shape check.
std::vector<CapacityDropRow> g_direct_rows;
std::vector<CapacityDropRow> g_sim_rows;

Outcome criterion1() {
  Outcome o;
  const Scenario base = load_scenario(kScenario);
  std::vector<double> sweep;
  for (const auto& r : kTable) sweep.push_back(r.desired2);
  const auto t0 = Clock::now();
  g_direct_rows = capacity_drop(base, sweep, /*direct=*/true);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    const auto& row = g_direct_rows[i];
    worst = std::max({worst, rel(row.actual1, kTable[i].actual1), rel(row.actual2, kTable[i].actual2),
                      rel(row.outflow, kTable[i].outflow)});
  }
  o.fail_if(worst > 5e-3, "relative error above 0.5%");
  o.fail_if(elapsed >= 1.0, "runtime");
  o.detail << "max rel err " << worst << ", " << elapsed << " s";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "arznet_acceptance_sweep";
  fs::remove_all(dir);
  std::ostringstream out, err;
  std::vector<double> sweep;
  for (const auto& r : kTable) sweep.push_back(r.desired2);
  const auto t0 = Clock::now();
  const int code = cmd_capacity_drop(kScenario, dir, sweep, /*direct=*/false, {}, out, err);
  const double elapsed = seconds_since(t0);
  o.fail_if(code != kExitOk, "exit code " + std::to_string(code));
  o.fail_if(err.str().find("warning") != std::string::npos, "a row did not reach steady state");

  std::ifstream csv(dir / "capacity_drop.csv");
  std::string line;
  std::getline(csv, line);
  g_sim_rows.clear();
  while (std::getline(csv, line)) {
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(fields, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() == 7) g_sim_rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], true});
  }
  fs::remove_all(dir);
  o.fail_if(g_sim_rows.size() != kTable.size(), "csv rows");
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min(g_sim_rows.size(), kTable.size()); ++i) {
    const auto& row = g_sim_rows[i];
    worst = std::max({worst, rel(row.actual1, kTable[i].actual1), rel(row.actual2, kTable[i].actual2),
                      rel(row.outflow, kTable[i].outflow)});
  }
  o.fail_if(worst > 1e-2, "relative error above 1%");
  o.fail_if(elapsed >= 60.0, "runtime");
  o.detail << "max rel err " << worst << ", " << elapsed << " s for the sweep at 100 cells/road";
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto check = [&](const std::vector<CapacityDropRow>& rows, const char* label) {
    if (rows.size() != kTable.size()) {
      o.fail_if(true, std::string(label) + " rows missing");
      return;
    }
    // Rises up to the onset row (1500 veh/h), strictly falls after it.
    const std::size_t onset = 2;
    for (std::size_t i = 0; i < onset; ++i) {
      o.fail_if(!(rows[i + 1].outflow > rows[i].outflow), std::string(label) + " not rising before onset");
    }
    for (std::size_t i = onset; i + 1 < rows.size(); ++i) {
      o.fail_if(!(rows[i + 1].outflow < rows[i].outflow), std::string(label) + " not falling after onset");
    }
    for (std::size_t i = 4; i < rows.size(); ++i) {
      // Locked at 0.500 to the printed three decimals.
      o.fail_if(std::fabs(rows[i].ratio1 - 0.5) >= 5e-4 || std::fabs(rows[i].ratio2 - 0.5) >= 5e-4,
                std::string(label) + " ratio not locked");
    }
  };
  check(g_direct_rows, "direct");
  check(g_sim_rows, "simulated");
  if (!g_sim_rows.empty()) {
    o.detail << "simulated outflow";
    for (const auto& r : g_sim_rows) o.detail << ' ' << format_fixed(r.outflow, 1);
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  InstanceGenerator gen(4004);
  const std::size_t n = 512;
  std::size_t infeasible = 0, dominated = 0, ratio_far = 0;
  const auto t0 = Clock::now();
  for (int k = 0; k < 1000; ++k) {
    const MergeInstance m = gen.merge();
    const JunctionSolution sol = solve_merge(m.in1, m.in2, m.out, m.priority);
    const auto ctx = oracle::make_merge_context(m.in1, m.in2, m.out);
    const double tol = std::max(ctx.tolerance, sol.tolerance);
    const Flux q1 = sol.q[0], q2 = sol.q[1];
    if (!oracle::feasible(ctx, q1, q2, tol)) ++infeasible;

    const auto sample = oracle::sample_pareto(ctx, n);
    bool dom = false;
    for (const auto& g : sample.pareto) {
      if (g.q1 >= q1 - tol && g.q2 >= q2 - tol &&
          (g.q1 > q1 + sample.h1 + tol || g.q2 > q2 + sample.h2 + tol)) {
        dom = true;
      }
    }
    if (dom) ++dominated;

    const Flux total = q1 + q2;
    if (total > tol) {
      const double r_sol = q1 / total;
      double best = INFINITY, slack = 0.0;
      for (const auto& g : sample.pareto) {
        const double t = g.q1 + g.q2;
        if (t <= 0.0) continue;
        const double d = std::fabs(g.q1 / t - m.priority);
        if (d < best) {
          best = d;
          // Ratio change from moving the point by one cell.
          slack = (g.q2 * sample.h1 + g.q1 * sample.h2) / (t * t);
        }
      }
      if (std::fabs(r_sol - m.priority) > best + slack + 1e-9) ++ratio_far;
    }
  }
  o.fail_if(infeasible > 0, "infeasible");
  o.fail_if(dominated > 0, "dominated");
  o.fail_if(ratio_far > 0, "ratio");
  o.detail << "1000 instances, grid " << n << ": infeasible " << infeasible << ", dominated " << dominated
           << ", ratio violations " << ratio_far << ", " << seconds_since(t0) << " s";
  return o;
}

Outcome criterion5() {
  Outcome o;
  InstanceGenerator gen(5005);
  std::size_t points = 0, violations = 0, star = 0;
  for (int k = 0; k < 10000; ++k) {
    const MergeInstance m = gen.merge();
    const auto ctx = oracle::make_merge_context(m.in1, m.in2, m.out);
    const auto r = oracle::convexity_probe(ctx, 1, 50000 + static_cast<std::uint64_t>(k), 10);
    points += r.segment_points;
    violations += r.violations;
    star += r.star_violations;
  }
  o.fail_if(violations > 0 || star > 0, "membership violations");
  o.fail_if(points < 100000, "too few samples");
  o.detail << "10000 contexts, " << points << " segment points, violations " << violations
           << ", star violations " << star;
  return o;
}

struct LedgerTally {
  double mass = 0.0;
  double momentum = 0.0;
  std::size_t runs = 0;

  void add(const SimResult& res) {
    ++runs;
    for (const auto& e : res.ledger) {
      mass = std::max(mass, e.mass_imbalance(res.initial_mass));
      momentum = std::max(momentum, e.momentum_imbalance(res.initial_momentum));
    }
  }
};

Outcome criterion6() {
  Outcome o;
  LedgerTally tally;

  // The capacity-drop scenario itself, for every row, over half an hour.
  Scenario base = load_scenario(kScenario);
  for (const auto& row : kTable) {
    Scenario s = base;
    s.road("2").q_desired = row.desired2;
    s.sim.t_end = 0.5;
    s.sim.stop_when_steady = false;
    tally.add(run(build_network(s), s.sim));
  }

  // Random small networks of every junction type.
  InstanceGenerator gen(6006);
  SimConfig cfg;
  cfg.t_end = 0.05;
  cfg.output_stride = 3;
  cfg.stop_when_steady = false;
  for (int k = 0; k < 60; ++k) {
    std::vector<DiscretizedRoad> roads;
    JunctionSpec spec;
    if (k % 3 == 0) {
      const Branch a = gen.branch(), b = gen.branch();
      roads = {make_road("a", a.road, 1.0, 30, a.state), make_road("b", b.road, 1.0, 30, b.state)};
      spec = {{{"a", a.road}}, {{"b", b.road}}, OneToOne{}};
    } else if (k % 3 == 1) {
      const Branch a = gen.branch(), b = gen.branch(), c = gen.branch();
      roads = {make_road("a", a.road, 1.0, 30, a.state), make_road("b", b.road, 1.0, 30, b.state),
               make_road("c", c.road, 1.0, 30, c.state)};
      spec = {{{"a", a.road}}, {{"b", b.road}, {"c", c.road}}, Diverge{gen.shares(2)}};
    } else {
      const MergeInstance m = gen.merge();
      roads = {make_road("1", m.in1.road, 1.0, 30, m.in1.state), make_road("2", m.in2.road, 1.0, 30, m.in2.state),
               make_road("3", m.out.road, 1.0, 30, m.out.state)};
      spec = testing::merge_spec(m);
    }
    tally.add(run(make_network(std::move(roads), {{"J", spec}}), cfg));
  }
  o.fail_if(tally.mass > 1e-10, "mass ledger");
  o.fail_if(tally.momentum > 1e-10, "momentum ledger");

  // Junction solutions on their own.
  std::size_t mass_breaks = 0;
  double worst_mom = 0.0;
  for (int k = 0; k < 3000; ++k) {
    JunctionSolution sol;
    double mom_in = 0.0;
    std::vector<Speed> w_in;
    if (k % 3 == 0) {
      const Branch a = gen.branch(), b = gen.branch();
      sol = solve_one_to_one(a, b);
      w_in = {attribute(a.road, a.state)};
    } else if (k % 3 == 1) {
      const std::size_t mm = 2 + static_cast<std::size_t>(k) % 3;
      const Branch in = gen.branch();
      std::vector<Branch> outs;
      for (std::size_t j = 0; j < mm; ++j) outs.push_back(gen.branch());
      sol = solve_diverge(in, outs, gen.shares(mm));
      w_in = {attribute(in.road, in.state)};
    } else {
      const MergeInstance m = gen.merge();
      sol = solve_merge(m.in1, m.in2, m.out, m.priority);
      w_in = {attribute(m.in1.road, m.in1.state), attribute(m.in2.road, m.in2.state)};
    }
    if (sol.incoming_total() != sol.outgoing_total()) ++mass_breaks;
    for (std::size_t i = 0; i < sol.incoming_count; ++i) mom_in += sol.q[i] * w_in[i];
    double mom_out = 0.0;
    for (std::size_t j = 0; j < sol.w_out.size(); ++j) mom_out += sol.q[sol.incoming_count + j] * sol.w_out[j];
    worst_mom = std::max(worst_mom, std::fabs(mom_in - mom_out) / std::max(1.0, std::fabs(mom_in)));
  }
  o.fail_if(mass_breaks > 0, "junction mass not exact");
  o.fail_if(worst_mom > 1e-9, "junction momentum");
  o.detail << tally.runs << " runs, ledger mass " << tally.mass << ", momentum " << tally.momentum
           << "; 3000 junctions, inexact mass " << mass_breaks << ", momentum " << worst_mom;
  return o;
}

Outcome criterion7() {
  Outcome o;
  InstanceGenerator gen(7007);
  std::map<std::string, std::size_t> bad;
  for (int k = 0; k < 1000; ++k) {
    const Branch a = gen.branch(), b = gen.branch();
    const JunctionSpec spec{{{"a", a.road}}, {{"b", b.road}}, OneToOne{}};
    const JunctionInput in{{a.state, b.state}};
    bad["1-to-1"] += check_admissibility(spec, in, solve(spec, in)).violations.size();
  }
  for (int k = 0; k < 1000; ++k) {
    const std::size_t mm = 2 + static_cast<std::size_t>(k) % 3;
    const Branch in = gen.branch();
    JunctionSpec spec{{{"in", in.road}}, {}, Diverge{gen.shares(mm)}};
    JunctionInput input{{in.state}};
    for (std::size_t j = 0; j < mm; ++j) {
      const Branch b = gen.branch();
      spec.outgoing.push_back({"o" + std::to_string(j), b.road});
      input.states.push_back(b.state);
    }
    bad["diverge"] += check_admissibility(spec, input, solve(spec, input)).violations.size();
  }
  for (int k = 0; k < 1000; ++k) {
    const MergeInstance m = gen.merge();
    const JunctionSpec spec = testing::merge_spec(m);
    const JunctionInput input = testing::merge_input(m);
    bad["merge"] += check_admissibility(spec, input, solve(spec, input)).violations.size();
  }
  for (const auto& [kind, count] : bad) {
    o.fail_if(count > 0, kind);
    o.detail << kind << ' ' << count << "  ";
  }
  o.detail << "(violations over 1000 instances each)";
  return o;
}

Outcome criterion8() {
  Outcome o;
  InstanceGenerator gen(8008);
  double worst_comp = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const MergeInstance m = gen.merge();
    const MergeGeometry g = merge_geometry(m.in1, m.in2, m.out);
    for (double p : {0.0, gen.uniform(0.0, 1.0), 1.0}) {
      const Speed w = g.mixed_attribute(p);
      const Flux expected = supply(m.out.road, downstream_density(m.out.road, w, m.out.state), w);
      worst_comp = std::max(worst_comp, std::fabs(sigma_tilde(g, p) - expected) / std::max(1.0, expected));
    }
  }
  o.fail_if(worst_comp > 1e-10, "composition");

  std::size_t kinks = 0, c1_bad = 0, fd_bad = 0, c2_smooth = 0;
  for (int k = 0; k < 200000 && kinks < 1000; ++k) {
    const MergeInstance m = gen.merge();
    const MergeGeometry g = merge_geometry(m.in1, m.in2, m.out);
    if (!g.p_hat || *g.p_hat < 0.01 || *g.p_hat > 0.99) continue;
    ++kinks;
    const double ph = *g.p_hat;
    const double below = g.supply_derivative(ph, false);
    const double above = g.supply_derivative(ph, true);
    if (std::fabs(below - above) > 1e-8 * std::max(1.0, std::fabs(below))) ++c1_bad;
    auto S = [&](double p) { return g.supply_at(p); };
    const double h = 1e-5;
    const double fd_above = (-3.0 * S(ph) + 4.0 * S(ph + h) - S(ph + 2 * h)) / (2 * h);
    const double fd_below = (3.0 * S(ph) - 4.0 * S(ph - h) + S(ph - 2 * h)) / (2 * h);
    if (std::fabs(fd_above - above) > 1e-5 * (1.0 + std::fabs(above)) ||
        std::fabs(fd_below - below) > 1e-5 * (1.0 + std::fabs(below))) {
      ++fd_bad;
    }
    const double e = 1e-3;
    const double second_above = (S(ph) - 2 * S(ph + e) + S(ph + 2 * e)) / (e * e);
    const double second_below = (S(ph) - 2 * S(ph - e) + S(ph - 2 * e)) / (e * e);
    if (std::fabs(second_above - second_below) <= 1e-6 * (std::fabs(second_above) + std::fabs(second_below))) {
      ++c2_smooth;
    }
  }
  o.fail_if(kinks < 1000, "too few switch points");
  o.fail_if(c1_bad > 0, "first derivatives differ");
  o.fail_if(fd_bad > 0, "derivative does not match finite differences");
  o.fail_if(c2_smooth > 0, "second derivative continuous");

  std::size_t star = 0, star2 = 0, stat_bad = 0;
  for (int k = 0; k < 200000 && (star < 1000 || star2 < 1000); ++k) {
    const MergeInstance m = gen.merge();
    const MergeGeometry g = merge_geometry(m.in1, m.in2, m.out);
    if (g.dw_zero) continue;
    const double h = 1e-6;
    if (g.dw < 0.0 && g.p_star && *g.p_star > 0.01 && *g.p_star < 0.99) {
      ++star;
      auto q1 = [&](double x) { return x * g.supply_at(x); };
      const double p = *g.p_star;
      if (std::fabs(q1(p + h) - q1(p - h)) / (2 * h) > 1e-6 * std::max(1.0, q1(p))) ++stat_bad;
    }
    if (g.dw > 0.0 && g.p_star2 && *g.p_star2 > 0.01 && *g.p_star2 < 0.99) {
      ++star2;
      auto q2 = [&](double x) { return (1.0 - x) * g.supply_at(x); };
      const double p = *g.p_star2;
      if (std::fabs(q2(p + h) - q2(p - h)) / (2 * h) > 1e-6 * std::max(1.0, q2(p))) ++stat_bad;
    }
  }
  o.fail_if(star < 1000 || star2 < 1000, "too few stationary points");
  o.fail_if(stat_bad > 0, "not stationary");
  o.detail << "composition " << worst_comp << "; switch points " << kinks << " (C1 misses " << c1_bad
           << ", fd misses " << fd_bad << ", C2-smooth " << c2_smooth << "); P* " << star << ", P** " << star2
           << ", non-stationary " << stat_bad;
  return o;
}

using FluxTriple = std::array<double, 3>;

double max_diff(const FluxTriple& a, const FluxTriple& b) {
  return std::max({std::fabs(a[0] - b[0]), std::fabs(a[1] - b[1]), std::fabs(a[2] - b[2])});
}

// A step that moves the fluxes by more than `limit` is subdivided, following
// the largest sub-step: a continuous function settles below the limit once
// the steps are small enough, a genuine jump does not.
bool jumps(const std::function<FluxTriple(double)>& f, double a, double b, FluxTriple fa, FluxTriple fb,
           double limit) {
  constexpr int kParts = 10;
  while (max_diff(fa, fb) > limit) {
    if (b - a <= 1e-13 * std::max(1.0, std::fabs(a))) return true;
    double best = -1.0, x0 = a, ba = a, bb = b;
    FluxTriple f0 = fa, bfa = fa, bfb = fb;
    for (int i = 1; i <= kParts; ++i) {
      const double x1 = i == kParts ? b : a + (b - a) * i / kParts;
      const FluxTriple f1 = i == kParts ? fb : f(x1);
      if (max_diff(f0, f1) > best) {
        best = max_diff(f0, f1);
        ba = x0, bb = x1, bfa = f0, bfb = f1;
      }
      x0 = x1;
      f0 = f1;
    }
    a = ba, b = bb, fa = bfa, fb = bfb;
  }
  return false;
}

// Sweeps f over a uniform grid. Only steps that stand out from both
// neighbours are refined; at a kink the step is bounded by the steeper side.
struct SweepResult {
  bool jump = false;
  double largest_step = 0.0;
};

SweepResult sweep(const std::function<FluxTriple(double)>& f, double lo, double hi, int steps, double limit) {
  std::vector<double> x(static_cast<std::size_t>(steps) + 1);
  std::vector<FluxTriple> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = lo + (hi - lo) * static_cast<double>(i) / steps;
    y[i] = f(x[i]);
  }
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = max_diff(y[i], y[i + 1]);
  SweepResult r;
  for (std::size_t i = 0; i < d.size(); ++i) {
    r.largest_step = std::max(r.largest_step, d[i]);
    const double left = i > 0 ? d[i - 1] : 0.0;
    const double right = i + 1 < d.size() ? d[i + 1] : 0.0;
    if (d[i] <= 1.5 * std::max(left, right) + limit) continue;
    if (jumps(f, x[i], x[i + 1], y[i], y[i + 1], limit)) r.jump = true;
  }
  return r;
}

Outcome criterion9() {
  Outcome o;
  InstanceGenerator gen(9009);
  std::size_t p_jumps = 0, p_sweeps = 0, w_jumps = 0, w_sweeps = 0;
  double coarse_max = 0.0;

  std::vector<MergeInstance> cases;
  for (const auto& r : kTable) cases.push_back(testing::table_merge(r.desired2));
  while (cases.size() < 200) cases.push_back(gen.merge());

  for (const auto& m : cases) {
    auto f = [&](double p) {
      const auto s = solve_merge(m.in1, m.in2, m.out, p);
      return FluxTriple{s.q[0], s.q[1], s.q[2]};
    };
    const double tol = solve_merge(m.in1, m.in2, m.out, 0.5).tolerance;
    ++p_sweeps;
    // Step 1e-4 over ]0, 1[.
    const SweepResult r = sweep(f, 1e-4, 1.0 - 1e-4, 9998, 10.0 * tol);
    coarse_max = std::max(coarse_max, r.largest_step);
    const bool found = r.jump;
    if (found) ++p_jumps;
  }

  // Attribute difference across zero: road 1's speed is moved so that w1
  // runs through w2, including the band treated as equal attributes.
  for (int k = 0; k < 60; ++k) {
    MergeInstance m = k < 8 ? testing::table_merge(kTable[static_cast<std::size_t>(k)].desired2) : gen.merge();
    const Speed w2 = attribute(m.in2.road, m.in2.state);
    const Speed p1 = pressure(m.in1.road, m.in1.state.rho);
    const double span = 1e-6 * std::max(1.0, w2);
    if (w2 - span - p1 < 0.0 || m.in1.state.rho <= 0.0) continue;
    ++w_sweeps;
    auto f = [&](double d) {
      MergeInstance x = m;
      x.in1.state.v = w2 + d - p1;
      const auto s = solve_merge(x.in1, x.in2, x.out, x.priority);
      return FluxTriple{s.q[0], s.q[1], s.q[2]};
    };
    const double tol = solve_merge(m.in1, m.in2, m.out, m.priority).tolerance;
    const bool found = sweep(f, -span, span, 200, 10.0 * tol).jump;
    if (found) ++w_jumps;
  }
  // The detector itself: a small step must be found, a steep ramp with a
  // kink must not.
  const auto step_fn = [](double x) { return FluxTriple{x < 0.123456 ? 1000.0 : 1000.001, 0.0, 0.0}; };
  const auto ramp = [](double x) { return FluxTriple{5000.0 * std::fabs(x - 0.3), 0.0, 0.0}; };
  o.fail_if(!sweep(step_fn, 0.0, 1.0, 10000, 1e-5).jump, "detector misses a step");
  o.fail_if(sweep(ramp, 0.0, 1.0, 10000, 1e-5).jump, "detector flags a ramp");
  o.fail_if(p_jumps > 0, "jump in P");
  o.fail_if(w_jumps > 0, "jump across dw = 0");
  o.fail_if(w_sweeps < 20, "too few attribute sweeps");
  o.detail << p_sweeps << " sweeps in P (step 1e-4, largest raw step " << coarse_max << " veh/h), jumps "
           << p_jumps << "; " << w_sweeps << " sweeps across dw = 0, jumps " << w_jumps;
  return o;
}

Outcome criterion10() {
  Outcome o;
  InstanceGenerator gen(10010);
  double worst_1to1 = 0.0, worst_div = 0.0;
  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const Branch a = gen.branch(), b = gen.branch();
    const JunctionSpec spec{{{"a", a.road}}, {{"b", b.road}}, OneToOne{}};
    const auto r = check_consistency(spec, {{a.state, b.state}});
    worst_1to1 = std::max(worst_1to1, r.max_flux_deviation);
    if (r.max_flux_deviation > r.tolerance) ++bad;
  }
  for (int k = 0; k < 1000; ++k) {
    const std::size_t mm = 2 + static_cast<std::size_t>(k) % 3;
    const Branch in = gen.branch();
    JunctionSpec spec{{{"in", in.road}}, {}, Diverge{gen.shares(mm)}};
    JunctionInput input{{in.state}};
    for (std::size_t j = 0; j < mm; ++j) {
      const Branch b = gen.branch();
      spec.outgoing.push_back({"o" + std::to_string(j), b.road});
      input.states.push_back(b.state);
    }
    const auto r = check_consistency(spec, input);
    worst_div = std::max(worst_div, r.max_flux_deviation);
    if (r.max_flux_deviation > r.tolerance) ++bad;
  }
  std::map<std::string, std::pair<std::size_t, double>> per_case;
  for (int k = 0; k < 1000; ++k) {
    const MergeInstance m = gen.merge();
    const auto r = check_consistency(testing::merge_spec(m), testing::merge_input(m));
    auto& slot = per_case[r.merge_case ? to_string(*r.merge_case) : "?"];
    ++slot.first;
    slot.second = std::max(slot.second, r.max_flux_deviation / std::max(r.tolerance, 1e-300));
  }
  std::cout << "  merge consistency (non-gating), max deviation in units of the flux tolerance:\n";
  for (const auto& [tag, v] : per_case) {
    std::cout << "    " << tag << ": " << v.first << " instances, " << v.second << '\n';
  }
  o.fail_if(bad > 0, "1-to-1 / diverge deviation above tolerance");
  o.detail << "1-to-1 max deviation " << worst_1to1 << ", diverge " << worst_div << " veh/h";
  return o;
}

} // namespace

// Optional arguments select criteria by number; criterion 3 reuses the rows
// of 1 and 2.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},  {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      Outcome r = check();
      o.pass = r.pass;
      o.detail << r.detail.str();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail.str() << " ("
              << format_fixed(seconds_since(t0), 1) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
