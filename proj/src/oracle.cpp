#include "arznet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "arznet/csv.hpp"
#include "arznet/errors.hpp"
#include "arznet/numerics.hpp"

namespace arznet::oracle {

MergeContext make_merge_context(const Branch& in1, const Branch& in2, const Branch& out) {
  MergeContext ctx{in1, in2, out};
  const Speed w1 = attribute(in1.road, in1.state);
  const Speed w2 = attribute(in2.road, in2.state);
  ctx.demand1 = demand(in1.road, in1.state.rho, w1);
  ctx.demand2 = demand(in2.road, in2.state.rho, w2);
  const Flux cap_out = std::max(capacity(out.road, w1), capacity(out.road, w2));
  ctx.tolerance = flux_tolerance(std::max({ctx.demand1, ctx.demand2, cap_out}));
  return ctx;
}

Flux mixed_supply(const MergeContext& ctx, Flux q1, Flux q2) {
  const Speed w1 = attribute(ctx.in1.road, ctx.in1.state);
  const Speed w2 = attribute(ctx.in2.road, ctx.in2.state);
  const Flux total = q1 + q2;
  const Speed w_mixed = total > 0.0 ? (q1 * w1 + q2 * w2) / total : 0.5 * (w1 + w2);
  const Density rho_tilde = downstream_density(ctx.out.road, w_mixed, ctx.out.state);
  return supply(ctx.out.road, rho_tilde, w_mixed);
}

bool feasible(const MergeContext& ctx, Flux q1, Flux q2, double slack) {
  if (q1 < -slack || q2 < -slack) {
    return false;
  }
  if (q1 > ctx.demand1 + slack || q2 > ctx.demand2 + slack) {
    return false;
  }
  q1 = std::max(q1, 0.0);
  q2 = std::max(q2, 0.0);
  if (q1 + q2 == 0.0) {
    return true;
  }
  return q1 + q2 <= mixed_supply(ctx, q1, q2) + slack;
}

FeasibleSample sample_pareto(const MergeContext& ctx, std::size_t n, unsigned threads) {
  if (n < 1) {
    throw DomainError("grid resolution must be positive");
  }
  FeasibleSample s;
  s.points = n + 1;
  s.h1 = ctx.demand1 / static_cast<double>(n);
  s.h2 = ctx.demand2 / static_cast<double>(n);
  s.feasible.assign(s.points * s.points, 0);

  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < s.points; ++j) {
        const FluxPair q = s.at(i, j);
        s.feasible[i * s.points + j] = feasible(ctx, q.q1, q.q2) ? 1 : 0;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(s.points)));
  if (workers == 1) {
    fill_rows(0, s.points);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (s.points + workers - 1) / workers;
    for (unsigned k = 0; k < workers; ++k) {
      const std::size_t begin = k * chunk;
      const std::size_t end = std::min(s.points, begin + chunk);
      if (begin < end) pool.emplace_back(fill_rows, begin, end);
    }
  }

  // Only the top feasible point of a column can be non-dominated; it is
  // when its row index beats every column further right.
  std::vector<FluxPair> reversed;
  long best_right = -1;
  for (std::size_t i = s.points; i-- > 0;) {
    long top = -1;
    for (std::size_t j = s.points; j-- > 0;) {
      if (s.is_feasible(i, j)) {
        top = static_cast<long>(j);
        break;
      }
    }
    if (top > best_right) {
      reversed.push_back(s.at(i, static_cast<std::size_t>(top)));
      best_right = top;
    }
  }
  s.pareto.assign(reversed.rbegin(), reversed.rend());
  return s;
}

void write_csv(std::ostream& os, const FeasibleSample& sample, const MergeContext& ctx,
               std::span<const Marker> markers) {
  std::vector<std::uint8_t> on_front(sample.points * sample.points, 0);
  for (const auto& q : sample.pareto) {
    const auto i = static_cast<std::size_t>(sample.h1 > 0.0 ? std::lround(q.q1 / sample.h1) : 0);
    const auto j = static_cast<std::size_t>(sample.h2 > 0.0 ? std::lround(q.q2 / sample.h2) : 0);
    on_front[i * sample.points + j] = 1;
  }
  os << "q1,q2,feasible,pareto,kind\n";
  for (std::size_t i = 0; i < sample.points; ++i) {
    for (std::size_t j = 0; j < sample.points; ++j) {
      const FluxPair q = sample.at(i, j);
      os << format_double(q.q1) << ',' << format_double(q.q2) << ','
         << int(sample.is_feasible(i, j)) << ',' << int(on_front[i * sample.points + j])
         << ",grid\n";
    }
  }
  for (const auto& m : markers) {
    os << format_double(m.q.q1) << ',' << format_double(m.q.q2) << ','
       << int(feasible(ctx, m.q.q1, m.q.q2, ctx.tolerance)) << ",0," << m.kind << '\n';
  }
}

ConvexityResult convexity_probe(const MergeContext& ctx, std::size_t trials, std::uint64_t seed,
                                std::size_t segment_samples) {
  if (trials < 1) {
    throw DomainError("convexity probe needs at least one trial");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw = [&]() -> FluxPair {
    if (unit(rng) < 0.5) {
      // A point on the supply boundary, ratio p.
      const double p = unit(rng);
      const Flux total = mixed_supply(ctx, p, 1.0 - p);
      const FluxPair q{p * total, (1.0 - p) * total};
      if (q.q1 <= ctx.demand1 && q.q2 <= ctx.demand2) {
        return q;
      }
    }
    for (int attempt = 0; attempt < 100; ++attempt) {
      const FluxPair q{unit(rng) * ctx.demand1, unit(rng) * ctx.demand2};
      if (feasible(ctx, q.q1, q.q2)) {
        return q;
      }
    }
    return {0.0, 0.0};
  };

  ConvexityResult result;
  for (std::size_t t = 0; t < trials; ++t) {
    const FluxPair a = draw();
    const FluxPair b = draw();
    for (std::size_t k = 1; k <= segment_samples; ++k) {
      const double mu = static_cast<double>(k) / static_cast<double>(segment_samples + 1);
      const FluxPair m{a.q1 + mu * (b.q1 - a.q1), a.q2 + mu * (b.q2 - a.q2)};
      ++result.segment_points;
      if (!feasible(ctx, m.q1, m.q2, ctx.tolerance)) {
        ++result.violations;
      }
      if (!feasible(ctx, mu * a.q1, mu * a.q2, ctx.tolerance)) {
        ++result.star_violations;
      }
    }
  }
  return result;
}

SingleIncomingMax max_single_incoming(const Branch& in, std::span<const Branch> outs,
                                      std::span<const double> alphas, std::size_t n) {
  if (n < 1) {
    throw DomainError("grid resolution must be positive");
  }
  const Speed w1 = attribute(in.road, in.state);
  const Flux d1 = demand(in.road, in.state.rho, w1);
  std::vector<Flux> supplies;
  for (const auto& out : outs) {
    supplies.push_back(supply(out.road, downstream_density(out.road, w1, out.state), w1));
  }
  const Flux top = capacity(in.road, w1);
  SingleIncomingMax best;
  best.resolution = top / static_cast<double>(n);
  for (std::size_t k = 0; k <= n; ++k) {
    const Flux q = best.resolution * static_cast<double>(k);
    bool ok = q <= d1;
    for (std::size_t j = 0; ok && j < outs.size(); ++j) {
      ok = alphas[j] * q <= supplies[j];
    }
    if (ok) best.q1 = q;
  }
  return best;
}

} // namespace arznet::oracle
