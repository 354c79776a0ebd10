#pragma once

// Brute-force references for the junction solvers. Nothing here uses the
// closed-form merge geometry: the outgoing supply is always rebuilt from the
// mixed attribute w~ = (q1 w1 + q2 w2) / (q1 + q2) through the fundamental
// diagram primitives.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "arznet/junction.hpp"
#include "arznet/merge.hpp"

namespace arznet::oracle {

struct MergeContext {
  Branch in1;
  Branch in2;
  Branch out;
  Flux demand1 = 0.0;
  Flux demand2 = 0.0;
  double tolerance = 0.0;
};

MergeContext make_merge_context(const Branch& in1, const Branch& in2, const Branch& out);

/// Sigma_3(q1, q2): supply of the outgoing road for the mixture the pair
/// would produce. The empty mixture (0, 0) is given the supply at ratio 1/2;
/// it only enters through 0 <= Sigma_3, which holds for every ratio.
Flux mixed_supply(const MergeContext& ctx, Flux q1, Flux q2);

/// Membership in the admissible set of the merge, with `slack` added to
/// every upper bound.
bool feasible(const MergeContext& ctx, Flux q1, Flux q2, double slack = 0.0);

struct FeasibleSample {
  /// Grid spacing along q1 and q2 (demand / n).
  double h1 = 0.0;
  double h2 = 0.0;
  /// Points per axis (n + 1, end points included).
  std::size_t points = 0;
  /// Row-major membership flags, index i * points + j for (i h1, j h2).
  std::vector<std::uint8_t> feasible;
  /// Non-dominated feasible grid points, ordered by increasing q1.
  std::vector<FluxPair> pareto;

  FluxPair at(std::size_t i, std::size_t j) const {
    return {static_cast<double>(i) * h1, static_cast<double>(j) * h2};
  }
  bool is_feasible(std::size_t i, std::size_t j) const { return feasible[i * points + j] != 0; }
};

/// Evaluates membership on the (n+1) x (n+1) grid over [0, D1] x [0, D2]
/// and filters the non-dominated points. Rows are split over `threads`
/// workers; the result does not depend on the split. Throws DomainError for
/// n < 1.
FeasibleSample sample_pareto(const MergeContext& ctx, std::size_t n, unsigned threads = 1);

struct Marker {
  std::string kind;
  FluxPair q;
};

/// Writes the sample as CSV with columns q1,q2,feasible,pareto,kind. Grid
/// rows have kind "grid"; each marker is appended as one extra row whose
/// feasibility is evaluated with the context tolerance.
void write_csv(std::ostream& os, const FeasibleSample& sample, const MergeContext& ctx,
               std::span<const Marker> markers = {});

struct ConvexityResult {
  std::size_t segment_points = 0;
  std::size_t violations = 0;
  std::size_t star_violations = 0;
};

/// Draws pairs of feasible points (boundary points of the supply curve when
/// they fall inside the demand box, rejection samples otherwise) and checks
/// `segment_samples` interior points of each segment, plus the scaled points
/// t * q of each end point for star-shapedness.
ConvexityResult convexity_probe(const MergeContext& ctx, std::size_t trials, std::uint64_t seed,
                                std::size_t segment_samples = 10);

struct SingleIncomingMax {
  Flux q1 = 0.0;
  double resolution = 0.0;
};

/// Largest grid value q1 in [0, capacity of the incoming curve] with
/// q1 <= D1 and alpha_j q1 <= Sigma_j on every outgoing road (a 1-to-1
/// junction is a single outgoing road with alpha = 1).
SingleIncomingMax max_single_incoming(const Branch& in, std::span<const Branch> outs,
                                      std::span<const double> alphas, std::size_t n);

} // namespace arznet::oracle
