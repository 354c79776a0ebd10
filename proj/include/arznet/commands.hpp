#pragma once

// Subcommand implementations behind tools/arznet. Each returns the process
// exit code: 0 success, 2 for malformed input or usage, 3 for a numerical
// failure in a solver.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "arznet/scenario.hpp"

namespace arznet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct SimOverrides {
  std::optional<double> cfl;
  std::optional<double> t_end;
  std::optional<std::size_t> cells;

  void apply(Scenario& scenario) const;
};

/// ARZNET_THREADS if set to a positive integer, else the hardware count.
unsigned thread_hint();

int cmd_solve(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err);

/// Writes flux_series.csv, profiles.csv and ledger.csv into out_dir.
int cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                 const SimOverrides& overrides, std::ostream& out, std::ostream& err);

struct CapacityDropRow {
  Flux desired1 = 0.0;
  Flux actual1 = 0.0;
  Flux desired2 = 0.0;
  Flux actual2 = 0.0;
  Flux outflow = 0.0;
  double ratio1 = 0.0;
  double ratio2 = 0.0;
  bool steady = true;
};

inline const std::vector<double> kDefaultSweep{1000, 1400, 1500, 1750, 2000, 2500, 3000, 3500};

/// Re-runs the single merge of `base` with the second incoming road set to
/// each desired flux. `direct` solves the junction Riemann problem instead of
/// simulating to steady state. Throws DomainError for a sweep value outside
/// [0, capacity of the road].
std::vector<CapacityDropRow> capacity_drop(const Scenario& base, std::span<const double> sweep,
                                           bool direct, unsigned threads = 1);

void write_capacity_drop_csv(std::ostream& os, std::span<const CapacityDropRow> rows);
void print_capacity_drop_table(std::ostream& os, std::span<const CapacityDropRow> rows);

/// Writes capacity_drop.csv into out_dir when given; the one-decimal table
/// always goes to `out`.
int cmd_capacity_drop(const std::filesystem::path& scenario,
                      const std::optional<std::filesystem::path>& out_dir,
                      std::span<const double> sweep, bool direct, const SimOverrides& overrides,
                      std::ostream& out, std::ostream& err);

/// Grid dump of the merge's admissible set, to out_dir/pareto.csv or to
/// `out` when no directory is given.
int cmd_pareto_dump(const std::filesystem::path& scenario, std::size_t grid,
                    const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
                    std::ostream& err);

} // namespace arznet
