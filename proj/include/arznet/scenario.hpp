#pragma once

// JSON scenario files: roads, junctions and simulation settings.
//
//   {
//     "roads": [{"id": "1", "rho_max": 180, "v_ref": 100, "gamma": 1.2,
//                "length": 1, "cells": 100, "rho0": 30}, ...],
//     "junctions": [{"id": "J", "kind": "merge", "incoming": ["1", "2"],
//                    "outgoing": ["3"], "priority": 0.5}],
//     "sim": {"cfl": 0.5, "t_end": 1}
//   }
//
// A road gives either rho0 (with an optional v0, equilibrium speed by
// default) or q_desired, which is placed on the free-flow branch of the
// equilibrium curve.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arznet/junction.hpp"
#include "arznet/sim.hpp"

namespace arznet {

struct RoadConfig {
  std::string id;
  RoadParams params;
  double length = 1.0;
  std::size_t cells = 100;
  std::optional<Density> rho0;
  std::optional<Speed> v0;
  std::optional<Flux> q_desired;

  TrafficState initial_state() const;

  friend bool operator==(const RoadConfig&, const RoadConfig&) = default;
};

struct JunctionConfig {
  std::string id;
  std::vector<std::string> incoming;
  std::vector<std::string> outgoing;
  JunctionKind kind;

  friend bool operator==(const JunctionConfig&, const JunctionConfig&) = default;
};

struct Scenario {
  std::vector<RoadConfig> roads;
  std::vector<JunctionConfig> junctions;
  SimConfig sim;

  const RoadConfig& road(const std::string& id) const;
  RoadConfig& road(const std::string& id);

  /// Road ids unique and referenced ones present, arities and shares valid,
  /// initial states admissible. Throws ParseError naming the field.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses and validates. `source` only labels diagnostics.
Scenario parse_scenario(std::string_view text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Pretty-printed JSON that parse_scenario maps back to an equal Scenario.
std::string to_json(const Scenario& scenario);

JunctionSpec junction_spec(const Scenario& scenario, std::size_t junction);

/// Initial states on the junction's branches, incoming first.
JunctionInput junction_input(const Scenario& scenario, std::size_t junction);

Network build_network(const Scenario& scenario);

} // namespace arznet
