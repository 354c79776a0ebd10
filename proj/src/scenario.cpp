#include "arznet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "arznet/errors.hpp"

namespace arznet {

using nlohmann::json;

namespace {

// Field-level access with diagnostics of the form "<source>: roads[1].gamma: ...".
class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ParseError(source_ + ": " + path + ": " + what);
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    for (const auto& item : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
        fail(path + "." + item.key(), "unknown field");
      }
    }
  }

  const json& object(const json& parent, const std::string& path) const {
    if (!parent.is_object()) fail(path, "expected an object");
    return parent;
  }

  const json* find(const json& obj, const std::string& key) const {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  std::optional<double> number(const json& obj, const std::string& path, const std::string& key) const {
    const json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    return number(*v, path + "." + key);
  }

  double required_number(const json& obj, const std::string& path, const std::string& key) const {
    const auto x = number(obj, path, key);
    if (!x) fail(path + "." + key, "missing");
    return *x;
  }

  std::optional<std::size_t> count(const json& obj, const std::string& path, const std::string& key) const {
    const json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    const double x = number(*v, path + "." + key);
    if (x < 0.0 || x != std::floor(x) || x > 1e15) {
      fail(path + "." + key, "expected a non-negative integer");
    }
    return static_cast<std::size_t>(x);
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::string> strings(const json& obj, const std::string& path, const std::string& key) const {
    const json* v = find(obj, key);
    if (v == nullptr) fail(path + "." + key, "missing");
    if (!v->is_array()) fail(path + "." + key, "expected an array of road ids");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(string((*v)[i], path + "." + key + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  const std::string& source() const { return source_; }

private:
  std::string source_;
};

std::string index_path(const char* list, std::size_t i) {
  return std::string(list) + "[" + std::to_string(i) + "]";
}

RoadConfig read_road(const Reader& rd, const json& v, const std::string& path) {
  rd.object(v, path);
  rd.only_keys(v, path, {"id", "rho_max", "v_ref", "gamma", "length", "cells", "rho0", "v0", "q_desired"});
  RoadConfig road;
  const json* id = rd.find(v, "id");
  if (id == nullptr) rd.fail(path + ".id", "missing");
  road.id = rd.string(*id, path + ".id");
  road.params.rho_max = rd.required_number(v, path, "rho_max");
  road.params.v_ref = rd.required_number(v, path, "v_ref");
  road.params.gamma = rd.required_number(v, path, "gamma");
  road.length = rd.number(v, path, "length").value_or(road.length);
  road.cells = rd.count(v, path, "cells").value_or(road.cells);
  road.rho0 = rd.number(v, path, "rho0");
  road.v0 = rd.number(v, path, "v0");
  road.q_desired = rd.number(v, path, "q_desired");
  return road;
}

JunctionConfig read_junction(const Reader& rd, const json& v, const std::string& path, std::size_t k) {
  rd.object(v, path);
  rd.only_keys(v, path, {"id", "kind", "incoming", "outgoing", "alphas", "priority"});
  JunctionConfig j;
  const json* id = rd.find(v, "id");
  j.id = id != nullptr ? rd.string(*id, path + ".id") : "J" + std::to_string(k);
  const json* kind = rd.find(v, "kind");
  if (kind == nullptr) rd.fail(path + ".kind", "missing");
  const std::string name = rd.string(*kind, path + ".kind");
  j.incoming = rd.strings(v, path, "incoming");
  j.outgoing = rd.strings(v, path, "outgoing");

  const json* alphas = rd.find(v, "alphas");
  const json* priority = rd.find(v, "priority");
  if (name == "one_to_one") {
    if (alphas || priority) rd.fail(path, "a one_to_one junction takes neither alphas nor priority");
    j.kind = OneToOne{};
  } else if (name == "diverge") {
    if (priority) rd.fail(path + ".priority", "only merges take a priority");
    if (alphas == nullptr) rd.fail(path + ".alphas", "missing");
    if (!alphas->is_array()) rd.fail(path + ".alphas", "expected an array of numbers");
    Diverge d;
    for (std::size_t i = 0; i < alphas->size(); ++i) {
      d.alphas.push_back(rd.number((*alphas)[i], path + ".alphas[" + std::to_string(i) + "]"));
    }
    j.kind = std::move(d);
  } else if (name == "merge") {
    if (alphas) rd.fail(path + ".alphas", "only diverges take assignment shares");
    j.kind = Merge{rd.number(v, path, "priority").value_or(0.5)};
  } else {
    rd.fail(path + ".kind", "expected one_to_one, diverge or merge, got \"" + name + "\"");
  }
  return j;
}

SimConfig read_sim(const Reader& rd, const json& v) {
  const std::string path = "sim";
  rd.object(v, path);
  rd.only_keys(v, path, {"cfl", "t_end", "output_stride", "steady_tolerance", "steady_window", "stop_when_steady"});
  SimConfig sim;
  sim.cfl = rd.number(v, path, "cfl").value_or(sim.cfl);
  sim.t_end = rd.number(v, path, "t_end").value_or(sim.t_end);
  sim.output_stride = rd.count(v, path, "output_stride").value_or(sim.output_stride);
  sim.steady_tolerance = rd.number(v, path, "steady_tolerance").value_or(sim.steady_tolerance);
  sim.steady_window = rd.count(v, path, "steady_window").value_or(sim.steady_window);
  if (const json* b = rd.find(v, "stop_when_steady")) {
    if (!b->is_boolean()) rd.fail(path + ".stop_when_steady", "expected true or false");
    sim.stop_when_steady = b->get<bool>();
  }
  return sim;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void check(const std::string& source, const std::string& path, auto&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ParseError(source + ": " + path + ": " + e.what());
  }
}

void validate_with(const Scenario& s, const std::string& source) {
  const Reader rd(source);
  if (s.roads.empty()) rd.fail("roads", "at least one road is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.roads.size(); ++i) {
    const auto& road = s.roads[i];
    const std::string path = index_path("roads", i);
    if (road.id.empty()) rd.fail(path + ".id", "must not be empty");
    if (road.id.find(':') != std::string::npos || road.id.find(',') != std::string::npos) {
      rd.fail(path + ".id", "must not contain ':' or ','");
    }
    if (!ids.insert(road.id).second) rd.fail(path + ".id", "duplicate road id \"" + road.id + "\"");
    check(source, path, [&] { road.params.validate(); });
    if (!(road.length > 0.0)) rd.fail(path + ".length", "must be positive");
    if (road.cells == 0) rd.fail(path + ".cells", "must be positive");
    if (road.rho0.has_value() == road.q_desired.has_value()) {
      rd.fail(path, "give exactly one of rho0 and q_desired");
    }
    if (road.v0 && !road.rho0) rd.fail(path + ".v0", "only allowed together with rho0");
    if (road.rho0 && !(*road.rho0 >= 0.0 && *road.rho0 <= road.params.rho_max)) {
      rd.fail(path + ".rho0", "must lie in [0, rho_max]");
    }
    if (road.v0 && !(*road.v0 >= 0.0)) rd.fail(path + ".v0", "must be non-negative");
    check(source, path + ".q_desired", [&] { road.initial_state(); });
  }

  std::set<std::string> junction_ids;
  std::map<std::string, int> ends_in, starts_in;
  for (std::size_t k = 0; k < s.junctions.size(); ++k) {
    const auto& j = s.junctions[k];
    const std::string path = index_path("junctions", k);
    if (j.id.empty() || j.id.find(':') != std::string::npos || j.id.find(',') != std::string::npos) {
      rd.fail(path + ".id", "must be non-empty without ':' or ','");
    }
    if (!junction_ids.insert(j.id).second) rd.fail(path + ".id", "duplicate junction id \"" + j.id + "\"");
    auto known = [&](const std::vector<std::string>& list, const char* key, auto& ends) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string at = path + "." + key + "[" + std::to_string(i) + "]";
        if (!ids.contains(list[i])) rd.fail(at, "unknown road \"" + list[i] + "\"");
        if (ends[list[i]]++ > 0) rd.fail(at, "road \"" + list[i] + "\" is already attached at this end");
      }
    };
    known(j.incoming, "incoming", ends_in);
    known(j.outgoing, "outgoing", starts_in);
    check(source, path, [&] { junction_spec(s, k).validate(); });
  }
  check(source, "sim", [&] { s.sim.validate(); });
}

} // namespace

TrafficState RoadConfig::initial_state() const {
  if (q_desired) {
    return equilibrium_state(params, free_flow_density(params, *q_desired));
  }
  const Density rho = rho0.value_or(0.0);
  return {rho, v0.value_or(equilibrium_speed(params, rho))};
}

const RoadConfig& Scenario::road(const std::string& id) const {
  for (const auto& r : roads) {
    if (r.id == id) return r;
  }
  throw DomainError("unknown road \"" + id + "\"");
}

RoadConfig& Scenario::road(const std::string& id) {
  return const_cast<RoadConfig&>(std::as_const(*this).road(id));
}

void Scenario::validate() const { validate_with(*this, "<scenario>"); }

Scenario parse_scenario(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto cut = what.find("] "); cut != std::string::npos) what = what.substr(cut + 2);
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  const Reader rd(source);
  if (!doc.is_object()) rd.fail("<top>", "expected an object with roads, junctions and sim");
  rd.only_keys(doc, "<top>", {"roads", "junctions", "sim"});

  Scenario s;
  const json* roads = rd.find(doc, "roads");
  if (roads == nullptr) rd.fail("roads", "missing");
  if (!roads->is_array()) rd.fail("roads", "expected an array");
  for (std::size_t i = 0; i < roads->size(); ++i) {
    s.roads.push_back(read_road(rd, (*roads)[i], index_path("roads", i)));
  }
  if (const json* junctions = rd.find(doc, "junctions")) {
    if (!junctions->is_array()) rd.fail("junctions", "expected an array");
    for (std::size_t k = 0; k < junctions->size(); ++k) {
      s.junctions.push_back(read_junction(rd, (*junctions)[k], index_path("junctions", k), k));
    }
  }
  if (const json* sim = rd.find(doc, "sim")) {
    s.sim = read_sim(rd, *sim);
  }
  validate_with(s, source);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError(path.string() + ": cannot open file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.string());
}

std::string to_json(const Scenario& s) {
  json doc = json::object();
  json roads = json::array();
  for (const auto& r : s.roads) {
    json v = {{"id", r.id},
              {"rho_max", r.params.rho_max},
              {"v_ref", r.params.v_ref},
              {"gamma", r.params.gamma},
              {"length", r.length},
              {"cells", r.cells}};
    if (r.rho0) v["rho0"] = *r.rho0;
    if (r.v0) v["v0"] = *r.v0;
    if (r.q_desired) v["q_desired"] = *r.q_desired;
    roads.push_back(std::move(v));
  }
  json junctions = json::array();
  for (const auto& j : s.junctions) {
    json v = {{"id", j.id}, {"incoming", j.incoming}, {"outgoing", j.outgoing}};
    if (std::holds_alternative<OneToOne>(j.kind)) {
      v["kind"] = "one_to_one";
    } else if (const auto* d = std::get_if<Diverge>(&j.kind)) {
      v["kind"] = "diverge";
      v["alphas"] = d->alphas;
    } else {
      v["kind"] = "merge";
      v["priority"] = std::get<Merge>(j.kind).priority;
    }
    junctions.push_back(std::move(v));
  }
  doc["roads"] = std::move(roads);
  doc["junctions"] = std::move(junctions);
  doc["sim"] = {{"cfl", s.sim.cfl},
                {"t_end", s.sim.t_end},
                {"output_stride", s.sim.output_stride},
                {"steady_tolerance", s.sim.steady_tolerance},
                {"steady_window", s.sim.steady_window},
                {"stop_when_steady", s.sim.stop_when_steady}};
  return doc.dump(2) + "\n";
}

JunctionSpec junction_spec(const Scenario& scenario, std::size_t junction) {
  const auto& j = scenario.junctions.at(junction);
  JunctionSpec spec;
  for (const auto& id : j.incoming) spec.incoming.push_back({id, scenario.road(id).params});
  for (const auto& id : j.outgoing) spec.outgoing.push_back({id, scenario.road(id).params});
  spec.kind = j.kind;
  return collapse_degenerate(std::move(spec));
}

JunctionInput junction_input(const Scenario& scenario, std::size_t junction) {
  const auto& j = scenario.junctions.at(junction);
  JunctionInput input;
  for (const auto& id : j.incoming) input.states.push_back(scenario.road(id).initial_state());
  for (const auto& id : j.outgoing) input.states.push_back(scenario.road(id).initial_state());
  return input;
}

Network build_network(const Scenario& scenario) {
  std::vector<DiscretizedRoad> roads;
  for (const auto& r : scenario.roads) {
    roads.push_back(make_road(r.id, r.params, r.length, r.cells, r.initial_state()));
  }
  std::vector<std::pair<std::string, JunctionSpec>> junctions;
  for (std::size_t k = 0; k < scenario.junctions.size(); ++k) {
    junctions.emplace_back(scenario.junctions[k].id, junction_spec(scenario, k));
  }
  return make_network(std::move(roads), std::move(junctions));
}

} // namespace arznet
