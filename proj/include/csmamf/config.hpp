#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmamf/errors.hpp"
#include "csmamf/graph.hpp"
#include "csmamf/params.hpp"

namespace csmamf {

using Json = nlohmann::json;

struct MeanFieldConfig {
  int n_max = 64;             // 0 = auto from xi
  double step = 0.01;
  double horizon = 200.0;
  int sample_stride = 100;
  std::string x0 = "empty";   // "empty" | "fixed_point"
};

struct SimBlockConfig {
  int n_nodes = 0;            // 0 = unset
  std::vector<int> ladder;
  std::uint64_t seed = 1;
  double t_end = 100000.0;
  double burn_in_frac = 0.2;
  double burn_in_time = -1.0; // < 0 = use fraction
  int replicas = 1;
  double sample_interval = 0.0;  // <= 0 = t_end / 10000
  int n_max = 64;
  std::uint64_t max_events = 2'000'000'000ULL;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats = {"json", "csv"};
};

/// One experiment: graph, rates, mean-field controls, simulation controls,
/// output destination. Loaded from a JSON file; unknown keys are rejected.
struct ExperimentConfig {
  InterferenceGraph graph;
  NetworkParams params;
  MeanFieldConfig meanfield;
  SimBlockConfig sim;
  OutputConfig output;

  Json canonical() const;
  std::string hash() const;
  void validate() const;
};

namespace detail {

inline void reject_unknown(const Json& j, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config: bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("config: missing key '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config: bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

inline InterferenceGraph parse_graph(const Json& j) {
  reject_unknown(j, {"classes", "edges", "complete"}, "graph");
  const int classes = require<int>(j, "classes", "graph");
  if (get_or<bool>(j, "complete", false)) {
    if (j.contains("edges")) throw ConfigError("config: graph cannot set both complete and edges");
    return InterferenceGraph::complete(classes);
  }
  std::vector<std::pair<int, int>> edges;
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("config: each edge must be a pair of class indices");
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
  }
  return InterferenceGraph(classes, std::move(edges));
}

inline NetworkParams parse_params(const Json& j, int classes) {
  reject_unknown(j, {"lambda", "nu", "mu", "p", "variant"}, "params");
  NetworkParams p;
  p.lambda = require<std::vector<double>>(j, "lambda", "params");
  p.nu = require<std::vector<double>>(j, "nu", "params");
  p.mu = require<std::vector<double>>(j, "mu", "params");
  p.p = get_or<std::vector<double>>(j, "p", std::vector<double>(classes, 1.0 / classes));

  if (j.contains("variant")) {
    const Json& v = j.at("variant");
    const std::string type = require<std::string>(v, "type", "params.variant");
    if (type == "base") {
      reject_unknown(v, {"type"}, "params.variant");
    } else if (type == "multi_rate") {
      reject_unknown(v, {"type", "modes"}, "params.variant");
      p.variant = ModelVariant::multi_rate;
      for (const auto& class_modes : require<Json>(v, "modes", "params.variant")) {
        std::vector<ServiceMode> ms;
        for (const auto& m : class_modes) {
          reject_unknown(m, {"prob", "mean"}, "params.variant.modes[]");
          ms.push_back({require<double>(m, "prob", "mode"), require<double>(m, "mean", "mode")});
        }
        p.modes.push_back(std::move(ms));
      }
    } else if (type == "queue_based") {
      reject_unknown(v, {"type", "tables", "tail"}, "params.variant");
      p.variant = ModelVariant::queue_based;
      const std::string tail = get_or<std::string>(v, "tail", "constant");
      if (tail != "constant" && tail != "linear")
        throw ConfigError("config: variant tail must be 'constant' or 'linear'");
      for (const auto& t : require<Json>(v, "tables", "params.variant")) {
        BackoffRateTable table;
        table.table = t.get<std::vector<double>>();
        table.tail = tail == "linear" ? BackoffRateTable::Tail::linear
                                      : BackoffRateTable::Tail::constant;
        p.backoff.push_back(std::move(table));
      }
    } else if (type == "finite_buffer") {
      reject_unknown(v, {"type", "capacity"}, "params.variant");
      p.variant = ModelVariant::finite_buffer;
      p.buffer_cap = require<std::vector<int>>(v, "capacity", "params.variant");
    } else {
      throw ConfigError("config: unknown variant type '" + type + "'");
    }
  }
  p.validate();
  if (p.num_classes() != classes)
    throw ConfigError("config: params vectors must match graph.classes");
  return p;
}

inline MeanFieldConfig parse_meanfield(const Json& j) {
  reject_unknown(j, {"n_max", "h", "t_end", "sample_stride", "x0"}, "meanfield");
  MeanFieldConfig m;
  if (j.contains("n_max")) {
    if (j.at("n_max").is_string()) {
      if (j.at("n_max").get<std::string>() != "auto")
        throw ConfigError("config: meanfield.n_max must be a positive integer or \"auto\"");
      m.n_max = 0;
    } else {
      m.n_max = j.at("n_max").get<int>();
      if (m.n_max < 1) throw ConfigError("config: meanfield.n_max must be positive");
    }
  }
  m.step = get_or<double>(j, "h", m.step);
  if (!(m.step > 0.0)) throw ConfigError("config: meanfield.h must be positive");
  m.horizon = get_or<double>(j, "t_end", m.horizon);
  if (!(m.horizon > 0.0)) throw ConfigError("config: meanfield.t_end must be positive");
  m.sample_stride = get_or<int>(j, "sample_stride", m.sample_stride);
  if (m.sample_stride < 1) throw ConfigError("config: meanfield.sample_stride must be >= 1");
  m.x0 = get_or<std::string>(j, "x0", m.x0);
  if (m.x0 != "empty" && m.x0 != "fixed_point")
    throw ConfigError("config: meanfield.x0 must be 'empty' or 'fixed_point'");
  return m;
}

inline SimBlockConfig parse_sim(const Json& j) {
  reject_unknown(j,
                 {"n_nodes", "ladder", "seed", "t_end", "burn_in_frac", "burn_in_time",
                  "replicas", "sample_interval", "n_max", "max_events"},
                 "sim");
  SimBlockConfig s;
  s.n_nodes = get_or<int>(j, "n_nodes", 0);
  s.ladder = get_or<std::vector<int>>(j, "ladder", {});
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  s.t_end = get_or<double>(j, "t_end", s.t_end);
  s.burn_in_frac = get_or<double>(j, "burn_in_frac", s.burn_in_frac);
  s.burn_in_time = get_or<double>(j, "burn_in_time", s.burn_in_time);
  s.replicas = get_or<int>(j, "replicas", s.replicas);
  s.sample_interval = get_or<double>(j, "sample_interval", s.sample_interval);
  s.n_max = get_or<int>(j, "n_max", s.n_max);
  s.max_events = get_or<std::uint64_t>(j, "max_events", s.max_events);
  if (s.replicas < 1) throw ConfigError("config: sim.replicas must be >= 1");
  if (!(s.t_end > 0.0)) throw ConfigError("config: sim.t_end must be positive");
  for (int n : s.ladder)
    if (n < 1) throw ConfigError("config: sim.ladder entries must be positive");
  return s;
}

inline OutputConfig parse_output(const Json& j) {
  reject_unknown(j, {"dir", "formats"}, "output");
  OutputConfig o;
  o.dir = get_or<std::string>(j, "dir", o.dir);
  o.formats = get_or<std::vector<std::string>>(j, "formats", o.formats);
  for (const auto& f : o.formats)
    if (f != "json" && f != "csv")
      throw ConfigError("config: output format must be 'json' or 'csv'");
  return o;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  detail::reject_unknown(j, {"graph", "params", "meanfield", "sim", "output"}, "top level");
  if (!j.contains("graph")) throw ConfigError("config: missing 'graph' section");
  if (!j.contains("params")) throw ConfigError("config: missing 'params' section");

  ExperimentConfig cfg;
  cfg.graph = detail::parse_graph(j.at("graph"));
  cfg.params = detail::parse_params(j.at("params"), cfg.graph.num_classes);
  if (j.contains("meanfield")) cfg.meanfield = detail::parse_meanfield(j.at("meanfield"));
  if (j.contains("sim")) cfg.sim = detail::parse_sim(j.at("sim"));
  if (j.contains("output")) cfg.output = detail::parse_output(j.at("output"));
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

inline void ExperimentConfig::validate() const {
  params.validate();
  if (params.num_classes() != graph.num_classes)
    throw ConfigError("config: params and graph disagree on the number of classes");
  if (params.variant == ModelVariant::finite_buffer) {
    for (int k : params.buffer_cap) {
      if (meanfield.n_max > 0 && k > meanfield.n_max)
        throw ConfigError("config: meanfield.n_max must cover every buffer capacity");
      if (k > sim.n_max)
        throw ConfigError("config: sim.n_max must cover every buffer capacity");
    }
  }
}

inline Json ExperimentConfig::canonical() const {
  Json j;
  Json g;
  g["classes"] = graph.num_classes;
  if (graph.is_complete() && graph.num_classes > 1) {
    g["complete"] = true;
  } else {
    Json edges = Json::array();
    for (auto [a, b] : graph.edges) edges.push_back(Json::array({a, b}));
    g["edges"] = edges;
  }
  j["graph"] = g;

  Json p;
  p["lambda"] = params.lambda;
  p["nu"] = params.nu;
  p["mu"] = params.mu;
  p["p"] = params.p;
  Json v;
  v["type"] = to_string(params.variant);
  if (params.variant == ModelVariant::multi_rate) {
    Json modes = Json::array();
    for (const auto& ms : params.modes) {
      Json cm = Json::array();
      for (const auto& m : ms) cm.push_back(Json{{"mean", m.mean}, {"prob", m.prob}});
      modes.push_back(cm);
    }
    v["modes"] = modes;
  } else if (params.variant == ModelVariant::queue_based) {
    Json tables = Json::array();
    for (const auto& t : params.backoff) tables.push_back(t.table);
    v["tables"] = tables;
    v["tail"] = params.backoff.front().tail == BackoffRateTable::Tail::linear ? "linear"
                                                                              : "constant";
  } else if (params.variant == ModelVariant::finite_buffer) {
    v["capacity"] = params.buffer_cap;
  }
  p["variant"] = v;
  j["params"] = p;

  Json m;
  if (meanfield.n_max > 0)
    m["n_max"] = meanfield.n_max;
  else
    m["n_max"] = "auto";
  m["h"] = meanfield.step;
  m["t_end"] = meanfield.horizon;
  m["sample_stride"] = meanfield.sample_stride;
  m["x0"] = meanfield.x0;
  j["meanfield"] = m;

  Json s;
  if (sim.n_nodes > 0) s["n_nodes"] = sim.n_nodes;
  if (!sim.ladder.empty()) s["ladder"] = sim.ladder;
  s["seed"] = sim.seed;
  s["t_end"] = sim.t_end;
  if (sim.burn_in_time >= 0.0)
    s["burn_in_time"] = sim.burn_in_time;
  else
    s["burn_in_frac"] = sim.burn_in_frac;
  s["replicas"] = sim.replicas;
  if (sim.sample_interval > 0.0) s["sample_interval"] = sim.sample_interval;
  s["n_max"] = sim.n_max;
  s["max_events"] = sim.max_events;
  j["sim"] = s;

  Json o;
  o["dir"] = output.dir;
  o["formats"] = output.formats;
  j["output"] = o;
  return j;
}

inline std::string ExperimentConfig::hash() const {
  const std::string dump = canonical().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace csmamf
