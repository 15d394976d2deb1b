#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "projcons/analysis.hpp"
#include "projcons/async_engine.hpp"
#include "projcons/lsq.hpp"
#include "projcons/problem.hpp"
#include "projcons/schedule.hpp"
#include "projcons/sync_engine.hpp"
#include "projcons/tracking.hpp"
#include "projcons/trace.hpp"

namespace projcons {

using nlohmann::json;

// Exit codes of run_experiment: 0 success, 2 ran but did not converge within
// max_steps (sync/necessity/async/lsq/rate modes).  Validation problems throw
// ConfigError, which the CLI maps to exit 1.

namespace cfg {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError("missing required field: " + (path.empty() ? key : path + "." + key));
  return j.at(key);
}

inline std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("expected a number at " + path);
  return j.get<double>();
}

inline long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError("expected an integer at " + path);
  return j.get<long>();
}

inline Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("expected an array at " + path);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("expected a nonempty array of rows at " + path);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError("expected nonempty rows at " + path);
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("ragged matrix rows at " + row_path);
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], row_path + "[" + std::to_string(c) + "]");
  }
  return m;
}

// Graph literal: {"m": int, "arcs": [[from, to], ...]} with 1-based vertex
// ids; "complete": true is a shorthand and self-arcs are added unless
// "add_self_arcs" is false.
inline Digraph as_graph(const json& j, const std::string& path) {
  const int m = static_cast<int>(as_integer(require(j, "m", path), child(path, "m")));
  if (j.value("complete", false)) return Digraph::complete(m);
  const bool self_arcs = j.value("add_self_arcs", true);
  Digraph g = self_arcs ? Digraph::self_loops(m) : Digraph(m);
  if (j.contains("arcs")) {
    const json& arcs = j.at("arcs");
    if (!arcs.is_array()) throw ConfigError("expected an array at " + child(path, "arcs"));
    for (std::size_t e = 0; e < arcs.size(); ++e) {
      const std::string arc_path = child(path, "arcs") + "[" + std::to_string(e) + "]";
      if (!arcs[e].is_array() || arcs[e].size() != 2)
        throw ConfigError("expected an arc pair [from, to] at " + arc_path);
      const long from = as_integer(arcs[e][0], arc_path);
      const long to = as_integer(arcs[e][1], arc_path);
      if (from < 1 || from > m || to < 1 || to > m)
        throw ConfigError("vertex id out of range (ids are 1-based) at " + arc_path);
      g.add_arc(static_cast<int>(from - 1), static_cast<int>(to - 1));
    }
  }
  return g;
}

}  // namespace cfg

inline Problem problem_from_config(const json& spec, std::uint64_t seed,
                                   const std::string& path = "problem") {
  if (spec.contains("generator")) {
    const json& gen = spec.at("generator");
    const std::string gpath = cfg::child(path, "generator");
    const int m = static_cast<int>(cfg::as_integer(cfg::require(gen, "m", gpath), gpath + ".m"));
    const int n = static_cast<int>(cfg::as_integer(cfg::require(gen, "n", gpath), gpath + ".n"));
    const json& rows = cfg::require(gen, "block_rows", gpath);
    if (!rows.is_array()) throw ConfigError("expected an array at " + gpath + ".block_rows");
    std::vector<int> block_rows;
    for (const auto& r : rows)
      block_rows.push_back(static_cast<int>(cfg::as_integer(r, gpath + ".block_rows[]")));
    const bool solvable = gen.value("solvable", true);
    const std::uint64_t gen_seed = gen.contains("seed") ? gen.at("seed").get<std::uint64_t>() : seed;
    return generate_problem(m, n, block_rows, gen_seed, solvable);
  }
  if (spec.contains("blocks")) {
    const json& blocks = spec.at("blocks");
    if (!blocks.is_array() || blocks.empty())
      throw ConfigError("expected a nonempty array at " + cfg::child(path, "blocks"));
    std::vector<std::pair<Matrix, Vector>> pairs;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string bpath = cfg::child(path, "blocks") + "[" + std::to_string(i) + "]";
      pairs.emplace_back(cfg::as_matrix(cfg::require(blocks[i], "A", bpath), bpath + ".A"),
                         cfg::as_vector(cfg::require(blocks[i], "b", bpath), bpath + ".b"));
    }
    return Problem::from_blocks(pairs);
  }
  throw ConfigError(path + " must contain either \"generator\" or \"blocks\"");
}

inline GraphSchedule schedule_from_config(const json& spec, int m, std::uint64_t seed,
                                          const std::string& path = "schedule") {
  const json& kind_field = cfg::require(spec, "kind", path);
  if (!kind_field.is_string())
    throw ConfigError("expected a string at " + cfg::child(path, "kind"));
  const std::string kind = kind_field.get<std::string>();
  if (kind == "fixed")
    return GraphSchedule::fixed(cfg::as_graph(cfg::require(spec, "graph", path),
                                              cfg::child(path, "graph")));
  if (kind == "periodic") {
    const json& period = cfg::require(spec, "period", path);
    if (!period.is_array() || period.empty())
      throw ConfigError("expected a nonempty array at " + cfg::child(path, "period"));
    std::vector<Digraph> graphs;
    for (std::size_t i = 0; i < period.size(); ++i)
      graphs.push_back(
          cfg::as_graph(period[i], cfg::child(path, "period") + "[" + std::to_string(i) + "]"));
    return GraphSchedule::periodic(std::move(graphs));
  }
  if (kind == "seeded-random") {
    const int l = static_cast<int>(cfg::as_integer(cfg::require(spec, "l", path),
                                                   cfg::child(path, "l")));
    const std::uint64_t sched_seed = spec.contains("seed")
                                         ? spec.at("seed").get<std::uint64_t>()
                                         : derive_seed(seed, kStreamSchedule);
    const double arc_prob = spec.value("arc_prob", 0.35);
    const std::string style = spec.value("window_style", "planted-ring");
    if (style != "planted-ring")
      throw ConfigError(cfg::child(path, "window_style") + " supports only \"planted-ring\"");
    return GraphSchedule::seeded_random(m, sched_seed, l, arc_prob);
  }
  throw ConfigError(cfg::child(path, "kind") +
                    " must be one of \"fixed\", \"periodic\", \"seeded-random\"");
}

inline TreeTopology tree_from_config(const json& config, int m) {
  if (!config.contains("tree") || (config.at("tree").is_string() &&
                                   config.at("tree").get<std::string>() == "path"))
    return TreeTopology::path(m);
  const json& spec = config.at("tree");
  if (spec.is_string() && spec.get<std::string>() == "star") return TreeTopology::star(m);
  if (!spec.is_array()) throw ConfigError("tree must be \"path\", \"star\", or an edge list");
  TreeTopology tree;
  tree.m = m;
  for (std::size_t e = 0; e < spec.size(); ++e) {
    const std::string epath = "tree[" + std::to_string(e) + "]";
    if (!spec[e].is_array() || spec[e].size() != 2)
      throw ConfigError("expected an edge pair [tail, head] at " + epath);
    const long tail = cfg::as_integer(spec[e][0], epath);
    const long head = cfg::as_integer(spec[e][1], epath);
    if (tail < 1 || tail > m || head < 1 || head > m)
      throw ConfigError("vertex id out of range (ids are 1-based) at " + epath);
    tree.edges.emplace_back(static_cast<int>(tail - 1), static_cast<int>(head - 1));
  }
  return tree;
}

inline TimeVaryingProblem tracking_from_config(const json& config) {
  const json& spec = cfg::require(config, "tracking", "");
  const std::string path = "tracking";
  SinusoidalData data;
  data.A0 = cfg::as_matrix(cfg::require(spec, "A0", path), cfg::child(path, "A0"));
  data.dA = cfg::as_matrix(cfg::require(spec, "dA", path), cfg::child(path, "dA"));
  data.omega_A = cfg::as_number(cfg::require(spec, "omega_A", path), cfg::child(path, "omega_A"));
  data.b0 = cfg::as_vector(cfg::require(spec, "b0", path), cfg::child(path, "b0"));
  data.db = cfg::as_vector(cfg::require(spec, "db", path), cfg::child(path, "db"));
  data.omega_b = cfg::as_number(cfg::require(spec, "omega_b", path), cfg::child(path, "omega_b"));
  const json& rows = cfg::require(spec, "block_rows", path);
  std::vector<int> block_rows;
  for (const auto& r : rows)
    block_rows.push_back(static_cast<int>(cfg::as_integer(r, cfg::child(path, "block_rows[]"))));
  return make_sinusoidal_problem(data, block_rows, spec.value("det_floor", 1e-6));
}

struct ExperimentResult {
  int exit_code = 0;
  Trace trace;
  json summary;
};

namespace detail {

inline json certificate_json(const RateCertificate& cert) {
  json j;
  j["m"] = cert.m;
  j["n"] = cert.n;
  j["q"] = cert.q;
  j["rho"] = cert.rho;
  j["lambda"] = cert.lambda;
  j["method"] = cert.method();
  j["samples"] = cert.samples;
  return j;
}

inline json summary_json(const std::string& mode, const Trace& trace) {
  json j;
  j["mode"] = mode;
  j["converged"] = trace.converged;
  j["converged_at"] = trace.converged_at ? json(*trace.converged_at) : json(nullptr);
  j["empirical_rate"] = trace.empirical_rate ? json(*trace.empirical_rate) : json(nullptr);
  j["final_residual"] = trace.final_step().residual;
  j["final_disagreement"] = trace.final_step().disagreement;
  return j;
}

}  // namespace detail

// Runs one experiment described by `config` without touching the filesystem.
inline ExperimentResult execute_experiment(const json& config) {
  const json& mode_field = cfg::require(config, "mode", "");
  if (!mode_field.is_string()) throw ConfigError("expected a string at mode");
  const std::string mode = mode_field.get<std::string>();
  const std::uint64_t seed = config.value("seed", std::uint64_t{0});
  const json engine = config.value("engine", json::object());
  SyncOptions options;
  options.max_steps = engine.value("max_steps", long{100000});
  options.tol = engine.value("tol", 1e-9);
  options.seed = seed;

  ExperimentResult result;
  if (mode == "sync" || mode == "necessity" || mode == "rate") {
    const Problem problem = problem_from_config(cfg::require(config, "problem", ""), seed);
    const GraphSchedule sched =
        schedule_from_config(cfg::require(config, "schedule", ""), problem.m, seed);
    result.trace = run_sync(problem, sched, options);
    result.summary = detail::summary_json(mode, result.trace);
    if (mode == "rate") {
      const json rate = config.value("rate", json::object());
      const std::string rate_mode = rate.value("mode", "exhaustive");
      RhoMode rho_mode;
      if (rate_mode == "sampled")
        rho_mode = RhoSampled{seed, rate.value("count", long{1000})};
      else if (rate_mode == "exhaustive")
        rho_mode = RhoExhaustive{};
      else
        throw ConfigError("rate.mode must be \"exhaustive\" or \"sampled\"");
      result.summary["lambda_cert"] =
          detail::certificate_json(rho_bound(problem.projectors(), rho_mode));
    }
    result.exit_code = result.trace.converged ? 0 : 2;
  } else if (mode == "async") {
    const Problem problem = problem_from_config(cfg::require(config, "problem", ""), seed);
    const GraphSchedule base =
        schedule_from_config(cfg::require(config, "schedule", ""), problem.m, seed);
    const json& events = cfg::require(config, "events", "");
    std::vector<double> t_min, t_max;
    for (const auto& v : cfg::require(events, "T", "events"))
      t_min.push_back(cfg::as_number(v, "events.T[]"));
    for (const auto& v : cfg::require(events, "T_bar", "events"))
      t_max.push_back(cfg::as_number(v, "events.T_bar[]"));
    const double horizon = cfg::as_number(cfg::require(events, "horizon", "events"), "events.horizon");
    const EventSchedule sched = generate_event_schedule(problem.m, t_min, t_max, horizon, seed);
    AsyncOptions async_options;
    async_options.max_events = events.value("max_events", long{100000});
    async_options.tol = options.tol;
    async_options.seed = seed;
    result.trace = async_run(problem, base, sched, async_options);
    result.summary = detail::summary_json(mode, result.trace);
    result.exit_code = result.trace.converged ? 0 : 2;
  } else if (mode == "tracking") {
    const TimeVaryingProblem tvp = tracking_from_config(config);
    const GraphSchedule sched =
        schedule_from_config(cfg::require(config, "schedule", ""), tvp.m, seed);
    const json& spec = config.at("tracking");
    const long horizon = spec.value("horizon", long{300});
    std::optional<std::vector<Vector>> initial;
    if (spec.contains("x0")) {
      std::vector<Vector> states;
      for (std::size_t i = 0; i < spec.at("x0").size(); ++i)
        states.push_back(cfg::as_vector(spec.at("x0")[i], "tracking.x0[" + std::to_string(i) + "]"));
      initial = std::move(states);
    }
    result.trace = run_tracking(tvp, sched, horizon, initial);
    result.summary = detail::summary_json(mode, result.trace);
    result.exit_code = 0;  // tracking has no convergence criterion
  } else if (mode == "lsq") {
    const Problem problem = problem_from_config(cfg::require(config, "problem", ""), seed);
    const GraphSchedule sched =
        schedule_from_config(cfg::require(config, "schedule", ""), problem.m, seed);
    const TreeTopology tree = tree_from_config(config, problem.m);
    LsqResult lsq = solve_lsq(problem, tree, sched, options);
    result.trace = std::move(lsq.trace);
    result.summary = detail::summary_json(mode, result.trace);
    result.summary["x_hat"] = std::vector<double>(lsq.x_hat.data(), lsq.x_hat.data() + lsq.x_hat.size());
    result.exit_code = result.trace.converged ? 0 : 2;
  } else {
    throw ConfigError("mode must be one of sync, async, tracking, lsq, rate, necessity");
  }
  return result;
}

// Executes and writes <out>/trace.csv and <out>/summary.json.
inline int run_experiment(const json& config) {
  const ExperimentResult result = execute_experiment(config);
  const std::filesystem::path out_dir = config.value("out", std::string("out"));
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "trace.csv", std::ios::binary);
    if (!csv) throw Error("cannot open " + (out_dir / "trace.csv").string() + " for writing");
    write_trace_csv(result.trace, csv);
  }
  {
    std::ofstream js(out_dir / "summary.json", std::ios::binary);
    if (!js) throw Error("cannot open " + (out_dir / "summary.json").string() + " for writing");
    js << result.summary.dump(2) << '\n';
  }
  return result.exit_code;
}

// Canned experiment configurations with fixed default seeds.
inline json recipe_config(const std::string& name) {
  auto graph_complete = [](int m) { return json{{"m", m}, {"complete", true}}; };
  if (name == "sync-unique") {
    return json{{"mode", "sync"},
                {"seed", 1},
                {"problem", {{"generator", {{"m", 3}, {"n", 4}, {"block_rows", {2, 1, 1}}, {"solvable", true}}}}},
                {"schedule", {{"kind", "seeded-random"}, {"l", 3}}},
                {"engine", {{"max_steps", 10000}, {"tol", 1e-9}}}};
  }
  if (name == "sync-nonunique") {
    return json{{"mode", "sync"},
                {"seed", 2},
                {"problem", {{"generator", {{"m", 3}, {"n", 4}, {"block_rows", {1, 1, 1}}, {"solvable", true}}}}},
                {"schedule", {{"kind", "seeded-random"}, {"l", 3}}},
                {"engine", {{"max_steps", 10000}, {"tol", 1e-9}}}};
  }
  if (name == "rate-corollary") {
    // Two agents whose solution lines meet at 60 degrees; rho = cos 60 = 0.5.
    return json{{"mode", "rate"},
                {"seed", 3},
                {"problem",
                 {{"blocks",
                   {{{"A", {{0.0, 1.0}}}, {"b", {0.0}}},
                    {{"A", {{-0.8660254037844386, 0.5}}}, {"b", {0.0}}}}}}},
                {"schedule", {{"kind", "fixed"}, {"graph", graph_complete(2)}}},
                {"engine", {{"max_steps", 400}, {"tol", 1e-12}}},
                {"rate", {{"mode", "exhaustive"}}}};
  }
  if (name == "necessity") {
    return json{{"mode", "necessity"},
                {"seed", 4},
                {"problem", {{"generator", {{"m", 4}, {"n", 4}, {"block_rows", {1, 1, 1, 1}}, {"solvable", true}}}}},
                {"schedule",
                 {{"kind", "fixed"},
                  {"graph", {{"m", 4}, {"arcs", {{1, 2}, {2, 1}, {3, 4}, {4, 3}}}}}}},
                {"engine", {{"max_steps", 10000}, {"tol", 1e-9}}}};
  }
  if (name == "async-fixed") {
    return json{{"mode", "async"},
                {"seed", 5},
                {"problem", {{"generator", {{"m", 3}, {"n", 3}, {"block_rows", {1, 1, 1}}, {"solvable", true}}}}},
                {"schedule",
                 {{"kind", "fixed"}, {"graph", {{"m", 3}, {"arcs", {{1, 2}, {2, 3}, {3, 1}}}}}}},
                {"events",
                 {{"T", {0.5, 0.5, 0.5}}, {"T_bar", {1.7, 1.7, 1.7}}, {"horizon", 800.0}, {"max_events", 2000}}},
                {"engine", {{"tol", 1e-9}}}};
  }
  if (name == "tracking-paper-example") {
    return json{{"mode", "tracking"},
                {"seed", 6},
                {"tracking",
                 {{"A0", {{2.0, 3.0, 5.0}, {4.0, 9.0, -8.0}, {1.0, 5.0, 10.0}}},
                  {"dA", {{0.1, 0.09, -0.24}, {0.2, -0.6, 0.1}, {0.03, 0.05, 0.4}}},
                  {"omega_A", 0.1},
                  {"b0", {10.0, 5.0, 16.0}},
                  {"db", {0.1, 0.2, 0.3}},
                  {"omega_b", 0.6},
                  {"block_rows", {1, 1, 1}},
                  {"horizon", 300},
                  {"x0", {{11.5, -1.0, -2.0}, {1.25, 0.0, 0.0}, {-9.0, 1.0, 2.0}}}}},
                {"schedule", {{"kind", "fixed"}, {"graph", graph_complete(3)}}}};
  }
  if (name == "lsq-demo") {
    return json{{"mode", "lsq"},
                {"seed", 7},
                {"problem", {{"generator", {{"m", 3}, {"n", 3}, {"block_rows", {3, 3, 3}}, {"solvable", false}}}}},
                {"schedule", {{"kind", "seeded-random"}, {"l", 3}}},
                {"tree", "path"},
                {"engine", {{"max_steps", 30000}, {"tol", 1e-9}}}};
  }
  throw ConfigError("unknown recipe: " + name);
}

inline std::vector<std::string> recipe_names() {
  return {"sync-unique",      "sync-nonunique", "rate-corollary", "necessity",
          "async-fixed",      "tracking-paper-example", "lsq-demo"};
}

}  // namespace projcons
