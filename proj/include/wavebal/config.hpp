#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavebal/harness.hpp"
#include "wavebal/hypotheses.hpp"
#include "wavebal/solver.hpp"
#include "wavebal/system.hpp"

namespace wavebal {

using nlohmann::json;

inline constexpr const char* kCodeVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what) {}
};

// ---------------------------------------------------------------------------
// Run configuration (JSON). Field paths are reported on schema errors.
// ---------------------------------------------------------------------------
struct RunConfig {
  std::string system = "linear_reaction";
  json params = json::object();
  Grid1D grid{0.0, 1.0, 256};
  double eps = 1e-2;
  double cfl = 0.45;
  int order = 1;
  double t_end = 0.5;
  std::string model = "global_term";
  std::string a_mode = "suggest";
  std::vector<double> a_entries;
  json snapshots = 100;  // int: every k steps; {"times": m}: m target times
  std::uint64_t seed = 12345;
  double dt_max = std::numeric_limits<double>::infinity();
  std::string u0_preset = "default";
  double u0_value = 1.0;
  json raw = json::object();
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key))
    throw ConfigError(path + "." + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key, e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& key,
         T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + "." + key, e.what());
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  RunConfig c;
  c.raw = j;
  c.system = detail::get_or<std::string>(j, "", "system", c.system);
  if (j.contains("params")) c.params = j.at("params");
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    const double xmin = detail::get_or<double>(g, "grid", "xmin", 0.0);
    const double xmax = detail::get_or<double>(g, "grid", "xmax", 1.0);
    const int n = detail::require<int>(g, "grid", "n");
    if (n <= 0) throw ConfigError("grid.n", "expected a positive integer");
    if (!(xmax > xmin)) throw ConfigError("grid.xmax", "need xmax > xmin");
    c.grid = Grid1D(xmin, xmax, n);
  }
  c.eps = detail::get_or<double>(j, "", "eps", c.eps);
  if (!(c.eps > 0.0)) throw ConfigError("eps", "expected a positive real");
  c.cfl = detail::get_or<double>(j, "", "cfl", c.cfl);
  if (!(c.cfl > 0.0 && c.cfl <= 1.0))
    throw ConfigError("cfl", "expected a real in (0, 1]");
  c.order = detail::get_or<int>(j, "", "order", c.order);
  if (c.order != 1 && c.order != 2)
    throw ConfigError("order", "expected 1 or 2");
  c.t_end = detail::get_or<double>(j, "", "t_end", c.t_end);
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end", "expected t_end >= 0");
  c.model = detail::get_or<std::string>(j, "", "model", c.model);
  if (c.model != "global_term" && c.model != "alternative")
    throw ConfigError("model", "expected \"global_term\" or \"alternative\"");
  if (j.contains("A")) {
    const json& a = j.at("A");
    c.a_mode = detail::get_or<std::string>(a, "A", "mode", "suggest");
    if (c.a_mode == "explicit") {
      c.a_entries = detail::require<std::vector<double>>(a, "A", "entries");
    } else if (c.a_mode != "suggest") {
      throw ConfigError("A.mode", "expected \"suggest\" or \"explicit\"");
    }
  }
  if (j.contains("snapshots")) c.snapshots = j.at("snapshots");
  c.seed = detail::get_or<std::uint64_t>(j, "", "seed", c.seed);
  c.dt_max = detail::get_or<double>(j, "", "dt_max", c.dt_max);
  if (j.contains("u0")) {
    const json& u = j.at("u0");
    c.u0_preset = detail::get_or<std::string>(u, "u0", "preset", "default");
    c.u0_value = detail::get_or<double>(u, "u0", "value", 1.0);
  }
  return c;
}

inline RunConfig load_run_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file, "cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(file, e.what());
  }
  return parse_run_config(j);
}

inline SystemDefinition system_from_config(const RunConfig& c) {
  const json& p = c.params;
  if (c.system == "linear_reaction") {
    return make_linear_reaction(detail::get_or<double>(p, "params", "a", 1.0),
                                detail::get_or<double>(p, "params", "lambda", 1.0));
  }
  if (c.system == "elasticity") {
    ElasticityOptions opt;
    opt.gamma = detail::get_or<double>(p, "params", "gamma", opt.gamma);
    opt.Gamma = detail::get_or<double>(p, "params", "Gamma", opt.Gamma);
    opt.s_lin = detail::get_or<double>(p, "params", "s_lin", opt.s_lin);
    opt.s_sin = detail::get_or<double>(p, "params", "s_sin", opt.s_sin);
    opt.damping_k = detail::get_or<double>(p, "params", "damping_k", 1.0);
    const std::string damping =
        detail::get_or<std::string>(p, "params", "damping", "linear");
    if (damping == "linear")
      opt.damping = Damping::linear;
    else if (damping == "ramp")
      opt.damping = Damping::ramp;
    else if (damping == "none")
      opt.damping = Damping::none;
    else
      throw ConfigError("params.damping", "expected linear|ramp|none");
    return make_elasticity(opt);
  }
  if (c.system == "combustion") {
    CombustionOptions opt;
    opt.gamma = detail::get_or<double>(p, "params", "gamma", opt.gamma);
    opt.Gamma = detail::get_or<double>(p, "params", "Gamma", opt.Gamma);
    opt.p_v = detail::get_or<double>(p, "params", "p_v", opt.p_v);
    opt.p_z = detail::get_or<double>(p, "params", "p_z", opt.p_z);
    opt.cbar = detail::get_or<double>(p, "params", "cbar", opt.cbar);
    opt.b = detail::get_or<double>(p, "params", "b", opt.b);
    opt.K = detail::get_or<double>(p, "params", "K", opt.K);
    return make_combustion(opt);
  }
  throw ConfigError("system",
                    "expected linear_reaction|elasticity|combustion, got \"" +
                        c.system + "\"");
}

inline Profile profile_from_config(const RunConfig& c,
                                   const SystemDefinition& sys) {
  if (c.u0_preset == "constant") {
    const double v = c.u0_value;
    const int n = sys.n;
    return [v, n](double) { return Vec::Constant(n, v).eval(); };
  }
  if (c.u0_preset == "steady") {
    if (sys.kind != SystemKind::linear_reaction)
      throw ConfigError("u0.preset",
                        "steady preset requires the linear_reaction system");
    const double a = sys.params.at("a");
    const double lambda = sys.params.at("lambda");
    const double v = c.u0_value;
    return [a, lambda, v](double x) {
      return Vec{{v * std::exp(-lambda * x / a)}};
    };
  }
  if (c.u0_preset == "default") {
    Scenario sc = builtin_scenario(
        c.system == "elasticity" ? "elasticity_damped" : c.system);
    return sc.u0;
  }
  throw ConfigError("u0.preset", "expected default|constant|steady");
}

inline RelaxationMatrix matrix_from_config(const RunConfig& c,
                                           const SystemDefinition& sys) {
  if (c.a_mode == "suggest") return suggest_A(sys);
  if (static_cast<int>(c.a_entries.size()) != sys.n * sys.n)
    throw ConfigError("A.entries", "expected n*n row-major entries");
  Mat a(sys.n, sys.n);
  for (int r = 0; r < sys.n; ++r)
    for (int col = 0; col < sys.n; ++col)
      a(r, col) = c.a_entries[r * sys.n + col];
  return RelaxationMatrix(a);
}

inline SolverConfig solver_config_from(const RunConfig& c) {
  SolverConfig cfg(c.eps, c.t_end, c.order);
  cfg.cfl = c.cfl;
  cfg.model = c.model == "alternative" ? RelaxModel::alternative
                                       : RelaxModel::global_term;
  cfg.seed = c.seed;
  cfg.dt_max = c.dt_max;
  if (c.snapshots.is_number_integer()) {
    cfg.snapshots = SnapshotSpec::steps(std::max(1, c.snapshots.get<int>()));
  } else if (c.snapshots.is_object() && c.snapshots.contains("times")) {
    cfg.snapshots = SnapshotSpec::times(
        std::max(2, c.snapshots.at("times").get<int>()));
  } else {
    throw ConfigError("snapshots", "expected an integer or {\"times\": m}");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Canonical config hash (FNV-1a over the sorted-key dump) and the run
// manifest written next to every output set.
// ---------------------------------------------------------------------------
inline std::string canonical_config_hash(const json& j) {
  const std::string dump = j.dump();  // object keys are sorted
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

struct RunManifest {
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
  json config;

  json to_json() const {
    return json{{"config_hash", config_hash}, {"code_version", code_version},
                {"seed", seed},               {"started", started},
                {"finished", finished},       {"outputs", outputs},
                {"config", config}};
  }
};

inline std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace wavebal
