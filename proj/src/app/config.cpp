#include "momentflow/app/config.hpp"

#include <fstream>
#include <sstream>

namespace momentflow::app {

namespace {

using nlohmann::json;

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const char* key, double fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v->get<double>();
}

long get_integer(const json& j, const char* key, long fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  return v->get<long>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
  return v->get<bool>();
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  const json* v = find(j, key);
  if (v == nullptr) return empty;
  if (!v->is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return *v;
}

void parse_flow(const json& j, FlowOptions& f, double& diam_tol) {
  f.rel_tol = get_number(j, "rel_tol", f.rel_tol);
  f.abs_tol = get_number(j, "abs_tol", f.abs_tol);
  f.grad_stop = get_number(j, "grad_stop", f.grad_stop);
  f.t_max = get_number(j, "t_max", f.t_max);
  f.sample_stride = static_cast<int>(get_integer(j, "sample_stride", f.sample_stride));
  diam_tol = get_number(j, "tail_diam_tol", diam_tol);
  try {
    f.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

SeedConfig parse_seeds(const json& j, int n) {
  SeedConfig s;
  if (const json* ex = find(j, "explicit")) {
    if (!ex->is_array()) throw ConfigError("'seeds.explicit' must be an array");
    for (const auto& row : *ex) {
      if (!row.is_array() || row.size() != static_cast<std::size_t>(2 * n)) {
        throw ConfigError("each explicit seed needs 2n = " + std::to_string(2 * n) + " numbers (re, im interleaved)");
      }
      std::vector<double> flat;
      for (const auto& x : row) {
        if (!x.is_number()) throw ConfigError("explicit seed entries must be numbers");
        flat.push_back(x.get<double>());
      }
      s.explicit_seeds.push_back(std::move(flat));
    }
  }
  s.count = static_cast<int>(get_integer(j, "count", 0));
  if (s.count < 0) throw ConfigError("'seeds.count' must be non-negative");
  const long rs = get_integer(j, "rng_seed", 1);
  if (rs < 0) throw ConfigError("'seeds.rng_seed' must be non-negative");
  s.rng_seed = static_cast<std::uint64_t>(rs);
  s.coordinate_points = get_bool(j, "coordinate_points", false);
  return s;
}

AlphaConfig parse_alpha(const json& j) {
  AlphaConfig a;
  a.loja.tail_fraction = get_number(j, "tail_fraction", a.loja.tail_fraction);
  a.loja.min_samples = static_cast<int>(get_integer(j, "min_samples", a.loja.min_samples));
  a.loja.min_decades = get_number(j, "min_decades", a.loja.min_decades);
  a.loja.f_floor = get_number(j, "f_floor", a.loja.f_floor);
  if (find(j, "fixed_alpha")) a.loja.fixed_alpha = get_number(j, "fixed_alpha", 0.0);
  a.rel_tol = get_number(j, "rel_tol", a.rel_tol);
  a.abs_tol = get_number(j, "abs_tol", a.abs_tol);
  a.region_samples = static_cast<std::size_t>(get_integer(j, "region_samples", static_cast<long>(a.region_samples)));
  if (find(j, "region_radius")) a.region_radius = get_number(j, "region_radius", 0.0);
  a.region_seed = static_cast<std::uint64_t>(get_integer(j, "region_seed", static_cast<long>(a.region_seed)));
  if (find(j, "expect_alpha")) a.expect_alpha = get_number(j, "expect_alpha", 0.0);
  a.expect_tol = get_number(j, "expect_tol", a.expect_tol);
  if (!(a.loja.tail_fraction > 0.0 && a.loja.tail_fraction <= 1.0)) {
    throw ConfigError("'tail_fraction' must lie in (0, 1]");
  }
  return a;
}

CounterexampleConfig parse_counterexample(const json& j) {
  CounterexampleConfig c;
  auto& s = c.search;
  s.band = get_number(j, "band", s.band);
  s.exit_radius = get_number(j, "exit_radius", s.exit_radius);
  s.theta_cells = static_cast<int>(get_integer(j, "theta_cells", s.theta_cells));
  s.offset_cells = static_cast<int>(get_integer(j, "offset_cells", s.offset_cells));
  s.rel_tol = get_number(j, "rel_tol", s.rel_tol);
  s.abs_tol = get_number(j, "abs_tol", s.abs_tol);
  s.max_steps = get_integer(j, "max_steps", s.max_steps);
  if (!(s.band > 0.0) || !(s.exit_radius > 1.0) || s.theta_cells < 1 || s.offset_cells < 1) {
    throw ConfigError("counterexample: band > 0, exit_radius > 1 and positive grid sizes required");
  }
  if (const json* in = find(j, "inside_seeds")) {
    if (!in->is_array()) throw ConfigError("'inside_seeds' must be an array of [r, theta]");
    c.inside_seeds.clear();
    for (const auto& p : *in) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ConfigError("each inside seed is [r, theta]");
      }
      const PlanePoint q{p[0].get<double>(), p[1].get<double>()};
      if (!(q.r > 0.0)) throw ConfigError("inside seeds need r > 0");
      c.inside_seeds.push_back(q);
    }
  }
  c.inside_window = get_number(j, "inside_window", c.inside_window);
  c.diam_tol = get_number(j, "tail_diam_tol", c.diam_tol);
  c.inside_flow.t_max = get_number(j, "inside_t_max", c.inside_flow.t_max);
  return c;
}

std::vector<double> number_list(const json& j, const char* key, std::vector<double> fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_array()) throw ConfigError(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(std::string("'") + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

ContinuityConfig parse_continuity(const json& j, int n) {
  ContinuityConfig c;
  c.point = number_list(j, "point", {});
  if (c.point.size() != static_cast<std::size_t>(2 * n)) {
    throw ConfigError("'continuity.point' needs 2n = " + std::to_string(2 * n) + " numbers");
  }
  c.eps = number_list(j, "eps", c.eps);
  for (double e : c.eps) {
    if (!(e > 0.0)) throw ConfigError("'continuity.eps' entries must be positive");
  }
  c.mc_probes = static_cast<int>(get_integer(j, "mc_probes", c.mc_probes));
  c.seed = static_cast<std::uint64_t>(get_integer(j, "seed", static_cast<long>(c.seed)));
  return c;
}

VerifyConfig parse_verify(const json& j, const std::filesystem::path& base) {
  VerifyConfig v;
  const json* list = find(j, "configs");
  if (list == nullptr || !list->is_array() || list->empty()) {
    throw ConfigError("'verify.configs' must be a non-empty array of paths");
  }
  for (const auto& p : *list) {
    if (!p.is_string()) throw ConfigError("'verify.configs' entries must be strings");
    std::filesystem::path path = p.get<std::string>();
    v.configs.push_back(path.is_absolute() ? path : base / path);
  }
  v.samples = static_cast<int>(get_integer(j, "samples", v.samples));
  v.rng_seed = static_cast<std::uint64_t>(get_integer(j, "rng_seed", static_cast<long>(v.rng_seed)));
  if (v.samples < 1) throw ConfigError("'verify.samples' must be positive");
  return v;
}

}  // namespace

std::vector<ProjectivePoint> RunConfig::seeds() const {
  std::vector<ProjectivePoint> out;
  if (!setup) return out;
  const int n = setup->n();
  for (const auto& flat : seed_config.explicit_seeds) out.push_back(ProjectivePoint::from_interleaved(flat));
  if (seed_config.coordinate_points) {
    for (int i = 0; i < n; ++i) out.push_back(ProjectivePoint::basis_point(n, i));
  }
  std::mt19937_64 rng(seed_config.rng_seed);
  for (int k = 0; k < seed_config.count; ++k) out.push_back(random_point(n, rng));
  return out;
}

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& source) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.empty()) throw ConfigError("config is empty");
  RunConfig cfg;
  cfg.source = source;
  cfg.name = source.empty() ? "config" : source.stem().string();

  if (const json* s = find(j, "setup")) {
    try {
      cfg.setup = setup_from_json(*s);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("setup: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("setup: ") + e.what());
    }
  }
  if (find(j, "seeds")) {
    if (!cfg.setup) throw ConfigError("'seeds' requires a 'setup'");
    try {
      cfg.seed_config = parse_seeds(section(j, "seeds"), cfg.setup->n());
      (void)cfg.seeds();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("seeds: ") + e.what());
    }
  }
  parse_flow(section(j, "flow"), cfg.flow, cfg.tail_diam_tol);
  if (find(j, "lojasiewicz")) cfg.alpha = parse_alpha(section(j, "lojasiewicz"));
  const json& st = section(j, "strata");
  cfg.strata.theta_merge = get_number(st, "theta_merge", cfg.strata.theta_merge);
  cfg.strata.value_tol = get_number(st, "value_tol", cfg.strata.value_tol);
  cfg.strata.link_critical_paths = get_bool(st, "link_critical_paths", cfg.strata.link_critical_paths);
  cfg.strata.link_depth = static_cast<int>(get_integer(st, "link_depth", cfg.strata.link_depth));
  cfg.strata.flow = cfg.flow;
  if (find(st, "expect_components")) cfg.expect_components = static_cast<int>(get_integer(st, "expect_components", 0));
  if (find(j, "continuity")) {
    if (!cfg.setup) throw ConfigError("'continuity' requires a 'setup'");
    cfg.continuity = parse_continuity(section(j, "continuity"), cfg.setup->n());
  }
  if (find(j, "counterexample")) cfg.counterexample = parse_counterexample(section(j, "counterexample"));
  if (find(j, "verify")) {
    cfg.verify = parse_verify(section(j, "verify"), source.empty() ? std::filesystem::path(".") : source.parent_path());
  }
  if (const json* o = find(j, "out")) {
    if (!o->is_string()) throw ConfigError("'out' must be a string");
    cfg.out = o->get<std::string>();
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_config(j, path);
}

FlowOptions certificate_flow(const RunConfig& cfg) {
  FlowOptions f = cfg.flow;
  if (cfg.alpha) {
    f.rel_tol = cfg.alpha->rel_tol;
    f.abs_tol = cfg.alpha->abs_tol;
  } else {
    f.rel_tol = 1e-12;
    f.abs_tol = 1e-14;
  }
  return f;
}

}  // namespace momentflow::app
