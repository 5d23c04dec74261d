#include <cstdio>

#include "momentflow/app/commands.hpp"
#include "momentflow/app/output.hpp"

namespace momentflow::app {

using nlohmann::json;

namespace {

struct Suite {
  json checks = json::array();
  std::vector<std::string> failed;

  void add(const std::string& config, const std::string& invariant, bool pass, json metrics) {
    checks.push_back({{"config", config},
                      {"invariant", invariant},
                      {"status", pass ? "pass" : "fail"},
                      {"metrics", std::move(metrics)}});
    if (!pass) failed.push_back(config + "/" + invariant);
  }
};

void verify_setup(Suite& suite, const RunConfig& cfg, const VerifyConfig& v, const CommandOptions& opts) {
  const GroupSetup& setup = *cfg.setup;
  const std::string& name = cfg.name;

  const double grad_err = check_gradient(setup, v.samples, v.rng_seed, 1e-5, gradient_fn(opts));
  suite.add(name, "gradient", grad_err <= 1e-6, {{"max_rel_error", num(grad_err)}, {"tol", 1e-6}, {"step", 1e-5}});

  const auto rel = check_moment_defining_relation(setup, v.samples, v.rng_seed + 1);
  suite.add(name, "defining_relation", rel.max_residual <= 1e-6,
            {{"max_residual", num(rel.max_residual)}, {"sign", rel.sign}, {"tol", 1e-6}});

  const double eq = check_equivariance(setup, v.samples, v.rng_seed + 2);
  suite.add(name, "equivariance", eq <= 1e-10, {{"max_residual", num(eq)}, {"tol", 1e-10}});

  if (setup.kind() == GroupKind::FullUnitary || setup.kind() == GroupKind::SpecialUnitary) {
    const double expected = setup.kind() == GroupKind::FullUnitary ? 1.0 : 1.0 - 1.0 / setup.n();
    std::mt19937_64 rng(v.rng_seed + 3);
    double f_err = 0.0, g_max = 0.0;
    for (int k = 0; k < v.samples; ++k) {
      const ProjectivePoint p = random_point(setup.n(), rng);
      f_err = std::max(f_err, std::abs(f_value(p, setup) - expected));
      g_max = std::max(g_max, gradient_fn(opts)(p, setup).norm());
    }
    suite.add(name, "degenerate_constant", f_err <= 1e-10 && g_max <= 1e-10,
              {{"expected_f", num(expected)}, {"max_f_error", num(f_err)}, {"max_gradnorm", num(g_max)}, {"tol", 1e-10}});
  }
}

void verify_flows(Suite& suite, const RunConfig& cfg, const CommandOptions& opts) {
  const FlowRun run = run_flow(cfg, opts);
  std::size_t converged = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < run.trajectories.size(); ++k) {
    if (run.trajectories[k].termination == Termination::GradStop) ++converged;
    worst = std::max(worst, run.limits[k].certificate.diameter);
  }
  suite.add(cfg.name, "single_point_convergence", run.pass,
            {{"seeds", run.trajectories.size()},
             {"converged", converged},
             {"max_tail_diameter", num(worst)},
             {"tol", cfg.tail_diam_tol}});

  const bool torus = cfg.setup->kind() == GroupKind::Torus;
  if (!torus && !cfg.expect_components) return;
  const StratifyRun st = run_stratify(cfg, opts);
  if (torus) {
    suite.add(cfg.name, "oracle_equivalence", st.oracle_pass, st.report.at("oracle"));
  }
  if (cfg.expect_components) {
    suite.add(cfg.name, "critical_components", st.components == static_cast<std::size_t>(*cfg.expect_components),
              {{"components", st.components}, {"expected", *cfg.expect_components}});
  }
}

void verify_alpha(Suite& suite, const RunConfig& cfg, const CommandOptions& opts) {
  const AlphaRun run = run_alpha(cfg, opts);
  json alphas = json::array();
  for (const auto& f : run.fits) alphas.push_back(f ? num(f->alpha) : json(nullptr));
  json metrics = {{"alpha", alphas}, {"max_alpha", run.report.at("max_alpha")}};
  if (cfg.alpha->expect_alpha) {
    metrics["expected_alpha"] = *cfg.alpha->expect_alpha;
    metrics["tol"] = cfg.alpha->expect_tol;
  }
  suite.add(cfg.name, "lojasiewicz", run.pass, metrics);
}

void verify_continuity(Suite& suite, const RunConfig& cfg, const CommandOptions& opts) {
  const ContinuityConfig& c = *cfg.continuity;
  const ProjectivePoint x = ProjectivePoint::from_interleaved(c.point);
  const auto results = parallel_map(c.eps.size(), opts.jobs, [&](std::size_t k) {
    ProbeOptions po;
    po.flow = cfg.flow;
    po.mc_probes = c.mc_probes;
    po.seed = c.seed + k;
    return continuity_probe(*cfg.setup, x, c.eps[k], po);
  });
  bool pass = true;
  json probes = json::array();
  for (const auto& r : results) {
    pass = pass && r.found && r.mc_failures == 0 && r.mc_probes >= c.mc_probes;
    probes.push_back(to_json(r));
  }
  suite.add(cfg.name, "continuity", pass, {{"probes", probes}});
}

void verify_counterexample(Suite& suite, const RunConfig& cfg, const CommandOptions& opts) {
  const CounterexampleRun run = run_counterexample(cfg, opts);
  suite.add(cfg.name, "counterexample", run.pass,
            {{"witness", run.report.at("witness")}, {"inside", run.report.at("inside")}});
}

}  // namespace

VerifyRun run_verify(const RunConfig& cfg, const CommandOptions& opts) {
  if (!cfg.verify) throw ConfigError("verify: config has no 'verify' section");
  const VerifyConfig& v = *cfg.verify;
  Suite suite;
  json configs = json::array();
  for (const auto& path : v.configs) {
    const RunConfig sub = load_config(path);
    configs.push_back(sub.name);
    if (sub.setup) {
      verify_setup(suite, sub, v, opts);
      // configs with a lojasiewicz section are fit-only; degenerate seeds there need not certify a tail
      if (!sub.alpha && !sub.seeds().empty()) verify_flows(suite, sub, opts);
      if (sub.alpha && !sub.seeds().empty()) verify_alpha(suite, sub, opts);
      if (sub.continuity) verify_continuity(suite, sub, opts);
    }
    if (sub.counterexample) verify_counterexample(suite, sub, opts);
  }

  VerifyRun run;
  json report = report_header("verify", cfg);
  report["configs"] = configs;
  report["samples"] = v.samples;
  report["rng_seed"] = v.rng_seed;
  if (opts.corrupt_gradient != 0.0) report["corrupt_gradient"] = opts.corrupt_gradient;
  report["checks"] = suite.checks;
  report["failed"] = suite.failed;
  run.pass = suite.failed.empty();
  report["pass"] = run.pass;
  run.failed = suite.failed;
  run.report = std::move(report);
  return run;
}

int cmd_verify(const RunConfig& cfg, const CommandOptions& opts) {
  const VerifyRun run = run_verify(cfg, opts);
  write_json(opts.out / "verify.json", run.report);
  for (const auto& f : run.failed) std::fprintf(stderr, "failed invariant: %s\n", f.c_str());
  return run.pass ? 0 : 1;
}

}  // namespace momentflow::app
