#include "momentflow/app/commands.hpp"

#include <cmath>
#include <cstdio>

#include "momentflow/app/output.hpp"

namespace momentflow::app {

using nlohmann::json;

namespace {

const GroupSetup& require_setup(const RunConfig& cfg, const char* command) {
  if (!cfg.setup) throw ConfigError(std::string(command) + ": config has no 'setup'");
  return *cfg.setup;
}

std::vector<ProjectivePoint> require_seeds(const RunConfig& cfg, const char* command) {
  auto seeds = cfg.seeds();
  if (seeds.empty()) throw ConfigError(std::string(command) + ": config has no seeds");
  return seeds;
}

std::string seed_file(const char* prefix, std::size_t k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", prefix, k);
  return buf;
}

bool constant_f(GroupKind kind) { return kind == GroupKind::FullUnitary || kind == GroupKind::SpecialUnitary; }

json loja_summary(const Trajectory& traj) {
  try {
    const LojaFit fit = fit_exponent(traj);
    return {{"alpha", num(fit.alpha)}, {"c", num(fit.c)}, {"b", num(fit.b)}, {"flagged", fit.flagged}};
  } catch (const FitError& e) {
    return {{"error", e.what()}};
  }
}

}  // namespace

GradientFn gradient_fn(const CommandOptions& opts) {
  if (opts.corrupt_gradient == 0.0) return grad_f;
  const double scale = 1.0 + opts.corrupt_gradient;
  return [scale](const ProjectivePoint& p, const GroupSetup& s) {
    TangentVector g = grad_f(p, s);
    g.dir *= scale;
    return g;
  };
}

// ---------------------------------------------------------------------------
// flow

FlowRun run_flow(const RunConfig& cfg, const CommandOptions& opts) {
  const GroupSetup& setup = require_setup(cfg, "flow");
  FlowRun run;
  run.seeds = require_seeds(cfg, "flow");
  const GradientFn gfn = gradient_fn(opts);
  run.trajectories = parallel_map(run.seeds.size(), opts.jobs, [&](std::size_t k) {
    return integrate(run.seeds[k], setup, cfg.flow, gfn);
  });

  json report = report_header("flow", cfg);
  report["flow"] = {{"rel_tol", cfg.flow.rel_tol}, {"abs_tol", cfg.flow.abs_tol}, {"grad_stop", cfg.flow.grad_stop},
                    {"t_max", cfg.flow.t_max},     {"sample_stride", cfg.flow.sample_stride},
                    {"tail_diam_tol", cfg.tail_diam_tol}, {"tail_window", "final tenth of the time span"}};
  json seeds = json::array();
  run.pass = true;
  bool all_stationary = true;
  for (std::size_t k = 0; k < run.seeds.size(); ++k) {
    const Trajectory& tr = run.trajectories[k];
    run.limits.push_back(omega_limit(tr, final_tenth_window(tr), cfg.tail_diam_tol));
    const OmegaLimit& lim = run.limits.back();
    const FlowSample& end = tr.final_sample();
    if (tr.samples.size() > 1) all_stationary = false;
    if (lim.certificate.status != CertStatus::Pass) run.pass = false;
    seeds.push_back({{"index", k},
                     {"file", seed_file("traj", k)},
                     {"seed", point_json(run.seeds[k])},
                     {"termination", to_string(tr.termination)},
                     {"t_end", num(end.t)},
                     {"f_end", num(end.f)},
                     {"gradnorm_end", num(end.gradnorm)},
                     {"limit", point_json(lim.point)},
                     {"accepted_steps", tr.accepted_steps},
                     {"rejected_steps", tr.rejected_steps},
                     {"samples", tr.samples.size()},
                     {"tail", to_json(lim.certificate)}});
  }
  json notes = json::array();
  if (constant_f(setup.kind())) {
    notes.push_back("f is constant for this group: every point is critical and every flow has zero length");
  } else if (all_stationary) {
    notes.push_back("every seed is a critical point");
  }
  report["notes"] = notes;
  report["seeds"] = seeds;
  report["pass"] = run.pass;
  run.report = std::move(report);
  return run;
}

int cmd_flow(const RunConfig& cfg, const CommandOptions& opts) {
  const FlowRun run = run_flow(cfg, opts);
  for (std::size_t k = 0; k < run.trajectories.size(); ++k) {
    write_text(opts.out / seed_file("traj", k), trajectory_csv(run.trajectories[k]));
  }
  write_json(opts.out / "flow_summary.json", run.report);
  return run.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// alpha

AlphaRun run_alpha(const RunConfig& cfg, const CommandOptions& opts) {
  const GroupSetup& setup = require_setup(cfg, "alpha");
  const auto seeds = require_seeds(cfg, "alpha");
  const AlphaConfig acfg = cfg.alpha.value_or(AlphaConfig{});
  const FlowOptions fopts = certificate_flow(cfg);
  const GradientFn gfn = gradient_fn(opts);

  std::vector<double> critical_values;
  const bool have_oracle = setup.kind() == GroupKind::Torus && setup.n() <= 12;
  if (have_oracle) critical_values = torus_critical_values(setup);

  struct SeedResult {
    json entry;
    std::optional<LojaFit> fit;
    bool pass = false;
  };
  const auto results = parallel_map(seeds.size(), opts.jobs, [&](std::size_t k) {
    SeedResult r;
    const Trajectory tr = integrate(seeds[k], setup, fopts, gfn);
    json& e = r.entry;
    e["index"] = k;
    e["seed"] = point_json(seeds[k]);
    e["termination"] = to_string(tr.termination);
    e["t_end"] = num(tr.t_end());
    e["f_end"] = num(tr.final_sample().f);
    LojaFit fit;
    try {
      fit = fit_exponent(tr, acfg.loja);
    } catch (const FitError& err) {
      e["status"] = "inconclusive";
      e["reason"] = err.what();
      return r;
    }
    r.fit = fit;
    const OmegaLimit lim = omega_limit(tr, final_tenth_window(tr), cfg.tail_diam_tol);
    const auto gi = verify_gradient_inequality(tr, fit);
    const auto lb = verify_length_bound_window(tr, fit);
    const auto db = verify_distance_bound(tr, fit, lim);
    json checks;
    checks["gradient_ineq"] = to_json(gi);
    checks["length_bound"] = to_json(lb, "min_slack");
    checks["distance_bound"] = to_json(db, "max_violation");
    bool pass = gi.status == CertStatus::Pass && gi.violations == 0 && lb.status == CertStatus::Pass &&
                db.status == CertStatus::Pass;

    std::optional<double> radius = acfg.region_radius;
    if (!radius && have_oracle) radius = default_region_radius(fit.b, critical_values);
    if (radius && acfg.region_samples > 0) {
      const auto region = sample_level_region(setup, fit.b, *radius, acfg.region_samples, acfg.region_seed + k);
      const auto gr = verify_gradient_inequality(setup, fit, region);
      json g = to_json(gr);
      g["radius"] = num(*radius);
      checks["gradient_ineq_region"] = g;
      pass = pass && gr.status == CertStatus::Pass;
    } else {
      checks["gradient_ineq_region"] = {{"status", "skipped"},
                                        {"reason", "no critical-value oracle; set lojasiewicz.region_radius"}};
    }
    e["fit"] = to_json(fit);
    e["checks"] = checks;
    e["limit_tail"] = to_json(lim.certificate);
    e["limit"] = point_json(lim.point);
    bool expected = true;
    if (acfg.expect_alpha) {
      expected = std::abs(fit.alpha - *acfg.expect_alpha) <= acfg.expect_tol;
      e["expected_alpha"] = {{"value", *acfg.expect_alpha}, {"tol", acfg.expect_tol}, {"pass", expected}};
    }
    r.pass = pass && expected;
    e["status"] = r.pass ? "pass" : "fail";
    return r;
  });

  AlphaRun run;
  json report = report_header("alpha", cfg);
  report["flow"] = {{"rel_tol", fopts.rel_tol}, {"abs_tol", fopts.abs_tol}, {"grad_stop", fopts.grad_stop},
                    {"t_max", fopts.t_max}};
  json entries = json::array();
  run.pass = true;
  double max_alpha = 0.0;
  for (const auto& r : results) {
    entries.push_back(r.entry);
    run.fits.push_back(r.fit);
    if (!r.pass) run.pass = false;
    if (r.fit) max_alpha = std::max(max_alpha, r.fit->alpha);
  }
  report["seeds"] = entries;
  report["max_alpha"] = num(max_alpha);
  report["pass"] = run.pass;
  run.report = std::move(report);
  return run;
}

int cmd_alpha(const RunConfig& cfg, const CommandOptions& opts) {
  const AlphaRun run = run_alpha(cfg, opts);
  write_json(opts.out / "alpha.json", run.report);
  return run.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// stratify

StratifyRun run_stratify(const RunConfig& cfg, const CommandOptions& opts) {
  const GroupSetup& setup = require_setup(cfg, "stratify");
  const auto seeds = require_seeds(cfg, "stratify");
  const GradientFn gfn = gradient_fn(opts);
  const auto flows =
      parallel_map(seeds.size(), opts.jobs, [&](std::size_t k) { return integrate(seeds[k], setup, cfg.flow, gfn); });

  StratifyRun run;
  run.pass = true;
  std::vector<LimitRecord> limits;
  std::vector<std::size_t> limit_seed;
  for (std::size_t k = 0; k < flows.size(); ++k) {
    if (flows[k].termination != Termination::GradStop) {
      run.pass = false;
      continue;
    }
    limits.push_back({flows[k].final_sample().point, flows[k].final_sample().f});
    limit_seed.push_back(k);
  }
  StrataOptions sopts = cfg.strata;
  sopts.flow = cfg.flow;
  const Clustering cl = cluster_components(setup, limits, sopts);
  run.components = cl.components.size();

  std::vector<int> component_of(seeds.size(), -1);
  for (std::size_t i = 0; i < limits.size(); ++i) component_of[limit_seed[i]] = cl.label[i];

  const bool torus = setup.kind() == GroupKind::Torus;
  std::optional<OracleComparison> oracle;
  if (torus) {
    oracle = compare_flow_vs_oracle(setup, seeds, flows);
    run.oracle_pass = oracle->pass();
    if (!run.oracle_pass) run.pass = false;
  }

  json report = report_header("stratify", cfg);
  report["strata"] = {{"theta_merge", sopts.theta_merge},
                      {"value_tol", sopts.value_tol},
                      {"link_critical_paths", sopts.link_critical_paths}};
  json comps = json::array();
  for (const auto& c : cl.components) {
    json j = {{"id", c.id},
              {"b", num(c.b)},
              {"size", c.members.size()},
              {"diameter", num(c.diameter)},
              {"representative", point_json(c.members.front())}};
    if (oracle) {
      std::vector<double> values;
      double err = 0.0;
      for (std::size_t src : c.sources) {
        const auto& chk = oracle->checks[limit_seed[src]];
        err = std::max(err, std::abs(c.b - chk.oracle_value));
        if (std::none_of(values.begin(), values.end(), [&](double v) { return std::abs(v - chk.oracle_value) < 1e-12; })) {
          values.push_back(chk.oracle_value);
        }
      }
      std::sort(values.begin(), values.end());
      json vj = json::array();
      for (double v : values) vj.push_back(num(v));
      j["oracle_values"] = vj;
      j["oracle_error"] = num(err);
    }
    comps.push_back(j);
  }

  json assignments = json::array();
  std::string csv = "seed_index,component_id,b,limit_f,termination,tail_status,oracle_value,semistable\n";
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const Trajectory& tr = flows[k];
    const OmegaLimit lim = omega_limit(tr, final_tenth_window(tr), cfg.tail_diam_tol);
    if (lim.certificate.status != CertStatus::Pass) run.pass = false;
    const int id = component_of[k];
    json a = {{"seed_index", k},
              {"seed", point_json(seeds[k])},
              {"component_id", id >= 0 ? json(id) : json(nullptr)},
              {"termination", to_string(tr.termination)},
              {"limit", point_json(lim.point)},
              {"limit_f", num(tr.final_sample().f)},
              {"tail", to_json(lim.certificate)},
              {"lojasiewicz", loja_summary(tr)}};
    std::string oracle_col, semi_col;
    if (oracle) {
      const auto& chk = oracle->checks[k];
      a["oracle"] = {{"support", chk.support},
                     {"value", num(chk.oracle_value)},
                     {"semistable", chk.semistable},
                     {"value_ok", chk.value_ok},
                     {"semistability_ok", chk.semistability_ok},
                     {"weak_support", chk.weak_support}};
      oracle_col = format_double(chk.oracle_value);
      semi_col = chk.semistable ? "true" : "false";
    }
    assignments.push_back(a);
    csv += std::to_string(k) + "," + (id >= 0 ? std::to_string(id) : std::string()) + "," +
           (id >= 0 ? format_double(cl.components[static_cast<std::size_t>(id)].b) : std::string()) + "," +
           format_double(tr.final_sample().f) + "," + to_string(tr.termination) + "," +
           to_string(lim.certificate.status) + "," + oracle_col + "," + semi_col + "\n";
  }
  json flags = json::array();
  for (const auto& f : cl.flags) {
    flags.push_back({{"seed_a", limit_seed[f.i]},
                     {"seed_b", limit_seed[f.j]},
                     {"distance", num(f.distance)},
                     {"value_gap", num(f.value_gap)}});
  }
  report["components"] = comps;
  report["assignments"] = assignments;
  report["flags"] = flags;
  if (oracle) {
    report["oracle"] = {{"pass", oracle->pass()},
                        {"failures", oracle->failures},
                        {"max_value_error", num(oracle->max_value_error)},
                        {"value_tol", kOracleValueTol},
                        {"zero_level_tol", kZeroLevelTol}};
  }
  report["pass"] = run.pass;
  run.report = std::move(report);
  run.csv = std::move(csv);
  return run;
}

int cmd_stratify(const RunConfig& cfg, const CommandOptions& opts) {
  const StratifyRun run = run_stratify(cfg, opts);
  write_json(opts.out / "strata.json", run.report);
  write_text(opts.out / "strata.csv", run.csv);
  return run.pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// counterexample

CounterexampleRun run_counterexample(const RunConfig& cfg, const CommandOptions& opts) {
  if (!cfg.counterexample) throw ConfigError("counterexample: config has no 'counterexample' section");
  const CounterexampleConfig& cc = *cfg.counterexample;
  CounterexampleRun run;
  auto candidates = parallel_map(witness_cell_count(cc.search), opts.jobs, [&](std::size_t k) {
    return witness_candidate(cc.search, static_cast<int>(k));
  });
  run.witness = assemble_witness_report(std::move(candidates), cc.search.band);
  run.inside = parallel_map(cc.inside_seeds.size(), opts.jobs,
                            [&](std::size_t k) { return flow2d(cc.inside_seeds[k], cc.inside_flow); });

  json report = report_header("counterexample", cfg);
  report["search"] = {{"band", cc.search.band},
                      {"exit_radius", cc.search.exit_radius},
                      {"theta_cells", cc.search.theta_cells},
                      {"offset_cells", cc.search.offset_cells},
                      {"method", "ascent from near the circle, reversed in time"}};
  json cands = json::array();
  for (const auto& c : run.witness.candidates) {
    cands.push_back({{"cell", c.cell},
                     {"seed", {{"r", num(c.seed.r)}, {"theta", num(c.seed.theta)}}},
                     {"end", {{"r", num(c.start.r)}, {"theta", num(c.start.theta)}}},
                     {"winding", num(c.winding.total)},
                     {"monotone", c.winding.monotone},
                     {"f_monotone", c.f_monotone},
                     {"is_witness", c.is_witness}});
  }
  report["candidates"] = cands;

  json w;
  w["found"] = run.witness.found;
  w["band"] = cc.search.band;
  bool witness_ok = false;
  if (run.witness.found) {
    const auto& c = run.witness.candidates[run.witness.index];
    w["cell"] = c.cell;
    w["file"] = "witness.csv";
    w["seed"] = {{"r", num(c.seed.r)}, {"theta", num(c.seed.theta)}};
    w["end"] = {{"r", num(c.start.r)}, {"theta", num(c.start.theta)}};
    w["winding"] = to_json(c.winding);
    w["f_monotone"] = c.f_monotone;
    w["samples"] = c.trajectory.samples.size();
    w["accepted_steps"] = c.trajectory.accepted_steps;
    w["t_end"] = num(c.trajectory.samples.back().t);
    w["single_point_certificate"] = to_json(run.witness.tail);
    witness_ok = run.witness.tail.status == CertStatus::Fail;
    w["verdict"] = witness_ok ? "non-convergent: winds at least 4 pi inside the band with r - 1 decreasing"
                              : "witness winds but its tail certificate did not fail";
  } else {
    w["verdict"] = "inconclusive: no grid cell produced a witness";
  }
  report["witness"] = w;

  json inside = json::array();
  bool inside_ok = true;
  for (std::size_t k = 0; k < run.inside.size(); ++k) {
    const auto& tr = run.inside[k];
    const auto cert = plane_tail_certificate(tr, cc.inside_window, cc.diam_tol);
    if (cert.status != CertStatus::Pass) inside_ok = false;
    inside.push_back({{"index", k},
                      {"file", seed_file("inside", k)},
                      {"seed", {{"r", num(cc.inside_seeds[k].r)}, {"theta", num(cc.inside_seeds[k].theta)}}},
                      {"stop", to_string(tr.stop)},
                      {"t_end", num(tr.samples.back().t)},
                      {"end", {{"r", num(tr.samples.back().r)}, {"theta", num(tr.samples.back().theta)}}},
                      {"winding", to_json(winding(tr, cc.search.band))},
                      {"tail", to_json(cert)}});
  }
  report["inside"] = inside;
  run.pass = witness_ok && inside_ok;
  report["pass"] = run.pass;
  run.report = std::move(report);
  return run;
}

int cmd_counterexample(const RunConfig& cfg, const CommandOptions& opts) {
  const CounterexampleRun run = run_counterexample(cfg, opts);
  if (run.witness.found) {
    write_text(opts.out / "witness.csv", plane_csv(run.witness.candidates[run.witness.index].trajectory));
  }
  for (std::size_t k = 0; k < run.inside.size(); ++k) {
    write_text(opts.out / seed_file("inside", k), plane_csv(run.inside[k]));
  }
  write_json(opts.out / "counterexample.json", run.report);
  return run.pass ? 0 : 1;
}

}  // namespace momentflow::app
