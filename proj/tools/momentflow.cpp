#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "momentflow/app/commands.hpp"
#include "momentflow/app/output.hpp"

namespace {

using namespace momentflow::app;

struct Args {
  std::string config;
  std::string out;
  int jobs = 1;
  double corrupt = 0.0;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config, "JSON run configuration")->required();
  sub->add_option("--out", args.out, "output directory (default: config 'out', else ./out)");
  sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
  // test hook: scales the gradient so the verification suite must fail
  sub->add_option("--corrupt-gradient", args.corrupt)->group("");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"momentflow: flows of |mu|^2 on CP^{n-1} with convergence certificates"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Args args;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&, const CommandOptions&);
  };
  const Entry entries[] = {
      {"flow", "integrate seeds and certify single-point limits", cmd_flow},
      {"alpha", "fit Lojasiewicz exponents and check the inequality chain", cmd_alpha},
      {"stratify", "cluster limits into critical components; torus oracle comparison", cmd_stratify},
      {"counterexample", "planar smooth non-analytic example: witness search and inside run", cmd_counterexample},
      {"verify", "run the invariant suite over the listed configs", cmd_verify},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, args);
    subs.emplace_back(sub, &e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& [sub, entry] : subs) {
    if (!sub->parsed()) continue;
    try {
      const RunConfig cfg = load_config(args.config);
      CommandOptions opts;
      opts.out = !args.out.empty() ? args.out : cfg.out.value_or("out");
      opts.jobs = args.jobs;
      opts.corrupt_gradient = args.corrupt;
      const int code = entry->run(cfg, opts);
      std::printf("%s: %s (outputs in %s)\n", entry->name, code == 0 ? "pass" : "certificate failure",
                  opts.out.string().c_str());
      return code;
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
