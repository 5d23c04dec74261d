#pragma once

// Subcommands. Each run_* computes a report without touching the filesystem;
// the cmd_* wrappers write the files and return the exit code (0 when every
// requested certificate passes, 1 otherwise). Configuration problems are
// raised as ConfigError.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentflow/app/config.hpp"

namespace momentflow::app {

struct CommandOptions {
  std::filesystem::path out = "out";
  int jobs = 1;
  double corrupt_gradient = 0.0;  // test hook: grad_f scaled by (1 + this)
};

GradientFn gradient_fn(const CommandOptions& opts);

struct FlowRun {
  std::vector<ProjectivePoint> seeds;
  std::vector<Trajectory> trajectories;
  std::vector<OmegaLimit> limits;
  nlohmann::json report;
  bool pass = false;
};
FlowRun run_flow(const RunConfig& cfg, const CommandOptions& opts);
int cmd_flow(const RunConfig& cfg, const CommandOptions& opts);

struct AlphaRun {
  nlohmann::json report;
  std::vector<std::optional<LojaFit>> fits;
  bool pass = false;
};
AlphaRun run_alpha(const RunConfig& cfg, const CommandOptions& opts);
int cmd_alpha(const RunConfig& cfg, const CommandOptions& opts);

struct StratifyRun {
  nlohmann::json report;
  std::string csv;
  std::size_t components = 0;
  bool oracle_pass = true;
  bool pass = false;
};
StratifyRun run_stratify(const RunConfig& cfg, const CommandOptions& opts);
int cmd_stratify(const RunConfig& cfg, const CommandOptions& opts);

struct CounterexampleRun {
  WitnessReport witness;
  std::vector<PlaneTrajectory> inside;
  nlohmann::json report;
  bool pass = false;
};
CounterexampleRun run_counterexample(const RunConfig& cfg, const CommandOptions& opts);
int cmd_counterexample(const RunConfig& cfg, const CommandOptions& opts);

struct VerifyRun {
  nlohmann::json report;
  std::vector<std::string> failed;  // "config/invariant"
  bool pass = false;
};
VerifyRun run_verify(const RunConfig& cfg, const CommandOptions& opts);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opts);

}  // namespace momentflow::app
