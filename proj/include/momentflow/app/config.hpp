#pragma once

// Run configuration shared by the CLI subcommands.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "momentflow/counterexample.hpp"
#include "momentflow/lojasiewicz.hpp"
#include "momentflow/strata.hpp"

namespace momentflow::app {

/// Malformed or incomplete configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeedConfig {
  std::vector<std::vector<double>> explicit_seeds;  // 2n interleaved (re, im)
  int count = 0;
  std::uint64_t rng_seed = 1;
  bool coordinate_points = false;  // append [e_1], ..., [e_n]
};

struct AlphaConfig {
  LojaOptions loja;
  // certificate runs integrate more tightly than plain flows: near the limit
  // the length bound is close to equality
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  std::size_t region_samples = 10000;
  std::optional<double> region_radius;  // default: half the gap to the next oracle value
  std::uint64_t region_seed = 11;
  std::optional<double> expect_alpha;  // verify: |alpha - expect| <= expect_tol
  double expect_tol = 0.05;
};

struct ContinuityConfig {
  std::vector<double> point;  // 2n interleaved (re, im)
  std::vector<double> eps{0.1, 0.01};
  int mc_probes = 100;
  std::uint64_t seed = 7;
};

struct CounterexampleConfig {
  WitnessSearchOptions search;
  Flow2dOptions inside_flow;
  std::vector<PlanePoint> inside_seeds{{0.5, 0.0}};
  double inside_window = 10.0;  // duration of the tail window of inside runs
  double diam_tol = 1e-6;
};

struct VerifyConfig {
  std::vector<std::filesystem::path> configs;  // resolved against the verify config's directory
  int samples = 100;
  std::uint64_t rng_seed = 2024;
};

struct RunConfig {
  std::filesystem::path source;
  std::string name;  // file stem
  std::optional<GroupSetup> setup;
  SeedConfig seed_config;
  FlowOptions flow;
  double tail_diam_tol = 1e-6;
  std::optional<AlphaConfig> alpha;
  StrataOptions strata;
  std::optional<int> expect_components;  // verify: number of critical components
  std::optional<ContinuityConfig> continuity;
  std::optional<CounterexampleConfig> counterexample;
  std::optional<VerifyConfig> verify;
  std::optional<std::string> out;

  /// Explicit seeds, then coordinate points, then `count` random points.
  std::vector<ProjectivePoint> seeds() const;
};

/// Throws ConfigError on unreadable files, malformed JSON, an empty object or
/// schema violations.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& source = {});

/// Flow options for Lojasiewicz certificates: the configured flow with the
/// alpha section's tolerances.
FlowOptions certificate_flow(const RunConfig& cfg);

}  // namespace momentflow::app
