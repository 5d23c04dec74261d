#pragma once

// Serialization of results: CSV tables and versioned JSON reports. Nothing
// time- or host-dependent is written, so identical inputs give identical bytes.

#include <atomic>
#include <exception>
#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "momentflow/app/config.hpp"

namespace momentflow::app {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "momentflow 0.1.0";

/// %.17g; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);
/// Number, or null when not finite.
nlohmann::json num(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Header `t, v_re_0, v_im_0, ..., f, gradnorm` (canonical representatives).
std::string trajectory_csv(const Trajectory& traj);
/// Header `t, r, theta_unwrapped, f, gradnorm`.
std::string plane_csv(const PlaneTrajectory& traj);

nlohmann::json report_header(const std::string& command, const RunConfig& cfg);

nlohmann::json point_json(const ProjectivePoint& p);
nlohmann::json to_json(const TailCertificate& c);
nlohmann::json to_json(const LojaFit& f);
nlohmann::json to_json(const GradientInequalityCertificate& c);
nlohmann::json to_json(const WindowCertificate& c, const char* worst_name);
nlohmann::json to_json(const ProbeResult& r);
nlohmann::json to_json(const WindingReport& w);
nlohmann::json to_json(const PlaneTailCertificate& c);

/// Results of fn(0), ..., fn(n-1) computed on `jobs` threads, in index order.
/// The first exception by index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, int jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace momentflow::app
