#include "momentflow/app/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace momentflow::app {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string trajectory_csv(const Trajectory& traj) {
  std::string s = "t";
  const int n = traj.samples.empty() ? 0 : traj.samples.front().point.dim();
  for (int i = 0; i < n; ++i) s += ",v_re_" + std::to_string(i) + ",v_im_" + std::to_string(i);
  s += ",f,gradnorm\n";
  for (const auto& x : traj.samples) {
    s += format_double(x.t);
    for (double v : x.point.interleaved()) s += "," + format_double(v);
    s += "," + format_double(x.f) + "," + format_double(x.gradnorm) + "\n";
  }
  return s;
}

std::string plane_csv(const PlaneTrajectory& traj) {
  std::string s = "t,r,theta_unwrapped,f,gradnorm\n";
  for (const auto& x : traj.samples) {
    s += format_double(x.t) + "," + format_double(x.r) + "," + format_double(x.theta) + "," + format_double(x.f) +
         "," + format_double(x.gradnorm) + "\n";
  }
  return s;
}

json report_header(const std::string& command, const RunConfig& cfg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = cfg.name;
  if (cfg.setup) {
    j["setup"] = setup_to_json(*cfg.setup);
    j["setup_id"] = cfg.setup->id();
  }
  return j;
}

json point_json(const ProjectivePoint& p) {
  json a = json::array();
  for (double v : p.interleaved()) a.push_back(num(v));
  return a;
}

json to_json(const TailCertificate& c) {
  return {{"status", to_string(c.status)}, {"diameter", num(c.diameter)}, {"t_lo", num(c.t_lo)},
          {"t_hi", num(c.t_hi)},           {"samples", c.samples},       {"diam_tol", num(c.diam_tol)}};
}

json to_json(const LojaFit& f) {
  return {{"alpha", num(f.alpha)},
          {"c", num(f.c)},
          {"c_prime", num(f.c_prime)},
          {"b", num(f.b)},
          {"window", {num(f.t_lo), num(f.t_hi)}},
          {"residual", num(f.residual)},
          {"samples", f.samples},
          {"flagged", f.flagged}};
}

json to_json(const GradientInequalityCertificate& c) {
  return {{"status", to_string(c.status)},
          {"pass", c.status == CertStatus::Pass},
          {"samples", c.samples},
          {"violations", c.violations},
          {"violation_fraction", num(c.violation_fraction)},
          {"c_fit", num(c.c_fit)},
          {"c_empirical", num(c.c_empirical)},
          {"c_reported", num(c.c_reported)},
          {"lowered", c.lowered}};
}

json to_json(const WindowCertificate& c, const char* worst_name) {
  return {{"status", to_string(c.status)},
          {"pass", c.status == CertStatus::Pass},
          {"checks", c.checks},
          {"violations", c.violations},
          {worst_name, num(c.worst)}};
}

json to_json(const ProbeResult& r) {
  return {{"found", r.found},
          {"eps", num(r.eps)},
          {"delta", num(r.delta)},
          {"t_star", num(r.t_star)},
          {"tail_bound", num(r.tail_bound)},
          {"mc_probes", r.mc_probes},
          {"mc_failures", r.mc_failures},
          {"mc_max_distance", num(r.mc_max_distance)},
          {"diagnostics", r.diagnostics}};
}

json to_json(const WindingReport& w) {
  return {{"status", to_string(w.status)},
          {"band", num(w.band)},
          {"winding", num(w.total)},
          {"r_minus_1_min", num(w.r_min)},
          {"r_minus_1_max", num(w.r_max)},
          {"monotone", w.monotone},
          {"band_samples", w.band_samples}};
}

json to_json(const PlaneTailCertificate& c) {
  return {{"status", to_string(c.status)}, {"diameter", num(c.diameter)}, {"t_lo", num(c.t_lo)},
          {"t_hi", num(c.t_hi)},           {"diam_tol", num(c.diam_tol)}};
}

}  // namespace momentflow::app
