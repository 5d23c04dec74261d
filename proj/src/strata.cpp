#include "momentflow/strata.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace momentflow {

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double members_diameter(const std::vector<ProjectivePoint>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, distance(pts[i], pts[j]));
  }
  return d;
}

bool link_rec(const GroupSetup& setup, const ProjectivePoint& a, const ProjectivePoint& b, double level,
              int depth, long& budget, const StrataOptions& opts) {
  if (distance(a, b) <= opts.theta_merge) return true;
  if (depth == 0 || budget <= 0) return false;
  --budget;
  const Trajectory tr = integrate(midpoint(a, b), setup, opts.flow);
  if (tr.termination != Termination::GradStop) return false;
  const FlowSample& end = tr.final_sample();
  if (std::abs(end.f - level) > opts.value_tol) return false;
  return link_rec(setup, a, end.point, level, depth - 1, budget, opts) &&
         link_rec(setup, end.point, b, level, depth - 1, budget, opts);
}

}  // namespace

bool link_critical(const GroupSetup& setup, const ProjectivePoint& a, const ProjectivePoint& b, double level,
                   const StrataOptions& opts) {
  long budget = opts.link_budget;
  return link_rec(setup, a, b, level, opts.link_depth, budget, opts);
}

Clustering cluster_components(const GroupSetup& setup, const std::vector<LimitRecord>& limits,
                              const StrataOptions& opts) {
  const std::size_t n = limits.size();
  Clustering out;
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(limits[i].point, limits[j].point);
      if (d > opts.theta_merge) continue;
      const double gap = std::abs(limits[i].f - limits[j].f);
      if (gap <= opts.value_tol) {
        uf.unite(i, j);
      } else {
        out.flags.push_back({i, j, d, gap});
      }
    }
  }

  // single-linkage groups, in order of first member
  std::vector<std::vector<std::size_t>> groups;
  std::vector<long> group_of_root(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (group_of_root[r] < 0) {
      group_of_root[r] = static_cast<long>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(group_of_root[r])].push_back(i);
  }

  // greedy merge of groups at the same level joined through critical points
  std::vector<std::vector<std::size_t>> merged;
  for (auto& g : groups) {
    const LimitRecord& rep = limits[g.front()];
    bool joined = false;
    if (opts.link_critical_paths) {
      for (auto& m : merged) {
        const LimitRecord& other = limits[m.front()];
        if (std::abs(other.f - rep.f) > opts.value_tol) continue;
        // link through the closest pair of members
        std::size_t ia = m.front(), ib = g.front();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a : m) {
          for (std::size_t b : g) {
            const double d = distance(limits[a].point, limits[b].point);
            if (d < best) {
              best = d;
              ia = a;
              ib = b;
            }
          }
        }
        if (link_critical(setup, limits[ia].point, limits[ib].point, other.f, opts)) {
          m.insert(m.end(), g.begin(), g.end());
          joined = true;
          break;
        }
      }
    }
    if (!joined) merged.push_back(std::move(g));
  }

  for (auto& m : merged) {
    std::sort(m.begin(), m.end());
    CriticalComponent c;
    double sum = 0.0;
    for (std::size_t i : m) {
      c.members.push_back(limits[i].point);
      sum += limits[i].f;
    }
    c.b = sum / static_cast<double>(m.size());
    c.sources = m;
    c.diameter = members_diameter(c.members);
    out.components.push_back(std::move(c));
  }
  std::stable_sort(out.components.begin(), out.components.end(),
                   [](const CriticalComponent& a, const CriticalComponent& b) { return a.b < b.b; });
  out.label.assign(n, -1);
  for (std::size_t k = 0; k < out.components.size(); ++k) {
    out.components[k].id = static_cast<int>(k);
    for (std::size_t i : out.components[k].sources) out.label[i] = static_cast<int>(k);
  }
  return out;
}

int assign_stratum(const GroupSetup& setup, const Trajectory& traj, std::vector<CriticalComponent>& components,
                   const StrataOptions& opts) {
  if (traj.termination != Termination::GradStop) {
    throw DomainError("assign_stratum: trajectory did not converge (termination " + to_string(traj.termination) +
                      ")");
  }
  const FlowSample& end = traj.final_sample();
  for (const auto& c : components) {
    if (std::abs(c.b - end.f) > opts.value_tol) continue;
    for (const auto& m : c.members) {
      if (distance(m, end.point) <= opts.theta_merge) return c.id;
    }
  }
  if (opts.link_critical_paths) {
    for (const auto& c : components) {
      if (std::abs(c.b - end.f) > opts.value_tol || c.members.empty()) continue;
      if (link_critical(setup, c.members.front(), end.point, c.b, opts)) return c.id;
    }
  }
  CriticalComponent c;
  c.id = components.empty() ? 0 : components.back().id + 1;
  for (const auto& other : components) c.id = std::max(c.id, other.id + 1);
  c.b = end.f;
  c.members.push_back(end.point);
  c.provisional = true;
  components.push_back(std::move(c));
  return components.back().id;
}

Eigen::MatrixXd orthonormal_weights(const GroupSetup& setup) {
  if (setup.kind() != GroupKind::Torus) throw DomainError("orthonormal_weights: setup is not a torus");
  const auto& w = setup.params().weights;
  const auto d = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXd wm(d, setup.n());
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index i = 0; i < setup.n(); ++i) wm(k, i) = w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(weight_gram(w));
  return eig.operatorInverseSqrt() * wm;
}

OracleResult torus_min_norm_oracle(const GroupSetup& setup, const std::vector<int>& support) {
  if (support.empty()) throw DomainError("torus_min_norm_oracle: empty support");
  if (support.size() > kOracleMaxSupport) {
    throw DomainError("torus_min_norm_oracle: support of size " + std::to_string(support.size()) +
                      " exceeds the cap of " + std::to_string(kOracleMaxSupport));
  }
  for (int i : support) {
    if (i < 0 || i >= setup.n()) throw DomainError("torus_min_norm_oracle: support index out of range");
  }
  const Eigen::MatrixXd w = orthonormal_weights(setup);
  const auto d = w.rows();
  const std::size_t s = support.size();

  OracleResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << s); ++mask) {
    const int m = std::popcount(mask);
    if (m > d + 1) continue;
    std::vector<int> face;
    for (std::size_t k = 0; k < s; ++k) {
      if (mask & (std::uint32_t{1} << k)) face.push_back(support[k]);
    }
    Eigen::MatrixXd p(d, m);
    for (int k = 0; k < m; ++k) p.col(k) = w.col(face[static_cast<std::size_t>(k)]);
    if (m > 1) {
      Eigen::MatrixXd diff = p.rightCols(m - 1).colwise() - p.col(0);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
      const auto sv = svd.singularValues();
      if (sv.size() < m - 1 || sv(m - 2) <= kDependenceTol * std::max(1.0, sv(0))) continue;
    }
    // min |P l|^2 subject to sum(l) = 1
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    kkt.topLeftCorner(m, m) = p.transpose() * p;
    kkt.block(0, m, m, 1).setOnes();
    kkt.block(m, 0, 1, m).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
    rhs(m) = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd lambda = sol.head(m);
    if (lambda.minCoeff() < -1e-12) continue;
    const RVector beta = p * lambda;
    const double value = beta.squaredNorm();
    if (value < best.value) {
      best.value = value;
      best.beta = beta;
      best.face = face;
    }
  }
  return best;
}

std::vector<double> torus_critical_values(const GroupSetup& setup) {
  const int n = setup.n();
  if (n > 12) throw DomainError("torus_critical_values: n > 12");
  std::vector<double> values;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) s.push_back(i);
    }
    values.push_back(torus_min_norm_oracle(setup, s).value);
  }
  std::sort(values.begin(), values.end());
  std::vector<double> distinct;
  for (double v : values) {
    if (distinct.empty() || v - distinct.back() > 1e-12) distinct.push_back(v);
  }
  return distinct;
}

std::vector<int> support_of(const ProjectivePoint& p, double threshold) {
  std::vector<int> s;
  for (int i = 0; i < p.dim(); ++i) {
    if (std::abs(p.rep()(i)) > threshold) s.push_back(i);
  }
  return s;
}

bool semistable(const GroupSetup& setup, const ProjectivePoint& p) {
  return torus_min_norm_oracle(setup, support_of(p)).value <= kSemistableTol;
}

OracleComparison compare_flow_vs_oracle(const GroupSetup& setup, const std::vector<ProjectivePoint>& seeds,
                                        const std::vector<Trajectory>& flows) {
  if (seeds.size() != flows.size()) throw DomainError("compare_flow_vs_oracle: seeds and flows differ in length");
  OracleComparison out;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    OracleCheck c;
    c.seed_index = k;
    c.support = support_of(seeds[k]);
    const OracleResult o = torus_min_norm_oracle(setup, c.support);
    c.oracle_value = o.value;
    c.semistable = o.value <= kSemistableTol;
    c.limit_f = flows[k].final_sample().f;
    c.termination = to_string(flows[k].termination);
    for (int i : c.support) {
      if (std::abs(seeds[k].rep()(i)) <= 1e-6) c.weak_support = true;
    }
    const bool converged = flows[k].termination == Termination::GradStop;
    c.value_ok = converged && std::abs(c.limit_f - c.oracle_value) <= kOracleValueTol;
    c.semistability_ok = converged && (c.semistable == (c.limit_f <= kZeroLevelTol));
    if (!c.weak_support) {
      out.max_value_error = std::max(out.max_value_error, std::abs(c.limit_f - c.oracle_value));
      if (!c.value_ok || !c.semistability_ok) ++out.failures;
    }
    out.checks.push_back(std::move(c));
  }
  return out;
}

}  // namespace momentflow
