#include "segdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

namespace segdiff {

namespace {

void validate_seed_ids(const AffinityGraph& g, const SeedAssignment& seeds) {
  if (seeds.clamp_one.empty()) {
    raise(errc::no_positive_seeds, "diffusion needs at least one positive seed");
  }
  std::vector<char> mark(static_cast<std::size_t>(g.n), 0);
  for (auto i : seeds.clamp_one) {
    if (i < 0 || i >= g.n) raise(errc::value_out_of_range, "seed id out of range");
    if (mark[i]) raise(errc::value_out_of_range, "duplicate seed id " + std::to_string(i));
    mark[i] = 1;
  }
  for (auto i : seeds.clamp_zero) {
    if (i < 0 || i >= g.n) raise(errc::value_out_of_range, "seed id out of range");
    if (mark[i]) {
      raise(errc::value_out_of_range, "node " + std::to_string(i) + " clamped to both 0 and 1");
    }
    mark[i] = 2;
  }
}

// -1 unclamped, otherwise the clamp value.
std::vector<double> clamp_values(const AffinityGraph& g, const SeedAssignment& seeds) {
  std::vector<double> c(static_cast<std::size_t>(g.n), -1.0);
  for (auto i : seeds.clamp_one) c[i] = 1.0;
  for (auto i : seeds.clamp_zero) c[i] = 0.0;
  return c;
}

// Unclamped nodes in a component with no clamp at all stay at the 0 start
// value; exclude them so the reduced system is positive definite.
std::vector<char> reachable_from_clamps(const AffinityGraph& g, const std::vector<double>& c) {
  std::vector<char> reach(static_cast<std::size_t>(g.n), 0);
  std::vector<std::int32_t> queue;
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (c[i] >= 0.0) {
      reach[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::int32_t v = queue.back();
    queue.pop_back();
    for (std::int32_t e = g.row_ptr[v]; e < g.row_ptr[v + 1]; ++e) {
      const std::int32_t u = g.col[e];
      if (!reach[u]) {
        reach[u] = 1;
        queue.push_back(u);
      }
    }
  }
  return reach;
}

struct ReducedSystem {
  std::vector<std::int32_t> unknown;           // node id of each unknown
  std::vector<std::int32_t> index_of;          // node -> unknown index or -1
  std::vector<double> diag;                    // degree of each unknown
  std::vector<double> rhs;                     // boundary inflow from clamps
};

ReducedSystem reduce(const AffinityGraph& g, const std::vector<double>& c) {
  ReducedSystem sys;
  sys.index_of.assign(static_cast<std::size_t>(g.n), -1);
  const std::vector<char> reach = reachable_from_clamps(g, c);
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (c[i] < 0.0 && reach[i]) {
      sys.index_of[i] = static_cast<std::int32_t>(sys.unknown.size());
      sys.unknown.push_back(i);
    }
  }
  sys.diag.assign(sys.unknown.size(), 0.0);
  sys.rhs.assign(sys.unknown.size(), 0.0);
  for (std::size_t u = 0; u < sys.unknown.size(); ++u) {
    const std::int32_t i = sys.unknown[u];
    for (std::int32_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      const std::int32_t j = g.col[e];
      sys.diag[u] += g.w[e];
      if (c[j] >= 0.0) sys.rhs[u] += g.w[e] * c[j];
    }
  }
  return sys;
}

// y = A x with A the reduced Laplacian: A_uu = diag, A_uv = -z_uv.
void apply_reduced(const AffinityGraph& g, const ReducedSystem& sys,
                   const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t u = 0; u < sys.unknown.size(); ++u) {
    const std::int32_t i = sys.unknown[u];
    double acc = sys.diag[u] * x[u];
    for (std::int32_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      const std::int32_t v = sys.index_of[g.col[e]];
      if (v >= 0) acc -= g.w[e] * x[v];
    }
    y[u] = acc;
  }
}

double scaled_residual_inf(const ReducedSystem& sys, const std::vector<double>& r) {
  double worst = 0.0;
  for (std::size_t u = 0; u < r.size(); ++u) {
    const double d = sys.diag[u] > 0.0 ? sys.diag[u] : 1.0;
    worst = std::max(worst, std::abs(r[u]) / d);
  }
  return worst;
}

DiffusionField assemble_field(const AffinityGraph& g, const SeedAssignment& seeds,
                              const std::vector<double>& c, const ReducedSystem& sys,
                              const std::vector<double>& x) {
  DiffusionField field;
  field.seeds = seeds;
  field.q.assign(static_cast<std::size_t>(g.n), 0.0);
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (c[i] >= 0.0) {
      field.q[i] = c[i];
    } else if (sys.index_of[i] >= 0) {
      field.q[i] = std::clamp(x[sys.index_of[i]], 0.0, 1.0);
    }
  }
  return field;
}

}  // namespace

double AffinityGraph::degree(std::int32_t i) const {
  double d = 0.0;
  for (std::int32_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) d += w[e];
  return d;
}

AffinityGraph make_affinity_graph(int n,
                                  std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                                  std::vector<double> weights, double sigma) {
  if (n < 0 || edges.size() != weights.size()) {
    raise(errc::length_mismatch, "edge and weight counts differ");
  }
  AffinityGraph g;
  g.n = n;
  g.sigma = sigma;

  std::vector<std::size_t> order(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto& [a, b] = edges[e];
    if (a < 0 || b < 0 || a >= n || b >= n) {
      raise(errc::value_out_of_range, "edge endpoint out of range");
    }
    if (a == b) raise(errc::value_out_of_range, "self loops are not allowed");
    if (!(weights[e] > 0.0) || !std::isfinite(weights[e])) {
      raise(errc::value_out_of_range, "edge weights must be finite and positive");
    }
    if (a > b) std::swap(a, b);
    order[e] = e;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  g.edges.reserve(edges.size());
  g.weights.reserve(edges.size());
  for (std::size_t e : order) {
    if (!g.edges.empty() && g.edges.back() == edges[e]) {
      raise(errc::value_out_of_range, "duplicate edge");
    }
    g.edges.push_back(edges[e]);
    g.weights.push_back(weights[e]);
  }

  g.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [a, b] : g.edges) {
    ++g.row_ptr[a + 1];
    ++g.row_ptr[b + 1];
  }
  for (int i = 0; i < n; ++i) g.row_ptr[i + 1] += g.row_ptr[i];
  g.col.resize(g.edges.size() * 2);
  g.w.resize(g.edges.size() * 2);
  std::vector<std::int32_t> cursor(g.row_ptr.begin(), g.row_ptr.end() - 1);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [a, b] = g.edges[e];
    g.col[cursor[a]] = b;
    g.w[cursor[a]++] = g.weights[e];
    g.col[cursor[b]] = a;
    g.w[cursor[b]++] = g.weights[e];
  }
  return g;
}

AffinityGraph build_affinity(const Adjacency& adj, const FeatureTable& feats, double sigma,
                             AffinityNorm norm) {
  if (!(sigma > 0.0)) {
    raise(errc::non_positive_sigma, "affinity bandwidth must be positive");
  }
  if (feats.size() != adj.n) {
    raise(errc::length_mismatch, "feature table size does not match adjacency");
  }
  std::vector<double> weights(adj.edges.size());
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t e = 0; e < adj.edges.size(); ++e) {
    const auto& fi = feats.features[adj.edges[e].first];
    const auto& fj = feats.features[adj.edges[e].second];
    double d2 = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double diff = fi[k] - fj[k];
      d2 += diff * diff;
    }
    const double dist = norm == AffinityNorm::linear ? std::sqrt(d2) : d2;
    weights[e] = std::exp(-dist / denom);
  }
  return make_affinity_graph(adj.n, adj.edges, std::move(weights), sigma);
}

DiffusionField solve_diffusion(const AffinityGraph& g, const SeedAssignment& seeds, double tol,
                               int max_iters) {
  validate_seed_ids(g, seeds);
  if (!(tol > 0.0)) raise(errc::value_out_of_range, "tol must be positive");
  if (max_iters <= 0) max_iters = 10 * std::max(1, g.n);

  const std::vector<double> c = clamp_values(g, seeds);
  const ReducedSystem sys = reduce(g, c);
  const std::size_t m = sys.unknown.size();

  std::vector<double> x(m, 0.0);
  DiffusionField field;
  if (m == 0) {
    field = assemble_field(g, seeds, c, sys, x);
    field.residual = 0.0;
    field.converged = true;
    return field;
  }

  // Jacobi-preconditioned CG. Convergence is judged on the degree-scaled
  // residual max_i |r_i|/d_i, which bounds the harmonic defect of every
  // unclamped node directly.
  std::vector<double> r = sys.rhs;  // r = b - A*0
  std::vector<double> z(m), p(m), ap(m);
  for (std::size_t u = 0; u < m; ++u) z[u] = r[u] / sys.diag[u];
  p = z;
  double rz = 0.0;
  for (std::size_t u = 0; u < m; ++u) rz += r[u] * z[u];

  int iter = 0;
  double res = scaled_residual_inf(sys, r);
  while (res > tol && iter < max_iters) {
    apply_reduced(g, sys, p, ap);
    double pap = 0.0;
    for (std::size_t u = 0; u < m; ++u) pap += p[u] * ap[u];
    if (!(pap > 0.0)) break;  // numerically spent
    const double alpha = rz / pap;
    for (std::size_t u = 0; u < m; ++u) x[u] += alpha * p[u];
    ++iter;
    if (iter % 50 == 0) {
      // refresh the true residual and restart the direction; the recursion
      // drifts over long runs
      apply_reduced(g, sys, x, ap);
      for (std::size_t u = 0; u < m; ++u) r[u] = sys.rhs[u] - ap[u];
      rz = 0.0;
      for (std::size_t u = 0; u < m; ++u) {
        z[u] = r[u] / sys.diag[u];
        rz += r[u] * z[u];
      }
      p = z;
    } else {
      for (std::size_t u = 0; u < m; ++u) r[u] -= alpha * ap[u];
      double rz_next = 0.0;
      for (std::size_t u = 0; u < m; ++u) {
        z[u] = r[u] / sys.diag[u];
        rz_next += r[u] * z[u];
      }
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t u = 0; u < m; ++u) p[u] = z[u] + beta * p[u];
    }
    res = scaled_residual_inf(sys, r);
  }

  // Record the explicitly recomputed residual, not the CG recursion's.
  apply_reduced(g, sys, x, ap);
  for (std::size_t u = 0; u < m; ++u) r[u] = sys.rhs[u] - ap[u];
  res = scaled_residual_inf(sys, r);

  field = assemble_field(g, seeds, c, sys, x);
  field.residual = res;
  field.converged = res <= tol;
  field.iterations = iter;
  return field;
}

DiffusionField solve_diffusion_jacobi(const AffinityGraph& g, const SeedAssignment& seeds,
                                      int iters) {
  validate_seed_ids(g, seeds);
  if (iters < 1) raise(errc::value_out_of_range, "jacobi iteration budget must be >= 1");
  const std::vector<double> c = clamp_values(g, seeds);

  std::vector<double> q(static_cast<std::size_t>(g.n), 0.0);
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (c[i] >= 0.0) q[i] = c[i];
  }
  std::vector<double> next(q.size());
  double delta = 0.0;
  for (int it = 0; it < iters; ++it) {
    delta = 0.0;
    for (std::int32_t i = 0; i < g.n; ++i) {
      if (c[i] >= 0.0) {
        next[i] = c[i];
        continue;
      }
      double num = 0.0, den = 0.0;
      for (std::int32_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
        num += g.w[e] * q[g.col[e]];
        den += g.w[e];
      }
      next[i] = den > 0.0 ? num / den : 0.0;
      delta = std::max(delta, std::abs(next[i] - q[i]));
    }
    q.swap(next);
  }

  DiffusionField field;
  field.seeds = seeds;
  field.q = std::move(q);
  for (double& v : field.q) v = std::clamp(v, 0.0, 1.0);
  field.residual = delta;
  field.converged = true;  // fixed budget by design
  field.iterations = iters;
  return field;
}

DiffusionField solve_diffusion_oracle(const AffinityGraph& g, const SeedAssignment& seeds) {
  if (g.n > 200) {
    raise(errc::too_large, "oracle solve limited to n <= 200");
  }
  validate_seed_ids(g, seeds);
  const std::vector<double> c = clamp_values(g, seeds);
  const ReducedSystem sys = reduce(g, c);
  const int m = static_cast<int>(sys.unknown.size());

  // Dense assembly straight from the edge list, independent of the CSR
  // product used by the CG path.
  std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> b(sys.rhs);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [i, j] = g.edges[e];
    const std::int32_t ui = sys.index_of[i];
    const std::int32_t uj = sys.index_of[j];
    if (ui >= 0 && uj >= 0) {
      a[std::size_t(ui) * m + uj] -= g.weights[e];
      a[std::size_t(uj) * m + ui] -= g.weights[e];
    }
  }
  for (int u = 0; u < m; ++u) a[std::size_t(u) * m + u] = sys.diag[u];

  // Gaussian elimination with partial pivoting.
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = i;
  for (int k = 0; k < m; ++k) {
    int pivot = k;
    double best = std::abs(a[std::size_t(perm[k]) * m + k]);
    for (int i = k + 1; i < m; ++i) {
      const double v = std::abs(a[std::size_t(perm[i]) * m + k]);
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    std::swap(perm[k], perm[pivot]);
    const double akk = a[std::size_t(perm[k]) * m + k];
    if (akk == 0.0) {
      raise(errc::value_out_of_range, "singular reduced system");
    }
    for (int i = k + 1; i < m; ++i) {
      const double factor = a[std::size_t(perm[i]) * m + k] / akk;
      if (factor == 0.0) continue;
      a[std::size_t(perm[i]) * m + k] = 0.0;
      for (int j = k + 1; j < m; ++j) {
        a[std::size_t(perm[i]) * m + j] -= factor * a[std::size_t(perm[k]) * m + j];
      }
      b[perm[i]] -= factor * b[perm[k]];
    }
  }
  std::vector<double> x(m, 0.0);
  for (int k = m - 1; k >= 0; --k) {
    double acc = b[perm[k]];
    for (int j = k + 1; j < m; ++j) acc -= a[std::size_t(perm[k]) * m + j] * x[j];
    x[k] = acc / a[std::size_t(perm[k]) * m + k];
  }

  std::vector<double> r(m, 0.0);
  apply_reduced(g, sys, x, r);
  for (int u = 0; u < m; ++u) r[u] = sys.rhs[u] - r[u];

  DiffusionField field = assemble_field(g, seeds, c, sys, x);
  field.residual = scaled_residual_inf(sys, r);
  field.converged = true;
  field.iterations = m;
  return field;
}

std::map<int, DiffusionField> diffuse_all_classes(const AffinityGraph& g,
                                                  const std::map<int, SeedAssignment>& per_class,
                                                  const DiffusionOptions& options) {
  if (per_class.empty()) {
    raise(errc::no_positive_seeds, "no classes to diffuse");
  }
  // For class c, competing classes' positive seeds become zero clamps.
  std::vector<std::pair<int, SeedAssignment>> jobs;
  jobs.reserve(per_class.size());
  for (const auto& [cls, seeds] : per_class) {
    SeedAssignment augmented = seeds;
    for (const auto& [other, other_seeds] : per_class) {
      if (other == cls) continue;
      augmented.clamp_zero.insert(augmented.clamp_zero.end(), other_seeds.clamp_one.begin(),
                                  other_seeds.clamp_one.end());
    }
    std::sort(augmented.clamp_zero.begin(), augmented.clamp_zero.end());
    augmented.clamp_zero.erase(
        std::unique(augmented.clamp_zero.begin(), augmented.clamp_zero.end()),
        augmented.clamp_zero.end());
    jobs.emplace_back(cls, std::move(augmented));
  }

  std::vector<std::future<DiffusionField>> futures;
  futures.reserve(jobs.size());
  for (const auto& [cls, seeds] : jobs) {
    futures.push_back(std::async(std::launch::async, [&g, &options, &seeds] {
      return options.jacobi_mode
                 ? solve_diffusion_jacobi(g, seeds, options.jacobi_iters)
                 : solve_diffusion(g, seeds, options.tol, options.max_iters);
    }));
  }
  std::map<int, DiffusionField> fields;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    fields.emplace(jobs[i].first, futures[i].get());
  }
  return fields;
}

double diffusion_energy(const AffinityGraph& g, const std::vector<double>& q) {
  if (q.size() != static_cast<std::size_t>(g.n)) {
    raise(errc::length_mismatch, "q length does not match graph");
  }
  double energy = 0.0;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const double diff = q[g.edges[e].first] - q[g.edges[e].second];
    energy += g.weights[e] * diff * diff;
  }
  return 0.5 * energy;
}

}  // namespace segdiff
