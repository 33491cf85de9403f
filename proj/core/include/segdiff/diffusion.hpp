#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "segdiff/superpixel.hpp"

namespace segdiff {

enum class AffinityNorm {
  linear,   // exp(-||Fi - Fj|| / (2 sigma^2))
  squared,  // exp(-||Fi - Fj||^2 / (2 sigma^2))
};

/// Sparse symmetric edge weights over adjacent superpixels, plus a CSR view
/// used by the solvers. Weights from build_affinity lie in (0,1] and equal 1
/// exactly when the two feature vectors coincide.
struct AffinityGraph {
  int n = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // i < j, sorted
  std::vector<double> weights;                               // parallel to edges
  double sigma = 0.0;

  // CSR adjacency (both directions of every edge)
  std::vector<std::int32_t> row_ptr;  // n + 1
  std::vector<std::int32_t> col;
  std::vector<double> w;

  double degree(std::int32_t i) const;
};

/// Nodes clamped to 1 (the positive seeds) and to 0. Disjoint; a solve
/// without positive seeds is rejected.
struct SeedAssignment {
  std::vector<std::int32_t> clamp_one;
  std::vector<std::int32_t> clamp_zero;
};

/// Result of one diffusion solve. Clamped entries hold their clamp values
/// exactly; all entries lie in [0,1].
struct DiffusionField {
  std::vector<double> q;
  SeedAssignment seeds;
  double residual = 0.0;  // final scaled residual max_i |r_i| / d_i
  bool converged = true;
  int iterations = 0;
};

struct DiffusionOptions {
  double tol = 1e-8;
  int max_iters = 0;  // <= 0 means 10 * n
  bool jacobi_mode = false;
  int jacobi_iters = 100;
};

/// Assemble a graph from an explicit edge/weight list (tests, benchmarks,
/// debug tooling). Edges may be given in any order and either orientation.
AffinityGraph make_affinity_graph(int n,
                                  std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                                  std::vector<double> weights, double sigma = 0.0);

/// Gaussian affinity over the adjacency edges:
///   z_ij = exp(-||F(p_i) - F(p_j)|| / (2 sigma^2))
/// with the unsquared Euclidean norm in the exponent; AffinityNorm::squared
/// selects the squared-norm variant. Throws NonPositiveSigma.
AffinityGraph build_affinity(const Adjacency& adj, const FeatureTable& feats, double sigma,
                             AffinityNorm norm = AffinityNorm::linear);

/// Seeded random-walker solve: minimizes  1/2 sum_ij z_ij (q_i - q_j)^2
/// subject to the clamps, i.e. every unclamped node ends harmonic:
/// q_i = sum_j z_ij q_j / sum_j z_ij.
///
/// Solved by Jacobi-preconditioned conjugate gradient on the reduced
/// Laplacian. Unclamped nodes whose component holds no clamp get q = 0.
/// On non-convergence the field is still returned with converged = false
/// and the residual recorded. Throws NoPositiveSeeds.
DiffusionField solve_diffusion(const AffinityGraph& g, const SeedAssignment& seeds,
                               double tol = 1e-8, int max_iters = 0);

/// Fixed-budget alternative: iterate q <- D^-1 Z q from the seeded start,
/// re-clamping seeds each sweep. Exposed for comparison runs.
DiffusionField solve_diffusion_jacobi(const AffinityGraph& g, const SeedAssignment& seeds,
                                      int iters);

/// Dense direct solve (Gaussian elimination with partial pivoting) of the
/// same reduced system. Verification oracle; throws TooLarge for n > 200.
DiffusionField solve_diffusion_oracle(const AffinityGraph& g, const SeedAssignment& seeds);

/// One independent solve per class. For class c the zero clamps are extended
/// by every other class's positive seeds, which keeps the minimization
/// well-posed under competing labels. Solves run in parallel.
std::map<int, DiffusionField> diffuse_all_classes(const AffinityGraph& g,
                                                  const std::map<int, SeedAssignment>& per_class,
                                                  const DiffusionOptions& options = {});

/// The objective value  1/2 sum_ij z_ij (q_i - q_j)^2.
double diffusion_energy(const AffinityGraph& g, const std::vector<double>& q);

}  // namespace segdiff
