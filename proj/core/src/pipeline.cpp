#include "segdiff/pipeline.hpp"

namespace segdiff {

PipelineResult run_pipeline(const RawImage& image, const FloatMap& m, const ActivationSet& acts,
                            const ClassTable& table, const PipelineConfig& config) {
  config.validate();
  acts.validate();
  if (image.width != m.width || image.height != m.height) {
    raise(errc::dimension_mismatch, "image and M dimensions differ");
  }
  for (const auto& [cls, act] : acts.maps) {
    if (act.width != image.width || act.height != image.height) {
      raise(errc::dimension_mismatch, "activation dimensions differ from image");
    }
    if (cls >= table.size()) {
      raise(errc::index_out_of_table,
            "activation class " + std::to_string(cls) + " missing from class table");
    }
  }

  const LabImage lab = normalize_lab(rgb_to_lab(image));
  const int k = std::min<int>(config.slic_k, static_cast<int>(image.pixel_count()));

  PipelineResult result;
  result.superpixels = slic_segment(lab, k, config.slic_compactness, config.slic_iters);
  const Adjacency adj = build_adjacency(result.superpixels);
  const FeatureTable feats = compute_features(result.superpixels, lab, m);
  const AffinityGraph graph = build_affinity(adj, feats, config.sigma, config.affinity_norm);

  result.seeds = extract_seeds(result.superpixels, acts, m, config.seed_frac, config.bg_thresh);

  DiffusionOptions options;
  options.tol = config.solver_tol;
  options.max_iters = config.solver_max_iters;
  options.jacobi_mode = config.diffusion_mode == DiffusionMode::jacobi;
  options.jacobi_iters = config.jacobi_iters;
  result.fields = diffuse_all_classes(graph, result.seeds.per_class, options);
  for (const auto& [cls, field] : result.fields) {
    if (!field.converged) result.all_converged = false;
  }

  const std::vector<int> classes = fuse_labels(result.fields, result.seeds, config.accept_thresh);
  result.labels = rasterize(result.superpixels, classes, table);
  return result;
}

}  // namespace segdiff
