// Binarization, active-concept selection, inactive-neuron ablation through
// the SAE decoder, and top-activating-sample retrieval.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/sae.hpp"

#include <set>
#include <vector>

namespace cdrift {

// Per-latent mean activation over the task's anchor train latents. Computed
// once per task and reused verbatim for every checkpoint and variant.
struct AnchorStats {
  Vec mu;
  int task_id = 0;
};

struct ActiveConceptSet {
  std::vector<int> indices;  // sorted ascending
  double tau = 0.05;
  LatentVariant variant = LatentVariant::anchor;
  Vec frequencies;

  bool contains(int k) const {
    return std::binary_search(indices.begin(), indices.end(), k);
  }
  std::set<int> as_set() const { return {indices.begin(), indices.end()}; }
};

AnchorStats compute_anchor_stats(const LatentMatrix& z_train);

// a(i,k) = 1 iff z(i,k) > mu_k (strict).
BinMat binarize(const LatentMatrix& z, const AnchorStats& stats);

// Concept k is active iff its binary activation frequency is >= tau.
ActiveConceptSet active_concepts(const BinMat& binary, double tau,
                                 LatentVariant variant);

// Zeroes the non-active latents through the SAE decoder and applies the
// difference to the input features: h' = h + decode(z_masked) - decode(z).
FeatureMatrix ablate_inactive(const FeatureMatrix& h, const SaeModel& model,
                              const ActiveConceptSet& active);

// Indices of the m largest activations of one latent column, descending,
// ties broken by lower sample index. Default m mirrors the top-9 grids.
std::vector<std::int64_t> top_activating(const LatentMatrix& z, int neuron,
                                         int m = 9);

}  // namespace cdrift
