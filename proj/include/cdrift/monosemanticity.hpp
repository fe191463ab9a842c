// Activation-weighted mean pairwise embedding similarity per concept, with a
// seeded embedding-permutation baseline.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/sae.hpp"

#include <cstdint>
#include <vector>

namespace cdrift {

// MS_k = sum_{i != j} z_i z_j cos(e_i, e_j) / sum_{i != j} z_i z_j over the
// samples with z_k > 0. Zero-norm embeddings are excluded. Result in [-1, 1].
double monosemanticity_score(const LatentMatrix& z, const Mat& embeddings,
                             int neuron);

// Same score with embedding rows reordered by perm (perm[i] gives the
// embedding row used for sample i).
double monosemanticity_score_permuted(const LatentMatrix& z, const Mat& embeddings,
                                      int neuron,
                                      const std::vector<std::size_t>& perm);

struct MsResult {
  std::vector<int> neurons;
  std::vector<double> per_concept_ms;
  std::vector<double> baseline_ms;
  std::uint64_t permutation_seed = 0;
};

// Applies one seeded row permutation to the embeddings and recomputes every
// neuron's score against it, keeping the original activations.
MsResult permutation_baseline(const LatentMatrix& z, const Mat& embeddings,
                              const std::vector<int>& neurons, std::uint64_t seed);

// True when the neuron has at least two positively-activating samples with
// nonzero embeddings (the domain of monosemanticity_score).
bool ms_evaluable(const LatentMatrix& z, const Mat& embeddings, int neuron);

}  // namespace cdrift
