// Synthetic multi-checkpoint feature generator with planted sparse atoms and
// controllable drift. Ground truth (dictionary, codes, erased set) makes every
// downstream metric checkable by construction.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/feature_store.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cdrift {

enum class DriftKind {
  identity,
  rotation,
  rotation_scaling,
  affine,
  erasure,
  nonlinear
};

std::string drift_kind_name(DriftKind k);
DriftKind parse_drift_kind(const std::string& s);

struct DriftSpec {
  DriftKind kind = DriftKind::identity;
  double scale_lo = 0.8;
  double scale_hi = 1.25;
  std::vector<int> erased_atoms;
  double bias_norm = 0.0;
};

struct SynthSpec {
  int d = 16;
  int n_atoms = 8;
  int k_true = 3;
  std::int64_t n_train = 2000;
  std::int64_t n_test = 500;
  double noise_sigma = 0.01;
  int n_classes = 4;
  DriftSpec drift;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthData {
  FeatureMatrix anchor_train;
  FeatureMatrix anchor_test;
  FeatureMatrix drifted_train;
  FeatureMatrix drifted_test;
  Mat dictionary;   // d x n_atoms, unit-norm columns
  Mat codes_train;  // n_train x n_atoms, nonnegative sparse
  Mat codes_test;
  Mat drift_linear;  // the linear stage of the drift; empty for identity
  Vec drift_bias;    // empty unless the drift adds a bias
  std::vector<int> erased_atoms;
  SynthSpec spec;
};

// Deterministic given spec.seed. Anchor features are S*D^T + sigma*noise;
// drifted features apply the DriftSpec transform to the anchor features.
// Labels are the group of each sample's dominant atom.
SynthData generate(const SynthSpec& spec);

// Bounds the acceptance tests assert for a given drift family.
struct OracleBounds {
  std::optional<double> expected_deletion_ratio;      // identity: exactly 0
  std::optional<double> min_deletion_ratio;           // scrambling drifts
  std::optional<double> min_regained_count_ratio;     // invertible drifts
  std::optional<double> min_regained_activation_mass; // invertible drifts
  std::optional<double> max_translated_probe_gap;     // accuracy points
  std::optional<double> max_erased_concept_f1;        // erasure
};

OracleBounds oracle_expectations(const SynthSpec& spec);

// For each latent, the planted atom whose direction best matches the decoder
// column, when the max cosine reaches min_cos; otherwise unmatched.
std::vector<std::optional<int>> match_atoms(const Mat& w_dec, const Mat& dictionary,
                                            double min_cos = 0.7);

// Embeddings for monosemanticity checks: each sample's dominant planted atom
// direction plus small isotropic noise.
Mat cluster_embeddings(const Mat& dictionary, const Mat& codes, double noise,
                       std::uint64_t seed);

// Writes the feature-store layout (anchor at ckpt 0, drifted at
// drift_checkpoint) plus a ground_truth/ sidecar under root.
void write_synth_layout(const SynthData& data, const std::filesystem::path& root,
                        int drift_checkpoint = 1);

}  // namespace cdrift
