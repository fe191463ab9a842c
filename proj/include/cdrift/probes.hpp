// L2-regularized linear classifiers for task prediction and per-concept
// binary decodability, trained with L-BFGS on the convex objective
//   J(W, b) = mean_i w_i * CE_i + (l2/2) ||W||_F^2   (bias unpenalized).
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/sae.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cdrift {

enum class ProbeKind { task_multiclass, concept_binary };
enum class ClassWeighting { none, balanced };

struct ProbeConfig {
  ProbeKind kind = ProbeKind::task_multiclass;
  // Penalty coefficient on (l2/2)||W||^2 against the mean cross-entropy; the
  // mean form keeps class weighting equivalent to sample duplication, and
  // 1e-3 matches a summed-objective library default at these sample counts.
  double l2_strength = 1e-3;
  int max_iters = 1500;
  double tol = 1e-6;  // gradient-norm tolerance
  ClassWeighting class_weighting = ClassWeighting::none;
  std::uint64_t seed = 0;

  static ProbeConfig task_defaults();
  static ProbeConfig concept_defaults();
  void validate() const;
};

struct ProbeModel {
  Mat weights;  // C x D (1 x D for binary)
  Vec bias;     // C (1 for binary)
  bool converged = false;
  int n_classes = 2;
  struct {
    int iterations = 0;
    double final_loss = 0.0;
    double grad_norm = 0.0;
  } train_diagnostics;

  bool is_binary() const { return weights.rows() == 1; }
};

// Binary anchor label per sample: 1 iff the anchor latent is strictly positive.
std::vector<std::uint32_t> concept_labels(const LatentMatrix& z_anchor, int neuron);

ProbeModel fit_probe(const Mat& x, const std::vector<std::uint32_t>& y,
                     const ProbeConfig& config);

// Objective value and gradient norm at the model's parameters (for contracts
// and convexity checks).
double probe_objective(const ProbeModel& model, const Mat& x,
                       const std::vector<std::uint32_t>& y,
                       const ProbeConfig& config);

std::vector<std::uint32_t> predict(const ProbeModel& model, const Mat& x);

struct EvalMetrics {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;  // positive-class F1, binary probes only
};

// Metrics from raw prediction/label pairs. Degenerate precision/recall/F1
// denominators evaluate to 0.
EvalMetrics evaluate_predictions(const std::vector<std::uint32_t>& y_pred,
                                 const std::vector<std::uint32_t>& y_true);

EvalMetrics evaluate(const ProbeModel& model, const Mat& x,
                     const std::vector<std::uint32_t>& y);

struct TaskProbePanel {
  double acc_at_t = 0.0;
  double acc_raw_after = 0.0;
  double acc_translated = 0.0;
};

// Trains one probe on anchor-time train data only, then scores the three
// test-variant inputs. Works on either feature-space or latent-space inputs.
TaskProbePanel task_probe_panel(const Mat& train_x,
                                const std::vector<std::uint32_t>& train_y,
                                const Mat& test_at_t, const Mat& test_raw_after,
                                const Mat& test_translated,
                                const std::vector<std::uint32_t>& test_y,
                                const ProbeConfig& config);

struct ConceptProbeScore {
  int concept_index = 0;
  double balanced_accuracy = 0.0;
  double f1 = 0.0;
};

struct SkippedConcept {
  int concept_index = 0;
  std::string reason;
};

struct DistributionSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

DistributionSummary summarize_distribution(std::vector<double> values);

struct ConceptDecodability {
  std::vector<ConceptProbeScore> scores;  // ascending concept index
  std::vector<SkippedConcept> skipped;
  std::optional<double> mean_balanced_accuracy;
  std::optional<double> mean_f1;
  std::optional<DistributionSummary> balanced_accuracy_summary;
  std::optional<DistributionSummary> f1_summary;
};

// One binary probe per deleted concept: labels come from anchor latents, the
// probe reads the post-task representation of the same samples. Concepts with
// single-class train labels are recorded as skipped, not errored.
ConceptDecodability concept_decodability(const std::set<int>& deleted,
                                         const LatentMatrix& z_anchor_test,
                                         const Mat& x_after_test,
                                         const Mat& x_after_train,
                                         const LatentMatrix& z_anchor_train,
                                         const ProbeConfig& config);

}  // namespace cdrift
