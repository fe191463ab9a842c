// Task-anchored sparse autoencoder with a batch-global top-K training regime
// and per-sample top-K inference. The trained model defines the fixed concept
// coordinate system the rest of the toolkit analyzes.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/feature_store.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cdrift {

struct SaeConfig {
  int input_dim = 0;
  double expansion = 2.0;  // latent_dim = round(expansion * input_dim)
  int k = 10;              // per-sample active budget
  int epochs = 10;
  double lr = 5e-3;
  int batch_size = 16;
  double dead_loss_weight = 1e-2;
  int dead_window_steps = 100;
  int aux_k = 0;  // 0 means "use k"
  std::uint64_t seed = 0;

  int latent_dim() const {
    return static_cast<int>(std::lround(expansion * input_dim));
  }
  int effective_aux_k() const { return aux_k > 0 ? aux_k : k; }
  void validate() const;
};

enum class LatentVariant { anchor, raw_after, translated };

std::string variant_name(LatentVariant v);

struct LatentMatrix {
  Mat data;  // n_samples x latent_dim, nonnegative
  int source_task = 0;
  int eval_checkpoint = 0;
  LatentVariant variant = LatentVariant::anchor;

  std::int64_t rows() const { return data.rows(); }
  std::int64_t latent_dim() const { return data.cols(); }
};

enum class EncodeMode { train_batch, inference };

struct SaeDiagnostics {
  double r2 = 0.0;
  double dead_rate = 0.0;
  double final_loss = 0.0;
};

struct SaeModel {
  Mat w_enc;  // latent_dim x d
  Vec b_enc;  // latent_dim
  Mat w_dec;  // d x latent_dim
  Vec b_dec;  // d
  SaeConfig config;
  SaeDiagnostics diagnostics;
};

// Keeps the k largest entries of each row, zeroing the rest; ties broken by
// lower column index.
Mat topk_rows(const Mat& pre, int k);

// Keeps the rows*k largest entries across the whole matrix (row-major index
// breaks ties), zeroing the rest.
Mat topk_batch(const Mat& pre, int k);

// ReLU pre-activations followed by the mode's top-K rule.
Mat encode_mat(const SaeModel& model, const Mat& features, EncodeMode mode);

LatentMatrix encode(const SaeModel& model, const FeatureMatrix& features,
                    EncodeMode mode, LatentVariant variant = LatentVariant::anchor);

Mat decode(const SaeModel& model, const Mat& latents);
Mat decode(const SaeModel& model, const LatentMatrix& latents);

// 1 - ||H - H_hat||_F^2 / ||H - column_means(H)||_F^2 under inference encoding.
double r2(const SaeModel& model, const Mat& features);

struct SaeGradients {
  Mat w_enc;
  Vec b_enc;
  Mat w_dec;
  Vec b_dec;
  double loss = 0.0;
  double mse = 0.0;
  double aux = 0.0;
  // Latents that actually fired (selected with positive value) in this batch.
  std::vector<std::uint8_t> fired;
};

// Analytic gradient of MSE + dead_loss_weight * aux over one batch. Top-K
// selections (main and aux) are treated as constants within the step. The aux
// term reconstructs the residual from the aux_k largest raw pre-activations
// among dead latents (pre-ReLU, so revival gradients reach latents stuck at
// zero), and is identically zero when no latent is dead.
SaeGradients sae_loss_gradient(const SaeModel& model, const Mat& batch,
                               const std::vector<std::uint8_t>& dead);

// Loss value alone, same definition as sae_loss_gradient (for oracles).
double sae_loss(const SaeModel& model, const Mat& batch,
                const std::vector<std::uint8_t>& dead);

// Adam training loop, deterministic given config.seed.
SaeModel train_sae(const FeatureMatrix& features, const SaeConfig& config);

// Fraction of latents never selected with a positive value when the training
// regime (batch-global top-K, canonical batch order) is replayed over the
// given features. Recomputable from the model and its training matrix.
double dead_rate(const SaeModel& model, const Mat& features);

void save_sae(const SaeModel& model, const std::filesystem::path& dir);
SaeModel load_sae(const std::filesystem::path& dir);

}  // namespace cdrift
