// Affine recovery map from post-task feature space back to the anchor space,
// with a closed-form ridge oracle and a small gated nonlinear baseline.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/feature_store.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cdrift {

struct TranslatorFitConfig {
  int epochs = 100;
  double lr = 1e-3;
  double weight_decay = 1e-4;  // decoupled, weights only
  int batch_size = 128;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LinearTranslator {
  Mat w;  // d_out x d_in
  Vec b;
  double train_mse = 0.0;
  double val_mse = 0.0;
  TranslatorFitConfig fit_config;
};

// Mean squared per-sample residual norm: (1/n) sum_i ||W x_i + b - y_i||^2.
double translation_mse(const Mat& w, const Vec& b, const Mat& x, const Mat& y);

// Validation rows are the tail of a seeded index shuffle; they depend only on
// (n, val_fraction, seed), never on the data.
std::vector<std::size_t> validation_indices(std::size_t n, double val_fraction,
                                            std::uint64_t seed);

// AdamW-trained affine map minimizing mean squared error on (x -> y) pairs.
LinearTranslator fit_linear(const Mat& x, const Mat& y,
                            const TranslatorFitConfig& config);

// Paired-view form: maps paired.a rows onto paired.b rows.
LinearTranslator fit_linear(const PairedView& paired,
                            const TranslatorFitConfig& config);

// Exact ridge solution of the same objective, bias column unpenalized.
LinearTranslator fit_linear_closed_form(const Mat& x, const Mat& y,
                                        double ridge_lambda);
LinearTranslator fit_linear_closed_form(const PairedView& paired,
                                        double ridge_lambda);

Mat apply(const LinearTranslator& t, const Mat& features);
FeatureMatrix apply(const LinearTranslator& t, const FeatureMatrix& features);

// Three affine layers with a smooth gated nonlinearity after the first two;
// hidden width equals the input width.
struct NonlinearTranslator {
  Mat w1, w2, w3;
  Vec b1, b2, b3;
  double train_mse = 0.0;
  double val_mse = 0.0;
  TranslatorFitConfig fit_config;
};

double gelu(double x);
double gelu_derivative(double x);

Mat apply(const NonlinearTranslator& t, const Mat& features);

struct NonlinearGradients {
  Mat w1, w2, w3;
  Vec b1, b2, b3;
  double loss = 0.0;
};

double nonlinear_loss(const NonlinearTranslator& t, const Mat& x, const Mat& y);
NonlinearGradients nonlinear_loss_gradient(const NonlinearTranslator& t,
                                           const Mat& x, const Mat& y);

NonlinearTranslator fit_nonlinear(const Mat& x, const Mat& y,
                                  const TranslatorFitConfig& config);
NonlinearTranslator fit_nonlinear(const PairedView& paired,
                                  const TranslatorFitConfig& config);

void save_translator(const LinearTranslator& t, const std::filesystem::path& dir);
LinearTranslator load_translator(const std::filesystem::path& dir);

}  // namespace cdrift
