#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdrift/probes.hpp"
#include "cdrift/rng.hpp"
#include "cdrift/synth.hpp"
#include "cdrift/translator.hpp"

#include <set>

using namespace cdrift;

namespace {

struct Blobs {
  Mat x;
  std::vector<std::uint32_t> y;
};

Blobs two_gaussian_blobs(Rng& rng, int n, int d, double separation) {
  Blobs b;
  b.x = Mat(n, d);
  b.y.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint32_t label = i % 2;
    b.y[static_cast<std::size_t>(i)] = label;
    for (int j = 0; j < d; ++j) {
      b.x(i, j) = rng.normal() + (label == 1 ? separation : -separation) * (j == 0 ? 1.0 : 0.0);
    }
  }
  return b;
}

LatentMatrix latents_from(Mat data, LatentVariant v = LatentVariant::anchor) {
  LatentMatrix z;
  z.data = std::move(data);
  z.variant = v;
  return z;
}

}  // namespace

TEST_CASE("separable blobs train to near-perfect accuracy") {
  Rng rng(1);
  const auto blobs = two_gaussian_blobs(rng, 400, 8, 4.0);
  const auto probe = fit_probe(blobs.x, blobs.y, ProbeConfig::task_defaults());
  CHECK(evaluate(probe, blobs.x, blobs.y).accuracy >= 0.99);
  CHECK(probe.converged);
  CHECK(probe.train_diagnostics.grad_norm <= 1e-6);
}

TEST_CASE("final loss never exceeds the zero-parameter loss") {
  Rng rng(2);
  const auto blobs = two_gaussian_blobs(rng, 120, 5, 0.5);
  const auto cfg = ProbeConfig::task_defaults();
  const auto probe = fit_probe(blobs.x, blobs.y, cfg);
  ProbeModel zero = probe;
  zero.weights.setZero();
  zero.bias.setZero();
  CHECK(probe.train_diagnostics.final_loss <=
        probe_objective(zero, blobs.x, blobs.y, cfg) + 1e-12);
  // The reported final loss is the true objective at the returned parameters.
  CHECK(probe.train_diagnostics.final_loss ==
        doctest::Approx(probe_objective(probe, blobs.x, blobs.y, cfg)).epsilon(1e-10));
}

TEST_CASE("multiclass probes fit and predict argmax with low-index ties") {
  Rng rng(3);
  const int n = 300;
  Mat x(n, 4);
  std::vector<std::uint32_t> y(n);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t c = static_cast<std::uint32_t>(i % 3);
    y[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < 4; ++j) {
      x(i, j) = rng.normal() + (j == static_cast<int>(c) ? 3.0 : 0.0);
    }
  }
  const auto probe = fit_probe(x, y, ProbeConfig::task_defaults());
  CHECK(evaluate(probe, x, y).accuracy >= 0.95);
}

TEST_CASE("concept labels are strict positivity of the anchor latent") {
  Mat z(3, 2);
  z << 0.0, 1.0, 0.1, 0.0, 0.0, 2.0;
  const auto y = concept_labels(latents_from(z), 0);
  CHECK(y == std::vector<std::uint32_t>{0, 1, 0});
  const auto all_zero = concept_labels(latents_from(Mat::Zero(4, 1)), 0);
  CHECK(all_zero == std::vector<std::uint32_t>{0, 0, 0, 0});
  CHECK_THROWS_AS(concept_labels(latents_from(z), 5), Error);
}

TEST_CASE("single-class labels are rejected by fit_probe") {
  Mat x = Mat::Random(10, 3);
  std::vector<std::uint32_t> y(10, 1);
  CHECK_THROWS_AS(fit_probe(x, y, ProbeConfig::concept_defaults()), Error);
}

TEST_CASE("non-finite features are rejected") {
  Mat x = Mat::Zero(4, 2);
  x(1, 1) = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> y = {0, 1, 0, 1};
  CHECK_THROWS_AS(fit_probe(x, y, ProbeConfig::task_defaults()), Error);
}

TEST_CASE("evaluate arithmetic contracts") {
  SUBCASE("all-negative predictions on balanced labels") {
    std::vector<std::uint32_t> y_true = {0, 0, 1, 1};
    std::vector<std::uint32_t> y_pred = {0, 0, 0, 0};
    const auto m = evaluate_predictions(y_pred, y_true);
    CHECK(m.balanced_accuracy == doctest::Approx(0.5));
    CHECK(m.f1 == 0.0);
    CHECK(m.accuracy == doctest::Approx(0.5));
  }
  SUBCASE("perfect predictions") {
    std::vector<std::uint32_t> y = {0, 1, 1, 0, 1};
    const auto m = evaluate_predictions(y, y);
    CHECK(m.accuracy == 1.0);
    CHECK(m.balanced_accuracy == 1.0);
    CHECK(m.f1 == 1.0);
  }
  SUBCASE("TP=2 FP=1 FN=1 TN=6") {
    std::vector<std::uint32_t> y_true = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
    std::vector<std::uint32_t> y_pred = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
    const auto m = evaluate_predictions(y_pred, y_true);
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.balanced_accuracy == doctest::Approx(0.5 * (2.0 / 3.0 + 6.0 / 7.0)));
  }
  SUBCASE("no positives anywhere defines F1 = 0") {
    std::vector<std::uint32_t> y = {0, 0, 0};
    const auto m = evaluate_predictions(y, y);
    CHECK(m.f1 == 0.0);
    CHECK(m.accuracy == 1.0);
  }
}

TEST_CASE("constant predictors get balanced accuracy exactly 1/C") {
  std::vector<std::uint32_t> y_true = {0, 0, 1, 2, 2, 2, 1};
  std::vector<std::uint32_t> y_pred(y_true.size(), 0);
  CHECK(evaluate_predictions(y_pred, y_true).balanced_accuracy ==
        doctest::Approx(1.0 / 3.0));
}

TEST_CASE("balanced accuracy is invariant under consistent class relabeling") {
  Rng rng(4);
  std::vector<std::uint32_t> y_true(60), y_pred(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y_true[i] = static_cast<std::uint32_t>(rng.below(3));
    y_pred[i] = static_cast<std::uint32_t>(rng.below(3));
  }
  const auto base = evaluate_predictions(y_pred, y_true);
  const std::uint32_t perm[3] = {2, 0, 1};
  std::vector<std::uint32_t> y_true_p(60), y_pred_p(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y_true_p[i] = perm[y_true[i]];
    y_pred_p[i] = perm[y_pred[i]];
  }
  const auto permuted = evaluate_predictions(y_pred_p, y_true_p);
  CHECK(base.balanced_accuracy == doctest::Approx(permuted.balanced_accuracy));
  CHECK(base.accuracy == doctest::Approx(permuted.accuracy));
}

TEST_CASE("decisions are invariant under positive scaling of the score") {
  Rng rng(5);
  const auto blobs = two_gaussian_blobs(rng, 100, 4, 1.0);
  auto probe = fit_probe(blobs.x, blobs.y, ProbeConfig::task_defaults());
  const auto before = predict(probe, blobs.x);
  probe.weights *= 17.0;
  probe.bias *= 17.0;
  CHECK(predict(probe, blobs.x) == before);
}

TEST_CASE("balanced weighting equals duplication to parity") {
  Rng rng(6);
  // 2 minority samples (class 1), 4 majority (class 0).
  Mat x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) *(x.data() + i) = rng.normal();
  std::vector<std::uint32_t> y = {0, 0, 0, 0, 1, 1};
  // Duplicate the minority rows once to reach 4/4.
  Mat x_dup(8, 3);
  x_dup.topRows(6) = x;
  x_dup.row(6) = x.row(4);
  x_dup.row(7) = x.row(5);
  std::vector<std::uint32_t> y_dup = {0, 0, 0, 0, 1, 1, 1, 1};

  ProbeModel model;
  model.weights = Mat(1, 3);
  model.weights << 0.3, -0.4, 0.1;
  model.bias = Vec::Constant(1, 0.05);
  model.n_classes = 2;

  ProbeConfig balanced = ProbeConfig::concept_defaults();
  ProbeConfig plain = ProbeConfig::concept_defaults();
  plain.class_weighting = ClassWeighting::none;
  const double weighted = probe_objective(model, x, y, balanced);
  const double duplicated = probe_objective(model, x_dup, y_dup, plain);
  CHECK(weighted == doctest::Approx(duplicated).epsilon(1e-8));
}

TEST_CASE("task probe panel trains once on anchor data and scores variants") {
  SynthSpec spec;
  spec.d = 16;
  spec.n_atoms = 8;
  spec.k_true = 3;
  spec.n_train = 1200;
  spec.n_test = 300;
  spec.noise_sigma = 0.01;
  spec.n_classes = 4;
  spec.seed = 30;
  spec.drift.kind = DriftKind::identity;
  const auto data = generate(spec);

  const auto translator = fit_linear_closed_form(data.drifted_train.data,
                                                 data.anchor_train.data, 0.0);
  const Mat translated = apply(translator, data.drifted_test.data);

  const auto panel = task_probe_panel(
      data.anchor_train.data, *data.anchor_train.labels, data.anchor_test.data,
      data.drifted_test.data, translated, *data.anchor_test.labels,
      ProbeConfig::task_defaults());

  // Identity drift: raw-after equals anchor bitwise; the closed-form
  // translator solves the identity exactly, so decisions coincide.
  CHECK(panel.acc_at_t == panel.acc_raw_after);
  CHECK(panel.acc_at_t == panel.acc_translated);

  SUBCASE("probability outputs agree to 1e-6 across variants") {
    const auto probe = fit_probe(data.anchor_train.data, *data.anchor_train.labels,
                                 ProbeConfig::task_defaults());
    Mat s_anchor = data.anchor_test.data * probe.weights.transpose();
    s_anchor.rowwise() += probe.bias.transpose();
    Mat s_translated = translated * probe.weights.transpose();
    s_translated.rowwise() += probe.bias.transpose();
    auto softmax_rows = [](Mat s) {
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double m = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - m).exp();
        s.row(i) /= s.row(i).sum();
      }
      return s;
    };
    const Mat p_anchor = softmax_rows(s_anchor);
    const Mat p_translated = softmax_rows(s_translated);
    CHECK((p_anchor - p_translated).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("concept decodability separates readable and erased concepts") {
  // Atom presence plays the role of anchor latents directly; no SAE involved.
  SynthSpec spec;
  spec.d = 32;
  spec.n_atoms = 16;
  spec.k_true = 3;
  spec.n_train = 1500;
  spec.n_test = 400;
  spec.noise_sigma = 0.02;
  spec.n_classes = 4;
  spec.seed = 31;

  SUBCASE("readable under invertible drift") {
    spec.drift.kind = DriftKind::rotation_scaling;
    const auto data = generate(spec);
    const auto z_train = latents_from(data.codes_train);
    const auto z_test = latents_from(data.codes_test);
    const auto result = concept_decodability(
        {2, 7}, z_test, data.drifted_test.data, data.drifted_train.data, z_train,
        ProbeConfig::concept_defaults());
    REQUIRE(result.scores.size() == 2);
    for (const auto& s : result.scores) {
      CHECK(s.f1 >= 0.9);
      CHECK(s.balanced_accuracy >= 0.9);
    }
    CHECK(result.skipped.empty());
    REQUIRE(result.mean_f1.has_value());
    CHECK(*result.mean_f1 >= 0.9);
  }

  SUBCASE("erased atoms lose decodability") {
    // One atom per sample and a wide erased set keep the erased concepts
    // genuinely unpredictable (knowing which atoms survive identifies an
    // erased-atom sample but not which erased atom it carried).
    spec.n_atoms = 32;
    spec.k_true = 1;
    spec.noise_sigma = 0.05;
    spec.drift.kind = DriftKind::erasure;
    spec.drift.erased_atoms = {2, 5, 8, 11, 14, 17, 20, 23, 26, 29, 30, 31};
    const auto data = generate(spec);
    const auto z_train = latents_from(data.codes_train);
    const auto z_test = latents_from(data.codes_test);
    const auto result = concept_decodability(
        {2, 5, 8}, z_test, data.drifted_test.data, data.drifted_train.data,
        z_train, ProbeConfig::concept_defaults());
    REQUIRE(result.scores.size() == 3);
    for (const auto& s : result.scores) CHECK(s.f1 < 0.2);
  }
}

TEST_CASE("no-signal concepts score near chance") {
  Rng rng(7);
  const int n = 400;
  Mat x_after = Mat::Zero(n, 6);
  const Mat one_row = Mat::Random(1, 6);
  for (int i = 0; i < n; ++i) x_after.row(i) = one_row;  // identical rows
  Mat z(n, 1);
  for (int i = 0; i < n; ++i) z(i, 0) = (i % 2 == 0) ? 1.0 : 0.0;
  const auto result = concept_decodability(
      {0}, latents_from(z), x_after, x_after, latents_from(z),
      ProbeConfig::concept_defaults());
  REQUIRE(result.scores.size() == 1);
  CHECK(result.scores[0].balanced_accuracy == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("single-class concepts are skipped with a reason") {
  Mat z = Mat::Zero(50, 2);
  z.col(1).setConstant(1.0);  // concept 1 always fires
  Mat x = Mat::Random(50, 4);
  const auto result = concept_decodability(
      {1}, latents_from(z), x, x, latents_from(z), ProbeConfig::concept_defaults());
  CHECK(result.scores.empty());
  REQUIRE(result.skipped.size() == 1);
  CHECK(result.skipped[0].concept_index == 1);
  CHECK(result.skipped[0].reason.find("all positive") != std::string::npos);
  CHECK_FALSE(result.mean_f1.has_value());
}

TEST_CASE("distribution summaries use interpolated quartiles") {
  const auto s = summarize_distribution({1.0, 2.0, 3.0, 4.0, 5.0});
  CHECK(s.min == 1.0);
  CHECK(s.q1 == 2.0);
  CHECK(s.median == 3.0);
  CHECK(s.q3 == 4.0);
  CHECK(s.max == 5.0);
  const auto t = summarize_distribution({1.0, 2.0});
  CHECK(t.median == doctest::Approx(1.5));
  CHECK(t.q1 == doctest::Approx(1.25));
}
