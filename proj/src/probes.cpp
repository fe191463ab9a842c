#include "cdrift/probes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cdrift {

ProbeConfig ProbeConfig::task_defaults() {
  ProbeConfig c;
  c.kind = ProbeKind::task_multiclass;
  c.max_iters = 1500;
  c.class_weighting = ClassWeighting::none;
  return c;
}

ProbeConfig ProbeConfig::concept_defaults() {
  ProbeConfig c;
  c.kind = ProbeKind::concept_binary;
  c.max_iters = 1000;
  c.class_weighting = ClassWeighting::balanced;
  return c;
}

void ProbeConfig::validate() const {
  require(tol > 0.0, ErrorKind::input, "probe: tol must be positive");
  require(max_iters > 0, ErrorKind::input, "probe: max_iters must be positive");
  require(l2_strength >= 0.0, ErrorKind::input, "probe: l2_strength must be nonnegative");
}

std::vector<std::uint32_t> concept_labels(const LatentMatrix& z_anchor, int neuron) {
  require(neuron >= 0 && neuron < z_anchor.latent_dim(), ErrorKind::input,
          "concept_labels: neuron index out of range");
  std::vector<std::uint32_t> y(static_cast<std::size_t>(z_anchor.rows()));
  for (Eigen::Index i = 0; i < z_anchor.rows(); ++i) {
    y[static_cast<std::size_t>(i)] = z_anchor.data(i, neuron) > 0.0 ? 1u : 0u;
  }
  return y;
}

namespace {

double sigmoid(double s) {
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double softplus(double s) {
  return s > 30.0 ? s : std::log1p(std::exp(std::min(s, 30.0)));
}

struct LogisticObjective {
  const Mat& x;
  const std::vector<std::uint32_t>& y;
  Vec sample_weight;  // sums to n
  int n_classes;      // label range; 1 weight row when binary
  int rows_c;         // parameter rows: 1 for binary, n_classes otherwise
  double l2;

  Eigen::Index dim() const { return rows_c * (x.cols() + 1); }

  void unpack(const Vec& theta, Mat& w, Vec& b) const {
    const Eigen::Index d = x.cols();
    w = Mat(rows_c, d);
    b = Vec(rows_c);
    for (Eigen::Index c = 0; c < rows_c; ++c) {
      w.row(c) = theta.segment(c * d, d).transpose();
      b(c) = theta(rows_c * d + c);
    }
  }

  Vec pack(const Mat& w, const Vec& b) const {
    const Eigen::Index d = x.cols();
    Vec theta(dim());
    for (Eigen::Index c = 0; c < rows_c; ++c) {
      theta.segment(c * d, d) = w.row(c).transpose();
      theta(rows_c * d + c) = b(c);
    }
    return theta;
  }

  double value_and_grad(const Vec& theta, Vec& grad) const {
    Mat w;
    Vec b;
    unpack(theta, w, b);
    const double n = static_cast<double>(x.rows());
    const Eigen::Index d = x.cols();
    Mat gw = Mat::Zero(rows_c, d);
    Vec gb = Vec::Zero(rows_c);
    double loss = 0.0;

    if (rows_c == 1) {
      const Vec s = x * w.row(0).transpose() + Vec::Constant(x.rows(), b(0));
      Vec factor(x.rows());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double yi = static_cast<double>(y[static_cast<std::size_t>(i)]);
        const double wi = sample_weight(i);
        loss += wi * (softplus(s(i)) - yi * s(i));
        factor(i) = wi * (sigmoid(s(i)) - yi);
      }
      gw.row(0) = (factor.transpose() * x) / n;
      gb(0) = factor.sum() / n;
    } else {
      Mat scores = x * w.transpose();
      scores.rowwise() += b.transpose();
      Mat coeff(x.rows(), rows_c);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        double z = 0.0;
        for (Eigen::Index c = 0; c < rows_c; ++c) z += std::exp(scores(i, c) - m);
        const double log_z = std::log(z) + m;
        const auto yi = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
        const double wi = sample_weight(i);
        loss += wi * (log_z - scores(i, yi));
        for (Eigen::Index c = 0; c < rows_c; ++c) {
          coeff(i, c) = wi * (std::exp(scores(i, c) - log_z) - (c == yi ? 1.0 : 0.0));
        }
      }
      gw = (coeff.transpose() * x) / n;
      gb = coeff.colwise().sum().transpose() / n;
    }

    loss /= n;
    loss += 0.5 * l2 * w.squaredNorm();
    gw += l2 * w;
    grad = pack(gw, gb);
    return loss;
  }
};

// Two-loop L-BFGS with Armijo backtracking; robust on the smooth convex
// logistic objective.
struct LbfgsResult {
  Vec theta;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

LbfgsResult lbfgs_minimize(const LogisticObjective& obj, int max_iters, double tol) {
  constexpr int kHistory = 10;
  constexpr double kArmijoC1 = 1e-4;

  LbfgsResult r;
  r.theta = Vec::Zero(obj.dim());
  Vec grad(obj.dim());
  double f = obj.value_and_grad(r.theta, grad);
  std::deque<std::pair<Vec, Vec>> history;  // (s, y)

  for (int iter = 0; iter < max_iters; ++iter) {
    r.grad_norm = grad.norm();
    if (r.grad_norm <= tol) {
      r.converged = true;
      break;
    }

    Vec q = grad;
    std::vector<double> alpha(history.size());
    for (std::size_t h = history.size(); h-- > 0;) {
      const auto& [s, yv] = history[h];
      const double rho = 1.0 / yv.dot(s);
      alpha[h] = rho * s.dot(q);
      q -= alpha[h] * yv;
    }
    if (!history.empty()) {
      const auto& [s, yv] = history.back();
      q *= s.dot(yv) / yv.squaredNorm();
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const auto& [s, yv] = history[h];
      const double rho = 1.0 / yv.dot(s);
      const double beta = rho * yv.dot(q);
      q += (alpha[h] - beta) * s;
    }
    Vec dir = -q;
    double dg = dir.dot(grad);
    if (dg >= 0.0) {  // not a descent direction, fall back to steepest descent
      dir = -grad;
      dg = -grad.squaredNorm();
    }

    double step = history.empty() ? std::min(1.0, 1.0 / r.grad_norm) : 1.0;
    Vec theta_new;
    Vec grad_new(obj.dim());
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      theta_new = r.theta + step * dir;
      f_new = obj.value_and_grad(theta_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijoC1 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++r.iterations;
    if (!accepted) break;

    const Vec s = theta_new - r.theta;
    const Vec yv = grad_new - grad;
    if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
      history.emplace_back(s, yv);
      if (history.size() > kHistory) history.pop_front();
    }
    r.theta = theta_new;
    grad = grad_new;
    f = f_new;
  }

  r.grad_norm = grad.norm();
  if (r.grad_norm <= tol) r.converged = true;
  r.loss = f;
  return r;
}

Vec make_sample_weights(const std::vector<std::uint32_t>& y, int n_classes,
                        ClassWeighting weighting) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Vec w = Vec::Ones(n);
  if (weighting == ClassWeighting::balanced) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (const auto v : y) ++counts[v];
    std::int64_t present = 0;
    for (const auto c : counts) present += c > 0 ? 1 : 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto c = y[static_cast<std::size_t>(i)];
      w(i) = static_cast<double>(n) /
             (static_cast<double>(present) * static_cast<double>(counts[c]));
    }
  }
  return w;
}

}  // namespace

ProbeModel fit_probe(const Mat& x, const std::vector<std::uint32_t>& y,
                     const ProbeConfig& config) {
  config.validate();
  require(static_cast<std::size_t>(x.rows()) == y.size(), ErrorKind::input,
          "fit_probe: label count mismatch");
  require(all_finite(x), ErrorKind::input, "fit_probe: non-finite features");
  std::uint32_t max_label = 0;
  for (const auto v : y) max_label = std::max(max_label, v);
  const int n_classes = static_cast<int>(max_label) + 1;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (const auto v : y) ++counts[v];
  int present = 0;
  for (const auto c : counts) present += c > 0 ? 1 : 0;
  require(present >= 2, ErrorKind::input,
          "fit_probe: need at least 2 classes present in y");
  if (config.kind == ProbeKind::concept_binary) {
    require(n_classes == 2, ErrorKind::input,
            "fit_probe: concept probes take binary labels");
  }

  LogisticObjective obj{x, y, make_sample_weights(y, n_classes, config.class_weighting),
                        n_classes,
                        config.kind == ProbeKind::concept_binary ? 1 : n_classes,
                        config.l2_strength};
  const LbfgsResult r = lbfgs_minimize(obj, config.max_iters, config.tol);

  ProbeModel model;
  obj.unpack(r.theta, model.weights, model.bias);
  model.n_classes = n_classes;
  model.converged = r.converged;
  model.train_diagnostics.iterations = r.iterations;
  model.train_diagnostics.final_loss = r.loss;
  model.train_diagnostics.grad_norm = r.grad_norm;
  require(all_finite(model.weights) && all_finite(model.bias), ErrorKind::numeric,
          "fit_probe: non-finite parameters");
  return model;
}

double probe_objective(const ProbeModel& model, const Mat& x,
                       const std::vector<std::uint32_t>& y,
                       const ProbeConfig& config) {
  LogisticObjective obj{x, y,
                        make_sample_weights(y, model.n_classes, config.class_weighting),
                        model.n_classes, static_cast<int>(model.weights.rows()),
                        config.l2_strength};
  Vec grad;
  return obj.value_and_grad(obj.pack(model.weights, model.bias), grad);
}

std::vector<std::uint32_t> predict(const ProbeModel& model, const Mat& x) {
  require(x.cols() == model.weights.cols(), ErrorKind::input,
          "predict: dimension mismatch");
  std::vector<std::uint32_t> out(static_cast<std::size_t>(x.rows()));
  if (model.is_binary()) {
    const Vec s = x * model.weights.row(0).transpose() +
                  Vec::Constant(x.rows(), model.bias(0));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out[static_cast<std::size_t>(i)] = s(i) > 0.0 ? 1u : 0u;
    }
  } else {
    Mat scores = x * model.weights.transpose();
    scores.rowwise() += model.bias.transpose();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < scores.cols(); ++c) {
        if (scores(i, c) > scores(i, best)) best = c;  // ties keep the lower class
      }
      out[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(best);
    }
  }
  return out;
}

EvalMetrics evaluate_predictions(const std::vector<std::uint32_t>& y_pred,
                                 const std::vector<std::uint32_t>& y_true) {
  require(y_pred.size() == y_true.size() && !y_true.empty(), ErrorKind::input,
          "evaluate: prediction/label size mismatch");
  std::uint32_t max_label = 0;
  for (const auto v : y_true) max_label = std::max(max_label, v);
  for (const auto v : y_pred) max_label = std::max(max_label, v);
  const std::size_t n_classes = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::int64_t> support(n_classes, 0), correct(n_classes, 0),
      predicted(n_classes, 0);
  std::int64_t total_correct = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++support[y_true[i]];
    ++predicted[y_pred[i]];
    if (y_true[i] == y_pred[i]) {
      ++correct[y_true[i]];
      ++total_correct;
    }
  }

  EvalMetrics m;
  m.accuracy = static_cast<double>(total_correct) / static_cast<double>(y_true.size());

  double recall_sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (support[c] > 0) {
      recall_sum += static_cast<double>(correct[c]) / static_cast<double>(support[c]);
      ++present;
    }
  }
  m.balanced_accuracy = present > 0 ? recall_sum / present : 0.0;

  // Positive-class F1 with the degenerate-denominator -> 0 convention.
  if (n_classes <= 2) {
    const std::int64_t tp = n_classes == 2 ? correct[1] : 0;
    const std::int64_t pred_pos = n_classes == 2 ? predicted[1] : 0;
    const std::int64_t actual_pos = n_classes == 2 ? support[1] : 0;
    const double precision = pred_pos > 0 ? static_cast<double>(tp) / pred_pos : 0.0;
    const double recall = actual_pos > 0 ? static_cast<double>(tp) / actual_pos : 0.0;
    m.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                      : 0.0;
  } else {
    m.f1 = 0.0;  // positive-class F1 is a binary-probe metric
  }
  return m;
}

EvalMetrics evaluate(const ProbeModel& model, const Mat& x,
                     const std::vector<std::uint32_t>& y) {
  require(static_cast<std::size_t>(x.rows()) == y.size(), ErrorKind::input,
          "evaluate: label count mismatch");
  return evaluate_predictions(predict(model, x), y);
}

TaskProbePanel task_probe_panel(const Mat& train_x,
                                const std::vector<std::uint32_t>& train_y,
                                const Mat& test_at_t, const Mat& test_raw_after,
                                const Mat& test_translated,
                                const std::vector<std::uint32_t>& test_y,
                                const ProbeConfig& config) {
  require(test_at_t.rows() == test_raw_after.rows() &&
              test_at_t.rows() == test_translated.rows(),
          ErrorKind::input, "task_probe_panel: test variant row counts differ");
  const ProbeModel probe = fit_probe(train_x, train_y, config);
  TaskProbePanel panel;
  panel.acc_at_t = evaluate(probe, test_at_t, test_y).accuracy;
  panel.acc_raw_after = evaluate(probe, test_raw_after, test_y).accuracy;
  panel.acc_translated = evaluate(probe, test_translated, test_y).accuracy;
  return panel;
}

DistributionSummary summarize_distribution(std::vector<double> values) {
  require(!values.empty(), ErrorKind::input, "summarize_distribution: empty input");
  std::sort(values.begin(), values.end());
  const auto quantile = [&values](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  DistributionSummary s;
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

ConceptDecodability concept_decodability(const std::set<int>& deleted,
                                         const LatentMatrix& z_anchor_test,
                                         const Mat& x_after_test,
                                         const Mat& x_after_train,
                                         const LatentMatrix& z_anchor_train,
                                         const ProbeConfig& config) {
  require(x_after_train.rows() == z_anchor_train.rows(), ErrorKind::input,
          "concept_decodability: train row mismatch");
  require(x_after_test.rows() == z_anchor_test.rows(), ErrorKind::input,
          "concept_decodability: test row mismatch");

  ConceptDecodability out;
  for (const int k : deleted) {
    const auto y_train = concept_labels(z_anchor_train, k);
    const auto positives = static_cast<std::int64_t>(
        std::count(y_train.begin(), y_train.end(), 1u));
    if (positives == 0 || positives == static_cast<std::int64_t>(y_train.size())) {
      out.skipped.push_back(
          {k, positives == 0 ? "single-class train labels (all negative)"
                             : "single-class train labels (all positive)"});
      continue;
    }
    const ProbeModel probe = fit_probe(x_after_train, y_train, config);
    const auto y_test = concept_labels(z_anchor_test, k);
    const EvalMetrics m = evaluate(probe, x_after_test, y_test);
    out.scores.push_back({k, m.balanced_accuracy, m.f1});
  }

  if (!out.scores.empty()) {
    std::vector<double> baccs, f1s;
    baccs.reserve(out.scores.size());
    f1s.reserve(out.scores.size());
    double bacc_sum = 0.0, f1_sum = 0.0;
    for (const auto& s : out.scores) {
      baccs.push_back(s.balanced_accuracy);
      f1s.push_back(s.f1);
      bacc_sum += s.balanced_accuracy;
      f1_sum += s.f1;
    }
    out.mean_balanced_accuracy = bacc_sum / static_cast<double>(out.scores.size());
    out.mean_f1 = f1_sum / static_cast<double>(out.scores.size());
    out.balanced_accuracy_summary = summarize_distribution(baccs);
    out.f1_summary = summarize_distribution(f1s);
  }
  return out;
}

}  // namespace cdrift
