#include "cdrift/translator.hpp"

#include "cdrift/io_blob.hpp"
#include "cdrift/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>

namespace cdrift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void TranslatorFitConfig::validate() const {
  require(epochs > 0 && batch_size > 0, ErrorKind::input,
          "translator: epochs and batch_size must be positive");
  require(lr > 0.0 && weight_decay >= 0.0, ErrorKind::input,
          "translator: bad optimizer settings");
  require(val_fraction >= 0.0 && val_fraction < 1.0, ErrorKind::input,
          "translator: val_fraction must be in [0, 1)");
}

double translation_mse(const Mat& w, const Vec& b, const Mat& x, const Mat& y) {
  Mat pred = x * w.transpose();
  pred.rowwise() += b.transpose();
  return (pred - y).squaredNorm() / static_cast<double>(x.rows());
}

std::vector<std::size_t> validation_indices(std::size_t n, double val_fraction,
                                            std::uint64_t seed) {
  Rng rng(seed);
  auto perm = rng.permutation(n);
  const auto n_val = static_cast<std::size_t>(
      std::llround(val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> val(perm.end() - static_cast<std::ptrdiff_t>(n_val),
                               perm.end());
  return val;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Decoupled-decay Adam on a flat parameter block.
struct AdamW {
  Vec m, v;
  long t = 0;
  explicit AdamW(Eigen::Index size) : m(Vec::Zero(size)), v(Vec::Zero(size)) {}

  void step(Eigen::Ref<Vec> param, const Vec& grad, double lr, double decay) {
    t += 1;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    param.array() -= lr * ((m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps));
    if (decay > 0.0) param.array() -= lr * decay * param.array();
  }
};

struct SplitData {
  Mat x_train, y_train, x_val, y_val;
};

SplitData split_train_val(const Mat& x, const Mat& y,
                          const TranslatorFitConfig& cfg) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto val_idx = validation_indices(n, cfg.val_fraction, cfg.seed);
  std::vector<std::uint8_t> is_val(n, 0);
  for (const auto i : val_idx) is_val[i] = 1;
  SplitData s;
  s.x_train = Mat(static_cast<Eigen::Index>(n - val_idx.size()), x.cols());
  s.y_train = Mat(s.x_train.rows(), y.cols());
  s.x_val = Mat(static_cast<Eigen::Index>(val_idx.size()), x.cols());
  s.y_val = Mat(s.x_val.rows(), y.cols());
  Eigen::Index ti = 0, vi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_val[i]) {
      s.x_val.row(vi) = x.row(static_cast<Eigen::Index>(i));
      s.y_val.row(vi) = y.row(static_cast<Eigen::Index>(i));
      ++vi;
    } else {
      s.x_train.row(ti) = x.row(static_cast<Eigen::Index>(i));
      s.y_train.row(ti) = y.row(static_cast<Eigen::Index>(i));
      ++ti;
    }
  }
  return s;
}

void check_pair_dims(const Mat& x, const Mat& y) {
  require(x.rows() == y.rows(), ErrorKind::input, "translator: row count mismatch");
  require(x.rows() >= 2, ErrorKind::input, "translator: need at least 2 samples");
  require(all_finite(x) && all_finite(y), ErrorKind::input,
          "translator: non-finite inputs");
}

}  // namespace

LinearTranslator fit_linear(const Mat& x, const Mat& y,
                            const TranslatorFitConfig& config) {
  config.validate();
  check_pair_dims(x, y);
  const SplitData s = split_train_val(x, y, config);
  require(s.x_train.rows() >= 1, ErrorKind::input,
          "translator: empty train split after validation holdout");

  const Eigen::Index d_in = x.cols();
  const Eigen::Index d_out = y.cols();
  LinearTranslator t;
  t.fit_config = config;
  t.w = Mat::Zero(d_out, d_in);
  t.b = Vec::Zero(d_out);

  AdamW opt_w(d_out * d_in);
  AdamW opt_b(d_out);
  Rng rng(config.seed + 1);  // shuffle stream, distinct from the split stream
  std::vector<std::size_t> order(static_cast<std::size_t>(s.x_train.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto nb = static_cast<Eigen::Index>(end - start);
      Mat xb(nb, d_in), yb(nb, d_out);
      for (std::size_t r = start; r < end; ++r) {
        xb.row(static_cast<Eigen::Index>(r - start)) = s.x_train.row(static_cast<Eigen::Index>(order[r]));
        yb.row(static_cast<Eigen::Index>(r - start)) = s.y_train.row(static_cast<Eigen::Index>(order[r]));
      }
      Mat pred = xb * t.w.transpose();
      pred.rowwise() += t.b.transpose();
      const Mat d_pred = (2.0 / static_cast<double>(nb)) * (pred - yb);
      require(d_pred.allFinite(), ErrorKind::numeric,
              "fit_linear: divergence (non-finite loss)");
      const Mat gw = d_pred.transpose() * xb;
      const Vec gb = d_pred.colwise().sum().transpose();
      Eigen::Map<Vec> w_flat(t.w.data(), t.w.size());
      Eigen::Map<const Vec> gw_flat(gw.data(), gw.size());
      opt_w.step(w_flat, gw_flat, config.lr, config.weight_decay);
      opt_b.step(t.b, gb, config.lr, 0.0);
    }
  }

  t.train_mse = translation_mse(t.w, t.b, s.x_train, s.y_train);
  t.val_mse = s.x_val.rows() > 0 ? translation_mse(t.w, t.b, s.x_val, s.y_val)
                                 : t.train_mse;
  return t;
}

LinearTranslator fit_linear(const PairedView& paired,
                            const TranslatorFitConfig& config) {
  return fit_linear(paired.a->data, paired.b->data, config);
}

LinearTranslator fit_linear_closed_form(const Mat& x, const Mat& y,
                                        double ridge_lambda) {
  check_pair_dims(x, y);
  require(ridge_lambda >= 0.0, ErrorKind::input, "ridge_lambda must be nonnegative");
  const Eigen::Index n = x.rows();
  const Eigen::Index d_in = x.cols();
  Mat a(n, d_in + 1);
  a.leftCols(d_in) = x;
  a.col(d_in).setOnes();

  Mat theta;  // (d_in + 1) x d_out
  if (ridge_lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Mat> qr(a);
    require(qr.rank() == d_in + 1, ErrorKind::numeric,
            "fit_linear_closed_form: singular system with ridge_lambda = 0");
    theta = qr.solve(y);
  } else {
    Mat gram = a.transpose() * a;
    for (Eigen::Index i = 0; i < d_in; ++i) gram(i, i) += ridge_lambda;
    theta = gram.ldlt().solve(a.transpose() * y);
  }

  LinearTranslator t;
  t.w = theta.topRows(d_in).transpose();
  t.b = theta.row(d_in).transpose();
  require(all_finite(t.w) && all_finite(t.b), ErrorKind::numeric,
          "fit_linear_closed_form: non-finite solution");
  t.train_mse = translation_mse(t.w, t.b, x, y);
  t.val_mse = t.train_mse;
  return t;
}

LinearTranslator fit_linear_closed_form(const PairedView& paired,
                                        double ridge_lambda) {
  return fit_linear_closed_form(paired.a->data, paired.b->data, ridge_lambda);
}

Mat apply(const LinearTranslator& t, const Mat& features) {
  require(features.cols() == t.w.cols(), ErrorKind::input,
          "translator apply: dimension mismatch");
  Mat out = features * t.w.transpose();
  out.rowwise() += t.b.transpose();
  return out;
}

FeatureMatrix apply(const LinearTranslator& t, const FeatureMatrix& features) {
  FeatureMatrix out = features;
  out.data = apply(t, features.data);
  return out;
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
}

double gelu_derivative(double x) {
  const double phi = std::exp(-0.5 * x * x) * 0.3989422804014326779399461;
  return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * phi;
}

namespace {

struct NlForward {
  Mat a1, h1, a2, h2, out;
};

NlForward nl_forward(const NonlinearTranslator& t, const Mat& x) {
  NlForward f;
  f.a1 = x * t.w1.transpose();
  f.a1.rowwise() += t.b1.transpose();
  f.h1 = f.a1.unaryExpr([](double v) { return gelu(v); });
  f.a2 = f.h1 * t.w2.transpose();
  f.a2.rowwise() += t.b2.transpose();
  f.h2 = f.a2.unaryExpr([](double v) { return gelu(v); });
  f.out = f.h2 * t.w3.transpose();
  f.out.rowwise() += t.b3.transpose();
  return f;
}

}  // namespace

Mat apply(const NonlinearTranslator& t, const Mat& features) {
  require(features.cols() == t.w1.cols(), ErrorKind::input,
          "nonlinear translator apply: dimension mismatch");
  return nl_forward(t, features).out;
}

double nonlinear_loss(const NonlinearTranslator& t, const Mat& x, const Mat& y) {
  return (nl_forward(t, x).out - y).squaredNorm() / static_cast<double>(x.rows());
}

NonlinearGradients nonlinear_loss_gradient(const NonlinearTranslator& t,
                                           const Mat& x, const Mat& y) {
  const NlForward f = nl_forward(t, x);
  const double n = static_cast<double>(x.rows());
  NonlinearGradients g;
  g.loss = (f.out - y).squaredNorm() / n;

  const Mat d_out = (2.0 / n) * (f.out - y);
  g.w3 = d_out.transpose() * f.h2;
  g.b3 = d_out.colwise().sum().transpose();
  const Mat d_h2 = d_out * t.w3;
  const Mat d_a2 = d_h2.cwiseProduct(
      f.a2.unaryExpr([](double v) { return gelu_derivative(v); }));
  g.w2 = d_a2.transpose() * f.h1;
  g.b2 = d_a2.colwise().sum().transpose();
  const Mat d_h1 = d_a2 * t.w2;
  const Mat d_a1 = d_h1.cwiseProduct(
      f.a1.unaryExpr([](double v) { return gelu_derivative(v); }));
  g.w1 = d_a1.transpose() * x;
  g.b1 = d_a1.colwise().sum().transpose();
  return g;
}

NonlinearTranslator fit_nonlinear(const Mat& x, const Mat& y,
                                  const TranslatorFitConfig& config) {
  config.validate();
  check_pair_dims(x, y);
  require(x.cols() == y.cols(), ErrorKind::input,
          "fit_nonlinear: hidden width equals input width, need square pairs");
  const SplitData s = split_train_val(x, y, config);
  require(s.x_train.rows() >= 1, ErrorKind::input,
          "translator: empty train split after validation holdout");

  const Eigen::Index d = x.cols();
  Rng rng(config.seed);
  NonlinearTranslator t;
  t.fit_config = config;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  auto init = [&](Mat& w) {
    w = Mat(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) w(i, j) = scale * rng.normal();
    }
  };
  init(t.w1);
  init(t.w2);
  init(t.w3);
  t.b1 = Vec::Zero(d);
  t.b2 = Vec::Zero(d);
  t.b3 = Vec::Zero(d);

  AdamW ow1(d * d), ow2(d * d), ow3(d * d), ob1(d), ob2(d), ob3(d);
  Rng shuffle_rng(config.seed + 1);
  std::vector<std::size_t> order(static_cast<std::size_t>(s.x_train.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const auto nb = static_cast<Eigen::Index>(end - start);
      Mat xb(nb, d), yb(nb, d);
      for (std::size_t r = start; r < end; ++r) {
        xb.row(static_cast<Eigen::Index>(r - start)) = s.x_train.row(static_cast<Eigen::Index>(order[r]));
        yb.row(static_cast<Eigen::Index>(r - start)) = s.y_train.row(static_cast<Eigen::Index>(order[r]));
      }
      const NonlinearGradients g = nonlinear_loss_gradient(t, xb, yb);
      require(std::isfinite(g.loss), ErrorKind::numeric,
              "fit_nonlinear: divergence (non-finite loss)");
      auto step_mat = [&](Mat& w, const Mat& gw, AdamW& opt, double decay) {
        Eigen::Map<Vec> w_flat(w.data(), w.size());
        Eigen::Map<const Vec> g_flat(gw.data(), gw.size());
        opt.step(w_flat, g_flat, config.lr, decay);
      };
      step_mat(t.w1, g.w1, ow1, config.weight_decay);
      step_mat(t.w2, g.w2, ow2, config.weight_decay);
      step_mat(t.w3, g.w3, ow3, config.weight_decay);
      ob1.step(t.b1, g.b1, config.lr, 0.0);
      ob2.step(t.b2, g.b2, config.lr, 0.0);
      ob3.step(t.b3, g.b3, config.lr, 0.0);
    }
  }

  t.train_mse = nonlinear_loss(t, s.x_train, s.y_train);
  t.val_mse = s.x_val.rows() > 0 ? nonlinear_loss(t, s.x_val, s.y_val) : t.train_mse;
  return t;
}

NonlinearTranslator fit_nonlinear(const PairedView& paired,
                                  const TranslatorFitConfig& config) {
  return fit_nonlinear(paired.a->data, paired.b->data, config);
}

void save_translator(const LinearTranslator& t, const std::filesystem::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::input, "cannot create directory: " + dir.string());
  write_f32_blob(dir / "w.f32", t.w);
  write_f32_blob(dir / "b.f32", t.b);
  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "linear_translator";
  j["d_out"] = t.w.rows();
  j["d_in"] = t.w.cols();
  j["train_mse"] = t.train_mse;
  j["val_mse"] = t.val_mse;
  j["fit_config"] = {{"epochs", t.fit_config.epochs},
                     {"lr", t.fit_config.lr},
                     {"weight_decay", t.fit_config.weight_decay},
                     {"batch_size", t.fit_config.batch_size},
                     {"val_fraction", t.fit_config.val_fraction},
                     {"seed", t.fit_config.seed}};
  j["blobs"] = {{"w", "w.f32"}, {"b", "b.f32"}};
  std::ofstream out(dir / "translator.json", std::ios::trunc);
  require(out.good(), ErrorKind::input, "cannot write translator manifest");
  out << j.dump(2) << "\n";
}

LinearTranslator load_translator(const std::filesystem::path& dir) {
  std::ifstream in(dir / "translator.json");
  require(in.good(), ErrorKind::input, "missing translator manifest in " + dir.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, std::string("translator manifest parse error: ") + e.what());
  }
  require(j.value("schema_version", 0) == 1, ErrorKind::schema,
          "unknown translator schema_version");
  LinearTranslator t;
  const auto d_out = j.at("d_out").get<Eigen::Index>();
  const auto d_in = j.at("d_in").get<Eigen::Index>();
  t.w = read_f32_blob(dir / "w.f32", d_out, d_in);
  t.b = read_f32_blob(dir / "b.f32", d_out, 1);
  t.train_mse = j.at("train_mse").get<double>();
  t.val_mse = j.at("val_mse").get<double>();
  const auto& fc = j.at("fit_config");
  t.fit_config.epochs = fc.at("epochs").get<int>();
  t.fit_config.lr = fc.at("lr").get<double>();
  t.fit_config.weight_decay = fc.at("weight_decay").get<double>();
  t.fit_config.batch_size = fc.at("batch_size").get<int>();
  t.fit_config.val_fraction = fc.at("val_fraction").get<double>();
  t.fit_config.seed = fc.at("seed").get<std::uint64_t>();
  return t;
}

}  // namespace cdrift
