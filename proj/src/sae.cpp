#include "cdrift/sae.hpp"

#include "cdrift/io_blob.hpp"
#include "cdrift/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace cdrift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void SaeConfig::validate() const {
  require(input_dim > 0, ErrorKind::input, "sae: input_dim must be positive");
  require(expansion > 0.0, ErrorKind::input, "sae: expansion must be positive");
  const int latent = latent_dim();
  require(latent >= 1, ErrorKind::input, "sae: latent_dim must be at least 1");
  require(k >= 1 && k <= latent, ErrorKind::input, "sae: need 1 <= k <= latent_dim");
  require(effective_aux_k() <= latent, ErrorKind::input, "sae: aux_k exceeds latent_dim");
  require(epochs > 0 && batch_size > 0, ErrorKind::input,
          "sae: epochs and batch_size must be positive");
  require(lr > 0.0, ErrorKind::input, "sae: lr must be positive");
  require(dead_loss_weight >= 0.0, ErrorKind::input,
          "sae: dead_loss_weight must be nonnegative");
  require(dead_window_steps > 0, ErrorKind::input,
          "sae: dead_window_steps must be positive");
}

std::string variant_name(LatentVariant v) {
  switch (v) {
    case LatentVariant::anchor: return "anchor";
    case LatentVariant::raw_after: return "raw_after";
    case LatentVariant::translated: return "translated";
  }
  throw Error(ErrorKind::input, "bad latent variant");
}

namespace {

// Returns the indices of the n largest values; ties broken by lower index.
void select_topk(const double* values, std::int64_t count, std::int64_t n,
                 std::vector<std::int64_t>& out) {
  out.resize(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), std::int64_t{0});
  const auto cmp = [values](std::int64_t a, std::int64_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  };
  if (n < count) {
    std::nth_element(out.begin(), out.begin() + n, out.end(), cmp);
    out.resize(static_cast<std::size_t>(n));
  }
}

Mat pre_activations(const SaeModel& model, const Mat& features) {
  require(features.cols() == model.w_enc.cols(), ErrorKind::input,
          "encode: feature dim " + std::to_string(features.cols()) +
              " does not match model input dim " + std::to_string(model.w_enc.cols()));
  Mat pre = features * model.w_enc.transpose();
  pre.rowwise() += model.b_enc.transpose();
  return pre.cwiseMax(0.0);
}

}  // namespace

Mat topk_rows(const Mat& pre, int k) {
  Mat out = Mat::Zero(pre.rows(), pre.cols());
  std::vector<std::int64_t> idx;
  std::vector<double> row(static_cast<std::size_t>(pre.cols()));
  for (Eigen::Index i = 0; i < pre.rows(); ++i) {
    for (Eigen::Index j = 0; j < pre.cols(); ++j) row[static_cast<std::size_t>(j)] = pre(i, j);
    select_topk(row.data(), pre.cols(), k, idx);
    for (const auto j : idx) out(i, j) = pre(i, j);
  }
  return out;
}

Mat topk_batch(const Mat& pre, int k) {
  const std::int64_t total = pre.rows() * pre.cols();
  const std::int64_t budget = std::min<std::int64_t>(pre.rows() * k, total);
  std::vector<double> flat(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < pre.rows(); ++i) {
    for (Eigen::Index j = 0; j < pre.cols(); ++j) {
      flat[static_cast<std::size_t>(i * pre.cols() + j)] = pre(i, j);
    }
  }
  std::vector<std::int64_t> idx;
  select_topk(flat.data(), total, budget, idx);
  Mat out = Mat::Zero(pre.rows(), pre.cols());
  for (const auto f : idx) {
    out(f / pre.cols(), f % pre.cols()) = flat[static_cast<std::size_t>(f)];
  }
  return out;
}

Mat encode_mat(const SaeModel& model, const Mat& features, EncodeMode mode) {
  const Mat pre = pre_activations(model, features);
  return mode == EncodeMode::inference ? topk_rows(pre, model.config.k)
                                       : topk_batch(pre, model.config.k);
}

LatentMatrix encode(const SaeModel& model, const FeatureMatrix& features,
                    EncodeMode mode, LatentVariant variant) {
  LatentMatrix z;
  z.data = encode_mat(model, features.data, mode);
  z.source_task = features.manifest.task_id;
  z.eval_checkpoint = features.manifest.checkpoint_id;
  z.variant = variant;
  return z;
}

Mat decode(const SaeModel& model, const Mat& latents) {
  require(latents.cols() == model.w_dec.cols(), ErrorKind::input,
          "decode: latent dim mismatch");
  Mat recon = latents * model.w_dec.transpose();
  recon.rowwise() += model.b_dec.transpose();
  return recon;
}

Mat decode(const SaeModel& model, const LatentMatrix& latents) {
  return decode(model, latents.data);
}

double r2(const SaeModel& model, const Mat& features) {
  const Mat recon = decode(model, encode_mat(model, features, EncodeMode::inference));
  const Vec mean = features.colwise().mean();
  const double denom = (features.rowwise() - mean.transpose()).squaredNorm();
  require(denom > 0.0, ErrorKind::numeric, "r2 undefined for zero-variance features");
  return 1.0 - (features - recon).squaredNorm() / denom;
}

namespace {

struct ForwardState {
  Mat raw;     // affine outputs, before the ReLU
  Mat pre;     // post-ReLU pre-activations
  Mat z;       // masked latents (main top-K)
  Mat z_aux;   // raw values of the selected dead latents
  BinMat aux_mask;
  Mat recon;   // decode(z)
  bool has_aux = false;
};

ForwardState sae_forward(const SaeModel& model, const Mat& batch,
                         const std::vector<std::uint8_t>& dead) {
  ForwardState f;
  require(batch.cols() == model.w_enc.cols(), ErrorKind::input,
          "sae forward: feature dim mismatch");
  f.raw = batch * model.w_enc.transpose();
  f.raw.rowwise() += model.b_enc.transpose();
  f.pre = f.raw.cwiseMax(0.0);
  f.z = topk_batch(f.pre, model.config.k);
  f.recon = decode(model, f.z);
  bool any_dead = false;
  for (const auto d : dead) {
    if (d) { any_dead = true; break; }
  }
  if (any_dead && model.config.dead_loss_weight > 0.0) {
    require(dead.size() == static_cast<std::size_t>(f.pre.cols()), ErrorKind::input,
            "dead mask size mismatch");
    // The aux branch reads raw values so revival gradients reach latents whose
    // post-ReLU activation is stuck at zero.
    std::vector<std::int64_t> dead_cols;
    for (std::size_t j = 0; j < dead.size(); ++j) {
      if (dead[j]) dead_cols.push_back(static_cast<std::int64_t>(j));
    }
    const auto aux_k = static_cast<std::size_t>(model.config.effective_aux_k());
    f.z_aux = Mat::Zero(f.raw.rows(), f.raw.cols());
    f.aux_mask = BinMat::Zero(f.raw.rows(), f.raw.cols());
    std::vector<std::int64_t> order(dead_cols.size());
    for (Eigen::Index i = 0; i < f.raw.rows(); ++i) {
      std::iota(order.begin(), order.end(), std::int64_t{0});
      const auto keep = std::min(aux_k, dead_cols.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                        order.end(), [&](std::int64_t a, std::int64_t b) {
                          const double va = f.raw(i, dead_cols[static_cast<std::size_t>(a)]);
                          const double vb = f.raw(i, dead_cols[static_cast<std::size_t>(b)]);
                          if (va != vb) return va > vb;
                          return a < b;
                        });
      for (std::size_t r = 0; r < keep; ++r) {
        const auto col = dead_cols[static_cast<std::size_t>(order[r])];
        f.z_aux(i, col) = f.raw(i, col);
        f.aux_mask(i, col) = 1;
      }
    }
    f.has_aux = true;
  }
  return f;
}

}  // namespace

double sae_loss(const SaeModel& model, const Mat& batch,
                const std::vector<std::uint8_t>& dead) {
  const ForwardState f = sae_forward(model, batch, dead);
  const double n = static_cast<double>(batch.rows()) * static_cast<double>(batch.cols());
  const double mse = (f.recon - batch).squaredNorm() / n;
  double aux = 0.0;
  if (f.has_aux) {
    const Mat residual = batch - f.recon;
    const Mat aux_recon = f.z_aux * model.w_dec.transpose();
    aux = (residual - aux_recon).squaredNorm() / n;
  }
  return mse + model.config.dead_loss_weight * aux;
}

SaeGradients sae_loss_gradient(const SaeModel& model, const Mat& batch,
                               const std::vector<std::uint8_t>& dead) {
  require(batch.rows() > 0, ErrorKind::input, "sae_loss_gradient: empty batch");
  const ForwardState f = sae_forward(model, batch, dead);
  const double n = static_cast<double>(batch.rows()) * static_cast<double>(batch.cols());

  SaeGradients g;
  g.mse = (f.recon - batch).squaredNorm() / n;

  // d(loss)/d(recon): the mse term plus, when active, the aux residual chain.
  Mat d_recon = (2.0 / n) * (f.recon - batch);
  Mat d_z = Mat();
  Mat d_z_aux = Mat();
  g.w_dec = Mat::Zero(model.w_dec.rows(), model.w_dec.cols());
  g.b_dec = Vec::Zero(model.b_dec.size());

  if (f.has_aux) {
    // aux = ||(batch - recon) - z_aux W_dec^T||^2 / n, so both recon and the
    // aux reconstruction receive -(2/n) u.
    const Mat aux_recon = f.z_aux * model.w_dec.transpose();
    const Mat u = (batch - f.recon) - aux_recon;
    g.aux = u.squaredNorm() / n;
    const double w = model.config.dead_loss_weight;
    d_recon -= w * (2.0 / n) * u;
    const Mat d_aux_recon = -w * (2.0 / n) * u;
    g.w_dec += d_aux_recon.transpose() * f.z_aux;
    d_z_aux = d_aux_recon * model.w_dec;
  }

  // Decoder gradients from recon = z W_dec^T + b_dec.
  g.w_dec += d_recon.transpose() * f.z;
  g.b_dec += d_recon.colwise().sum().transpose();
  d_z = d_recon * model.w_dec;

  // Straight-through on the selections. The main branch gradient is gated by
  // the ReLU subgradient; the aux branch reads raw values, so it is not.
  Mat d_raw = Mat::Zero(f.raw.rows(), f.raw.cols());
  for (Eigen::Index i = 0; i < f.raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.raw.cols(); ++j) {
      double v = 0.0;
      if (f.z(i, j) > 0.0 && f.raw(i, j) > 0.0) v += d_z(i, j);
      if (f.has_aux && f.aux_mask(i, j)) v += d_z_aux(i, j);
      d_raw(i, j) = v;
    }
  }

  g.w_enc = d_raw.transpose() * batch;
  g.b_enc = d_raw.colwise().sum().transpose();
  g.loss = g.mse + model.config.dead_loss_weight * g.aux;

  g.fired.assign(static_cast<std::size_t>(f.pre.cols()), 0);
  for (Eigen::Index j = 0; j < f.z.cols(); ++j) {
    for (Eigen::Index i = 0; i < f.z.rows(); ++i) {
      if (f.z(i, j) > 0.0) {
        g.fired[static_cast<std::size_t>(j)] = 1;
        break;
      }
    }
  }
  return g;
}

namespace {

struct AdamState {
  Mat m_w_enc, v_w_enc, m_w_dec, v_w_dec;
  Vec m_b_enc, v_b_enc, m_b_dec, v_b_dec;
  long t = 0;

  explicit AdamState(const SaeModel& model)
      : m_w_enc(Mat::Zero(model.w_enc.rows(), model.w_enc.cols())),
        v_w_enc(Mat::Zero(model.w_enc.rows(), model.w_enc.cols())),
        m_w_dec(Mat::Zero(model.w_dec.rows(), model.w_dec.cols())),
        v_w_dec(Mat::Zero(model.w_dec.rows(), model.w_dec.cols())),
        m_b_enc(Vec::Zero(model.b_enc.size())),
        v_b_enc(Vec::Zero(model.b_enc.size())),
        m_b_dec(Vec::Zero(model.b_dec.size())),
        v_b_dec(Vec::Zero(model.b_dec.size())) {}
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename T>
void adam_step(T& param, const T& grad, T& m, T& v, double lr, double c1, double c2) {
  m = kBeta1 * m + (1.0 - kBeta1) * grad;
  v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
}

}  // namespace

SaeModel train_sae(const FeatureMatrix& features, const SaeConfig& config) {
  SaeConfig cfg = config;
  cfg.input_dim = static_cast<int>(features.cols());
  cfg.validate();
  require(features.rows() >= cfg.batch_size, ErrorKind::input,
          "train_sae: need at least one full batch of samples");
  require(features.manifest.split == Split::train, ErrorKind::input,
          "train_sae: SAEs are trained on the train split");

  const Mat& h = features.data;
  const int latent = cfg.latent_dim();
  const int d = cfg.input_dim;

  Rng rng(cfg.seed);
  SaeModel model;
  model.config = cfg;
  model.w_enc = Mat(latent, d);
  for (int i = 0; i < latent; ++i) {
    for (int j = 0; j < d; ++j) model.w_enc(i, j) = rng.normal();
    const double norm = model.w_enc.row(i).norm();
    if (norm > 0.0) model.w_enc.row(i) *= 1.0 / (norm * std::sqrt(static_cast<double>(d)));
  }
  model.b_enc = Vec::Zero(latent);
  model.w_dec = model.w_enc.transpose();
  model.b_dec = h.colwise().mean();

  AdamState adam(model);
  std::vector<long> last_fired(static_cast<std::size_t>(latent), 0);
  std::vector<std::uint8_t> dead(static_cast<std::size_t>(latent), 0);
  std::vector<std::size_t> order(static_cast<std::size_t>(h.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});

  // Periodic sweep: latents that stayed dead through a full extra window after
  // the aux loss had its chance get re-pointed at the highest-residual rows of
  // the current batch, scaled to fire just inside the selection range.
  const long resample_period = 2L * cfg.dead_window_steps;
  auto resample_dead = [&](const Mat& batch, long step) {
    if (step % resample_period != 0) return;
    std::vector<int> stale;
    for (int j = 0; j < latent; ++j) {
      if (step - last_fired[static_cast<std::size_t>(j)] > cfg.dead_window_steps) {
        stale.push_back(j);
      }
    }
    if (stale.empty()) return;
    const Mat z = encode_mat(model, batch, EncodeMode::train_batch);
    const Mat residual = batch - decode(model, z);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(residual.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::stable_sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
      return residual.row(a).squaredNorm() > residual.row(b).squaredNorm();
    });
    // Live-latent statistics anchor the scales of the reset parameters.
    std::vector<double> selected;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      for (Eigen::Index jj = 0; jj < z.cols(); ++jj) {
        if (z(i, jj) > 0.0) selected.push_back(z(i, jj));
      }
    }
    if (selected.empty()) return;
    std::nth_element(selected.begin(), selected.begin() + selected.size() / 4,
                     selected.end());
    const double target = selected[selected.size() / 4];  // lower quartile
    double enc_norm_sum = 0.0, dec_norm_sum = 0.0;
    int alive = 0;
    for (int j = 0; j < latent; ++j) {
      if (step - last_fired[static_cast<std::size_t>(j)] <= cfg.dead_window_steps) {
        enc_norm_sum += model.w_enc.row(j).norm();
        dec_norm_sum += model.w_dec.col(j).norm();
        ++alive;
      }
    }
    if (alive == 0 || target <= 0.0) return;
    const double enc_cap = 2.0 * enc_norm_sum / alive;
    const double dec_norm = dec_norm_sum / alive;
    for (std::size_t s = 0; s < stale.size(); ++s) {
      const auto row = rows[s % rows.size()];
      const double norm = residual.row(row).norm();
      if (norm < 1e-12) continue;
      const Vec dir = residual.row(row).transpose() / norm;
      const double along = dir.dot(batch.row(row).transpose());
      if (along <= 1e-9) continue;
      const int j = stale[s];
      model.w_enc.row(j) = std::min(target / along, enc_cap) * dir.transpose();
      model.b_enc(j) = 0.0;
      model.w_dec.col(j) = dec_norm * dir;
      adam.m_w_enc.row(j).setZero();
      adam.v_w_enc.row(j).setZero();
      adam.m_b_enc(j) = 0.0;
      adam.v_b_enc(j) = 0.0;
      adam.m_w_dec.col(j).setZero();
      adam.v_w_dec.col(j).setZero();
      last_fired[static_cast<std::size_t>(j)] = step;
    }
  };

  long step = 0;
  double epoch_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    epoch_loss = 0.0;
    std::int64_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Mat batch(static_cast<Eigen::Index>(end - start), d);
      for (std::size_t r = start; r < end; ++r) {
        batch.row(static_cast<Eigen::Index>(r - start)) = h.row(static_cast<Eigen::Index>(order[r]));
      }
      ++step;
      for (int j = 0; j < latent; ++j) {
        dead[static_cast<std::size_t>(j)] =
            (step - last_fired[static_cast<std::size_t>(j)]) > cfg.dead_window_steps ? 1 : 0;
      }
      const SaeGradients g = sae_loss_gradient(model, batch, dead);
      require(std::isfinite(g.loss), ErrorKind::numeric,
              "train_sae: non-finite loss at step " + std::to_string(step) +
                  " (epoch " + std::to_string(epoch) + ", mse " + std::to_string(g.mse) + ")");
      adam.t += 1;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      adam_step(model.w_enc, g.w_enc, adam.m_w_enc, adam.v_w_enc, cfg.lr, c1, c2);
      adam_step(model.b_enc, g.b_enc, adam.m_b_enc, adam.v_b_enc, cfg.lr, c1, c2);
      adam_step(model.w_dec, g.w_dec, adam.m_w_dec, adam.v_w_dec, cfg.lr, c1, c2);
      adam_step(model.b_dec, g.b_dec, adam.m_b_dec, adam.v_b_dec, cfg.lr, c1, c2);
      for (int j = 0; j < latent; ++j) {
        if (g.fired[static_cast<std::size_t>(j)]) last_fired[static_cast<std::size_t>(j)] = step;
      }
      resample_dead(batch, step);
      epoch_loss += g.loss;
      ++batches;
    }
    epoch_loss /= static_cast<double>(batches);
  }

  model.diagnostics.final_loss = epoch_loss;
  model.diagnostics.r2 = r2(model, h);
  model.diagnostics.dead_rate = dead_rate(model, h);
  return model;
}

double dead_rate(const SaeModel& model, const Mat& features) {
  // Replays the training regime over canonical-order batches: a latent is
  // dead when the batch-global top-K never selects it with a positive value.
  const auto latent = static_cast<std::size_t>(model.config.latent_dim());
  std::vector<std::uint8_t> fired(latent, 0);
  const auto bs = static_cast<Eigen::Index>(model.config.batch_size);
  for (Eigen::Index start = 0; start < features.rows(); start += bs) {
    const Eigen::Index rows = std::min(bs, features.rows() - start);
    const Mat z = encode_mat(model, features.middleRows(start, rows),
                             EncodeMode::train_batch);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (!fired[static_cast<std::size_t>(j)] && (z.col(j).array() > 0.0).any()) {
        fired[static_cast<std::size_t>(j)] = 1;
      }
    }
  }
  std::int64_t dead = 0;
  for (const auto fi : fired) dead += fi ? 0 : 1;
  return static_cast<double>(dead) / static_cast<double>(latent);
}

void save_sae(const SaeModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::input, "cannot create directory: " + dir.string());
  write_f32_blob(dir / "w_enc.f32", model.w_enc);
  write_f32_blob(dir / "b_enc.f32", model.b_enc);
  write_f32_blob(dir / "w_dec.f32", model.w_dec);
  write_f32_blob(dir / "b_dec.f32", model.b_dec);

  ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "sae";
  j["input_dim"] = model.config.input_dim;
  j["latent_dim"] = model.config.latent_dim();
  j["expansion"] = model.config.expansion;
  j["k"] = model.config.k;
  j["epochs"] = model.config.epochs;
  j["lr"] = model.config.lr;
  j["batch_size"] = model.config.batch_size;
  j["dead_loss_weight"] = model.config.dead_loss_weight;
  j["dead_window_steps"] = model.config.dead_window_steps;
  j["aux_k"] = model.config.aux_k;
  j["seed"] = model.config.seed;
  j["diagnostics"] = {{"r2", model.diagnostics.r2},
                      {"dead_rate", model.diagnostics.dead_rate},
                      {"final_loss", model.diagnostics.final_loss}};
  j["blobs"] = {{"w_enc", "w_enc.f32"}, {"b_enc", "b_enc.f32"},
                {"w_dec", "w_dec.f32"}, {"b_dec", "b_dec.f32"}};
  std::ofstream out(dir / "sae.json", std::ios::trunc);
  require(out.good(), ErrorKind::input, "cannot write sae manifest");
  out << j.dump(2) << "\n";
}

SaeModel load_sae(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sae.json");
  require(in.good(), ErrorKind::input, "missing sae manifest in " + dir.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, std::string("sae manifest parse error: ") + e.what());
  }
  require(j.value("schema_version", 0) == 1, ErrorKind::schema,
          "unknown sae manifest schema_version");
  SaeModel model;
  model.config.input_dim = j.at("input_dim").get<int>();
  model.config.expansion = j.at("expansion").get<double>();
  model.config.k = j.at("k").get<int>();
  model.config.epochs = j.at("epochs").get<int>();
  model.config.lr = j.at("lr").get<double>();
  model.config.batch_size = j.at("batch_size").get<int>();
  model.config.dead_loss_weight = j.at("dead_loss_weight").get<double>();
  model.config.dead_window_steps = j.at("dead_window_steps").get<int>();
  model.config.aux_k = j.at("aux_k").get<int>();
  model.config.seed = j.at("seed").get<std::uint64_t>();
  const int latent = j.at("latent_dim").get<int>();
  require(latent == model.config.latent_dim(), ErrorKind::schema,
          "sae manifest latent_dim inconsistent with expansion");
  const int d = model.config.input_dim;
  model.w_enc = read_f32_blob(dir / "w_enc.f32", latent, d);
  model.b_enc = read_f32_blob(dir / "b_enc.f32", latent, 1);
  model.w_dec = read_f32_blob(dir / "w_dec.f32", d, latent);
  model.b_dec = read_f32_blob(dir / "b_dec.f32", d, 1);
  model.diagnostics.r2 = j.at("diagnostics").at("r2").get<double>();
  model.diagnostics.dead_rate = j.at("diagnostics").at("dead_rate").get<double>();
  model.diagnostics.final_loss = j.at("diagnostics").at("final_loss").get<double>();
  return model;
}

}  // namespace cdrift
