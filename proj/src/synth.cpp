#include "cdrift/synth.hpp"

#include "cdrift/io_blob.hpp"
#include "cdrift/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace cdrift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string drift_kind_name(DriftKind k) {
  switch (k) {
    case DriftKind::identity: return "identity";
    case DriftKind::rotation: return "rotation";
    case DriftKind::rotation_scaling: return "rotation_scaling";
    case DriftKind::affine: return "affine";
    case DriftKind::erasure: return "erasure";
    case DriftKind::nonlinear: return "nonlinear";
  }
  throw Error(ErrorKind::input, "bad drift kind");
}

DriftKind parse_drift_kind(const std::string& s) {
  if (s == "identity") return DriftKind::identity;
  if (s == "rotation") return DriftKind::rotation;
  if (s == "rotation_scaling") return DriftKind::rotation_scaling;
  if (s == "affine") return DriftKind::affine;
  if (s == "erasure") return DriftKind::erasure;
  if (s == "nonlinear") return DriftKind::nonlinear;
  throw Error(ErrorKind::input, "unknown drift kind: " + s);
}

void SynthSpec::validate() const {
  require(d > 0 && n_atoms > 0 && k_true > 0, ErrorKind::input,
          "synth spec dims must be positive");
  require(k_true <= n_atoms, ErrorKind::input, "k_true exceeds n_atoms");
  require(n_train > 0 && n_test > 0, ErrorKind::input, "sample counts must be positive");
  require(noise_sigma >= 0.0, ErrorKind::input, "noise_sigma must be nonnegative");
  require(n_classes > 0 && n_atoms % n_classes == 0, ErrorKind::input,
          "n_classes must divide n_atoms");
  require(drift.scale_lo > 0.0 && drift.scale_hi >= drift.scale_lo, ErrorKind::input,
          "scale range must be positive and ordered");
  require(drift.bias_norm >= 0.0, ErrorKind::input, "bias_norm must be nonnegative");
  for (int a : drift.erased_atoms) {
    require(a >= 0 && a < n_atoms, ErrorKind::input, "erased atom index out of range");
  }
}

namespace {

Mat random_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Orthogonal matrix from the QR factorization of a seeded Gaussian draw,
// with column signs fixed so the factorization is unique.
Mat random_rotation(Rng& rng, int d) {
  const Mat g = random_gaussian(rng, d, d);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

struct Codes {
  Mat values;  // n x n_atoms
  std::vector<std::uint32_t> labels;
};

Codes draw_codes(Rng& rng, const SynthSpec& spec, std::int64_t n) {
  Codes c;
  c.values = Mat::Zero(n, spec.n_atoms);
  c.labels.resize(static_cast<std::size_t>(n));
  const int group_size = spec.n_atoms / spec.n_classes;
  std::vector<int> atoms(spec.n_atoms);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int a = 0; a < spec.n_atoms; ++a) atoms[static_cast<std::size_t>(a)] = a;
    // Partial Fisher-Yates: first k_true entries are the active atoms.
    for (int j = 0; j < spec.k_true; ++j) {
      const auto pick = j + static_cast<int>(rng.below(
                                static_cast<std::uint64_t>(spec.n_atoms - j)));
      std::swap(atoms[static_cast<std::size_t>(j)], atoms[static_cast<std::size_t>(pick)]);
    }
    int dominant = -1;
    double dominant_mag = -1.0;
    for (int j = 0; j < spec.k_true; ++j) {
      const int atom = atoms[static_cast<std::size_t>(j)];
      const double mag = rng.uniform(0.5, 1.5);
      c.values(i, atom) = mag;
      if (mag > dominant_mag || (mag == dominant_mag && atom < dominant)) {
        dominant_mag = mag;
        dominant = atom;
      }
    }
    c.labels[static_cast<std::size_t>(i)] =
        static_cast<std::uint32_t>(dominant / group_size);
  }
  return c;
}

struct DriftTransform {
  DriftKind kind;
  Mat linear;  // d x d, used by all linear kinds and the mixing stage of nonlinear
  Vec bias;    // d
  double tanh_gain = 0.5;

  Mat apply(const Mat& h) const {
    switch (kind) {
      case DriftKind::identity:
        return h;
      case DriftKind::nonlinear: {
        Mat g = h.array() + tanh_gain * h.array().tanh();
        return g * linear.transpose();
      }
      default: {
        Mat out = h * linear.transpose();
        if (bias.size() > 0) out.rowwise() += bias.transpose();
        return out;
      }
    }
  }
};

DriftTransform build_drift(Rng& rng, const SynthSpec& spec, const Mat& dictionary) {
  DriftTransform t;
  t.kind = spec.drift.kind;
  const int d = spec.d;
  switch (spec.drift.kind) {
    case DriftKind::identity:
      break;
    case DriftKind::rotation:
      t.linear = random_rotation(rng, d);
      break;
    case DriftKind::rotation_scaling: {
      const Mat r = random_rotation(rng, d);
      Vec scales(d);
      for (int i = 0; i < d; ++i) {
        scales(i) = rng.uniform(spec.drift.scale_lo, spec.drift.scale_hi);
      }
      t.linear = r * scales.asDiagonal();
      break;
    }
    case DriftKind::affine: {
      const Mat r1 = random_rotation(rng, d);
      const Mat r2 = random_rotation(rng, d);
      Vec scales(d);
      for (int i = 0; i < d; ++i) {
        scales(i) = rng.uniform(spec.drift.scale_lo, spec.drift.scale_hi);
      }
      t.linear = r1 * scales.asDiagonal() * r2;
      if (spec.drift.bias_norm > 0.0) {
        Vec b(d);
        for (int i = 0; i < d; ++i) b(i) = rng.normal();
        t.bias = b * (spec.drift.bias_norm / b.norm());
      }
      break;
    }
    case DriftKind::erasure: {
      require(!spec.drift.erased_atoms.empty(), ErrorKind::input,
              "erasure drift needs a non-empty erased atom set");
      Mat u(d, static_cast<Eigen::Index>(spec.drift.erased_atoms.size()));
      for (std::size_t j = 0; j < spec.drift.erased_atoms.size(); ++j) {
        u.col(static_cast<Eigen::Index>(j)) = dictionary.col(spec.drift.erased_atoms[j]);
      }
      Eigen::HouseholderQR<Mat> qr(u);
      Mat q = Mat::Identity(d, u.cols());
      q = qr.householderQ() * q;  // thin orthonormal basis of the erased span
      t.linear = Mat::Identity(d, d) - q * q.transpose();
      break;
    }
    case DriftKind::nonlinear:
      t.linear = random_rotation(rng, d);
      break;
  }
  return t;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SynthData data;
  data.spec = spec;
  data.erased_atoms = spec.drift.erased_atoms;
  std::sort(data.erased_atoms.begin(), data.erased_atoms.end());

  data.dictionary = random_gaussian(rng, spec.d, spec.n_atoms);
  for (int a = 0; a < spec.n_atoms; ++a) {
    data.dictionary.col(a).normalize();
  }

  Codes train = draw_codes(rng, spec, spec.n_train);
  Codes test = draw_codes(rng, spec, spec.n_test);
  data.codes_train = train.values;
  data.codes_test = test.values;

  Mat h_train = data.codes_train * data.dictionary.transpose();
  Mat h_test = data.codes_test * data.dictionary.transpose();
  if (spec.noise_sigma > 0.0) {
    h_train += spec.noise_sigma * random_gaussian(rng, h_train.rows(), h_train.cols());
    h_test += spec.noise_sigma * random_gaussian(rng, h_test.rows(), h_test.cols());
  }

  const DriftTransform drift = build_drift(rng, spec, data.dictionary);
  data.drift_linear = drift.linear;
  data.drift_bias = drift.bias;
  Mat d_train = drift.apply(h_train);
  Mat d_test = drift.apply(h_test);

  const std::string note = "synth seed=" + std::to_string(spec.seed) +
                           " drift=" + drift_kind_name(spec.drift.kind);
  data.anchor_train = make_feature_matrix(std::move(h_train), train.labels, 0, 0,
                                          Split::train, spec.n_classes, note);
  data.anchor_test = make_feature_matrix(std::move(h_test), test.labels, 0, 0,
                                         Split::test, spec.n_classes, note);
  data.drifted_train = make_feature_matrix(std::move(d_train), train.labels, 0, 1,
                                           Split::train, spec.n_classes, note);
  data.drifted_test = make_feature_matrix(std::move(d_test), test.labels, 0, 1,
                                          Split::test, spec.n_classes, note);
  return data;
}

OracleBounds oracle_expectations(const SynthSpec& spec) {
  OracleBounds b;
  switch (spec.drift.kind) {
    case DriftKind::identity:
      b.expected_deletion_ratio = 0.0;
      b.max_translated_probe_gap = 0.0;
      break;
    case DriftKind::rotation:
      b.min_deletion_ratio = 0.2;
      b.min_regained_count_ratio = 0.9;
      b.min_regained_activation_mass = 0.8;
      b.max_translated_probe_gap = 2.0;
      break;
    case DriftKind::rotation_scaling:
    case DriftKind::affine:
      b.min_regained_count_ratio = 0.9;
      b.max_translated_probe_gap = 2.0;
      break;
    case DriftKind::erasure:
      b.max_erased_concept_f1 = 0.2;
      break;
    case DriftKind::nonlinear:
      break;
  }
  return b;
}

std::vector<std::optional<int>> match_atoms(const Mat& w_dec, const Mat& dictionary,
                                            double min_cos) {
  require(w_dec.rows() == dictionary.rows(), ErrorKind::input,
          "match_atoms: dimension mismatch");
  std::vector<std::optional<int>> matches(static_cast<std::size_t>(w_dec.cols()));
  for (Eigen::Index j = 0; j < w_dec.cols(); ++j) {
    const double nj = w_dec.col(j).norm();
    if (nj == 0.0) continue;
    int best = -1;
    double best_cos = -2.0;
    for (Eigen::Index a = 0; a < dictionary.cols(); ++a) {
      const double c = w_dec.col(j).dot(dictionary.col(a)) / nj;
      if (c > best_cos) {
        best_cos = c;
        best = static_cast<int>(a);
      }
    }
    if (best_cos >= min_cos) matches[static_cast<std::size_t>(j)] = best;
  }
  return matches;
}

Mat cluster_embeddings(const Mat& dictionary, const Mat& codes, double noise,
                       std::uint64_t seed) {
  Rng rng(seed);
  Mat e(codes.rows(), dictionary.rows());
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    Eigen::Index dominant = 0;
    codes.row(i).maxCoeff(&dominant);
    e.row(i) = dictionary.col(dominant).transpose();
    for (Eigen::Index j = 0; j < e.cols(); ++j) e(i, j) += noise * rng.normal();
  }
  return e;
}

void write_synth_layout(const SynthData& data, const std::filesystem::path& root,
                        int drift_checkpoint) {
  auto write_one = [&](FeatureMatrix m, int ckpt) {
    m.manifest.checkpoint_id = ckpt;
    save_features(m, feature_dir(root, m.manifest.task_id, ckpt, m.manifest.split));
  };
  write_one(data.anchor_train, 0);
  write_one(data.anchor_test, 0);
  write_one(data.drifted_train, drift_checkpoint);
  write_one(data.drifted_test, drift_checkpoint);

  const fs::path gt = root / "ground_truth";
  std::error_code ec;
  fs::create_directories(gt, ec);
  require(!ec, ErrorKind::input, "cannot create directory: " + gt.string());
  write_f32_blob(gt / "dictionary.f32", data.dictionary);
  write_f32_blob(gt / "codes_train.f32", data.codes_train);
  write_f32_blob(gt / "codes_test.f32", data.codes_test);
  std::vector<std::uint32_t> erased(data.erased_atoms.begin(), data.erased_atoms.end());
  write_u32_blob(gt / "erased.u32", erased);

  ordered_json j;
  j["schema_version"] = 1;
  j["d"] = data.spec.d;
  j["n_atoms"] = data.spec.n_atoms;
  j["k_true"] = data.spec.k_true;
  j["n_train"] = data.spec.n_train;
  j["n_test"] = data.spec.n_test;
  j["noise_sigma"] = data.spec.noise_sigma;
  j["n_classes"] = data.spec.n_classes;
  j["drift"] = drift_kind_name(data.spec.drift.kind);
  j["erased_count"] = erased.size();
  j["seed"] = data.spec.seed;
  j["files"] = {{"dictionary", "dictionary.f32"},
                {"codes_train", "codes_train.f32"},
                {"codes_test", "codes_test.f32"},
                {"erased", "erased.u32"}};
  std::ofstream out(gt / "ground_truth.json", std::ios::trunc);
  require(out.good(), ErrorKind::input, "cannot write ground truth manifest");
  out << j.dump(2) << "\n";
}

}  // namespace cdrift
