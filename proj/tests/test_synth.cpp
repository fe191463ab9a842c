#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdrift/synth.hpp"

#include <filesystem>

using namespace cdrift;

namespace {

SynthSpec base_spec() {
  SynthSpec spec;
  spec.d = 16;
  spec.n_atoms = 8;
  spec.k_true = 3;
  spec.n_train = 300;
  spec.n_test = 100;
  spec.noise_sigma = 0.01;
  spec.n_classes = 4;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST_CASE("identity drift copies the anchor matrices bitwise") {
  auto spec = base_spec();
  spec.drift.kind = DriftKind::identity;
  const auto data = generate(spec);
  CHECK((data.drifted_test.data.array() == data.anchor_test.data.array()).all());
  CHECK((data.drifted_train.data.array() == data.anchor_train.data.array()).all());
}

TEST_CASE("rotation drift preserves row norms to 1e-10") {
  auto spec = base_spec();
  spec.drift.kind = DriftKind::rotation;
  const auto data = generate(spec);
  for (Eigen::Index i = 0; i < data.anchor_test.rows(); ++i) {
    CHECK(std::abs(data.anchor_test.data.row(i).norm() -
                   data.drifted_test.data.row(i).norm()) < 1e-10);
  }
}

TEST_CASE("erasure removes all correlation with the erased atom direction") {
  auto spec = base_spec();
  spec.noise_sigma = 0.0;
  spec.drift.kind = DriftKind::erasure;
  spec.drift.erased_atoms = {2, 5};
  const auto data = generate(spec);
  for (const int atom : {2, 5}) {
    const Vec dir = data.dictionary.col(atom);
    const Vec proj = data.drifted_train.data * dir;
    CHECK(proj.cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("surviving atoms keep signal") {
    const Vec proj = data.drifted_train.data * data.dictionary.col(0);
    CHECK(proj.cwiseAbs().maxCoeff() > 0.1);
  }
}

TEST_CASE("generation is deterministic given the seed") {
  auto spec = base_spec();
  spec.drift.kind = DriftKind::affine;
  spec.drift.bias_norm = 0.5;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK((a.anchor_train.data.array() == b.anchor_train.data.array()).all());
  CHECK((a.drifted_test.data.array() == b.drifted_test.data.array()).all());
  CHECK((a.dictionary.array() == b.dictionary.array()).all());
  CHECK(*a.anchor_train.labels == *b.anchor_train.labels);
}

TEST_CASE("anchor and drifted matrices carry identical labels") {
  auto spec = base_spec();
  spec.drift.kind = DriftKind::nonlinear;
  const auto data = generate(spec);
  CHECK(*data.anchor_train.labels == *data.drifted_train.labels);
  CHECK(*data.anchor_test.labels == *data.drifted_test.labels);
}

TEST_CASE("labels follow the dominant atom's class group") {
  auto spec = base_spec();
  spec.noise_sigma = 0.0;
  const auto data = generate(spec);
  const int group_size = spec.n_atoms / spec.n_classes;
  for (Eigen::Index i = 0; i < data.codes_train.rows(); ++i) {
    Eigen::Index dominant = 0;
    data.codes_train.row(i).maxCoeff(&dominant);
    CHECK((*data.anchor_train.labels)[static_cast<std::size_t>(i)] ==
          static_cast<std::uint32_t>(dominant / group_size));
  }
}

TEST_CASE("codes have exactly k_true active atoms with magnitudes in range") {
  const auto data = generate(base_spec());
  for (Eigen::Index i = 0; i < data.codes_train.rows(); ++i) {
    int active = 0;
    for (Eigen::Index a = 0; a < data.codes_train.cols(); ++a) {
      const double v = data.codes_train(i, a);
      if (v != 0.0) {
        ++active;
        CHECK(v >= 0.5);
        CHECK(v <= 1.5);
      }
    }
    CHECK(active == 3);
  }
}

TEST_CASE("noiseless identity features match the code expansion exactly") {
  auto spec = base_spec();
  spec.noise_sigma = 0.0;
  const auto data = generate(spec);
  const Mat expected = data.codes_train * data.dictionary.transpose();
  CHECK((data.anchor_train.data - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oracle expectations match the drift family") {
  auto spec = base_spec();
  spec.drift.kind = DriftKind::identity;
  CHECK(oracle_expectations(spec).expected_deletion_ratio == 0.0);
  spec.drift.kind = DriftKind::rotation;
  const auto rot = oracle_expectations(spec);
  CHECK(rot.min_regained_count_ratio == 0.9);
  CHECK(rot.min_regained_activation_mass == 0.8);
  spec.drift.kind = DriftKind::affine;
  CHECK(oracle_expectations(spec).min_regained_count_ratio == 0.9);
  spec.drift.kind = DriftKind::erasure;
  CHECK(oracle_expectations(spec).max_erased_concept_f1 == 0.2);
}

TEST_CASE("match_atoms pairs decoder columns with their atoms") {
  const auto data = generate(base_spec());
  // A decoder that copies atoms (with one scaled column and one noise column).
  Mat w_dec(16, 3);
  w_dec.col(0) = data.dictionary.col(4);
  w_dec.col(1) = 2.5 * data.dictionary.col(1);
  w_dec.col(2) = Vec::Ones(16);
  const auto matches = match_atoms(w_dec, data.dictionary, 0.7);
  REQUIRE(matches.size() == 3);
  CHECK(matches[0] == 4);
  CHECK(matches[1] == 1);
  CHECK_FALSE(matches[2].has_value());
}

TEST_CASE("cluster embeddings concentrate around the dominant atom") {
  const auto data = generate(base_spec());
  const Mat e = cluster_embeddings(data.dictionary, data.codes_test, 0.05, 123);
  REQUIRE(e.rows() == data.codes_test.rows());
  for (Eigen::Index i = 0; i < 20; ++i) {
    Eigen::Index dominant = 0;
    data.codes_test.row(i).maxCoeff(&dominant);
    const double cos = e.row(i).dot(data.dictionary.col(dominant).transpose()) /
                       e.row(i).norm();
    CHECK(cos > 0.9);
  }
}

TEST_CASE("write_synth_layout produces loadable feature dirs and ground truth") {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "cdrift_synth_layout";
  fs::remove_all(root);
  auto spec = base_spec();
  spec.drift.kind = DriftKind::rotation;
  const auto data = generate(spec);
  write_synth_layout(data, root, 1);

  const auto anchor = load_features(feature_dir(root, 0, 0, Split::train) / "manifest.json");
  CHECK(anchor.rows() == spec.n_train);
  const auto drifted = load_features(feature_dir(root, 0, 1, Split::test) / "manifest.json");
  CHECK(drifted.manifest.checkpoint_id == 1);
  CHECK(fs::exists(root / "ground_truth" / "dictionary.f32"));
  CHECK(fs::exists(root / "ground_truth" / "ground_truth.json"));
}
