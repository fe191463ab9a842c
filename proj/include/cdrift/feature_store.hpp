// On-disk representation of feature dumps: a JSON manifest next to raw
// little-endian binary32 blobs, one directory per (task, checkpoint, split).
#pragma once

#include "cdrift/common.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cdrift {

inline constexpr int kFeatureSchemaVersion = 1;

enum class Split { train, test };

std::string split_name(Split s);
Split parse_split(const std::string& s);

struct FeatureManifest {
  int schema_version = kFeatureSchemaVersion;
  int task_id = 0;
  int checkpoint_id = 0;  // the s in t+s; 0 means at-task
  Split split = Split::train;
  std::int64_t n_samples = 0;
  std::int64_t dim = 0;
  std::int64_t label_count = 0;
  std::string blob_file = "features.f32";
  std::optional<std::string> labels_file;
  std::string seed_note;
};

struct FeatureMatrix {
  Mat data;  // n_samples x dim, row = sample
  std::optional<std::vector<std::uint32_t>> labels;
  FeatureManifest manifest;

  std::int64_t rows() const { return data.rows(); }
  std::int64_t cols() const { return data.cols(); }
};

// Builds a FeatureMatrix, filling manifest shape fields from the data and
// validating the type invariants (finite entries, label ranges).
FeatureMatrix make_feature_matrix(Mat data,
                                  std::optional<std::vector<std::uint32_t>> labels,
                                  int task_id, int checkpoint_id, Split split,
                                  std::int64_t label_count,
                                  std::string seed_note = "");

// Writes manifest.json, features.f32 and (if labels present) labels.u32 into
// dir. Returns the manifest path. A later load reproduces the matrix in its
// binary32 form bit-exactly.
std::filesystem::path save_features(const FeatureMatrix& matrix,
                                    const std::filesystem::path& dir);

FeatureMatrix load_features(const std::filesystem::path& manifest_path);

// Canonical layout helper: <root>/task<t>/ckpt<s>/<split>.
std::filesystem::path feature_dir(const std::filesystem::path& root, int task_id,
                                  int checkpoint_id, Split split);

// Two matrices whose rows describe the same samples in the same order.
struct PairedView {
  const FeatureMatrix* a = nullptr;
  const FeatureMatrix* b = nullptr;
};

// Validates that a and b cover the same task, split, sample count and labels.
// Validation is symmetric: (a,b) is accepted iff (b,a) is.
PairedView align_pair(const FeatureMatrix& a, const FeatureMatrix& b);

}  // namespace cdrift
