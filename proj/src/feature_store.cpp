#include "cdrift/feature_store.hpp"

#include "cdrift/io_blob.hpp"

#include <json.hpp>

#include <fstream>

namespace cdrift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw Error(ErrorKind::schema, "unknown split: " + s);
}

namespace {

void validate_matrix(const FeatureMatrix& m) {
  require(m.data.rows() > 0 && m.data.cols() > 0, ErrorKind::input,
          "feature matrix must be non-empty");
  require(all_finite(m.data), ErrorKind::input,
          "feature matrix contains non-finite entries");
  require(m.manifest.n_samples == m.data.rows() && m.manifest.dim == m.data.cols(),
          ErrorKind::input, "manifest shape does not match data");
  if (m.labels) {
    require(static_cast<std::int64_t>(m.labels->size()) == m.data.rows(),
            ErrorKind::input, "label vector length does not match sample count");
    for (const auto v : *m.labels) {
      require(v < static_cast<std::uint64_t>(m.manifest.label_count),
              ErrorKind::input,
              "label " + std::to_string(v) + " out of range [0, " +
                  std::to_string(m.manifest.label_count) + ")");
    }
  }
}

}  // namespace

FeatureMatrix make_feature_matrix(Mat data,
                                  std::optional<std::vector<std::uint32_t>> labels,
                                  int task_id, int checkpoint_id, Split split,
                                  std::int64_t label_count, std::string seed_note) {
  FeatureMatrix m;
  m.manifest.task_id = task_id;
  m.manifest.checkpoint_id = checkpoint_id;
  m.manifest.split = split;
  m.manifest.n_samples = data.rows();
  m.manifest.dim = data.cols();
  m.manifest.label_count = label_count;
  m.manifest.seed_note = std::move(seed_note);
  if (labels) m.manifest.labels_file = "labels.u32";
  m.data = std::move(data);
  m.labels = std::move(labels);
  validate_matrix(m);
  return m;
}

std::filesystem::path save_features(const FeatureMatrix& matrix,
                                    const std::filesystem::path& dir) {
  validate_matrix(matrix);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::input, "cannot create directory: " + dir.string());

  write_f32_blob(dir / matrix.manifest.blob_file, matrix.data);
  if (matrix.labels) {
    require(matrix.manifest.labels_file.has_value(), ErrorKind::input,
            "labels present but manifest names no labels file");
    write_u32_blob(dir / *matrix.manifest.labels_file, *matrix.labels);
  }

  ordered_json j;
  j["schema_version"] = matrix.manifest.schema_version;
  j["task_id"] = matrix.manifest.task_id;
  j["checkpoint_id"] = matrix.manifest.checkpoint_id;
  j["split"] = split_name(matrix.manifest.split);
  j["n_samples"] = matrix.manifest.n_samples;
  j["dim"] = matrix.manifest.dim;
  j["label_count"] = matrix.manifest.label_count;
  j["blob_file"] = matrix.manifest.blob_file;
  if (matrix.manifest.labels_file) {
    j["labels_file"] = *matrix.manifest.labels_file;
  }
  j["seed_note"] = matrix.manifest.seed_note;

  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::trunc);
  require(out.good(), ErrorKind::input,
          "cannot write manifest: " + manifest_path.string());
  out << j.dump(2) << "\n";
  require(out.good(), ErrorKind::input,
          "manifest write failed: " + manifest_path.string());
  return manifest_path;
}

FeatureMatrix load_features(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  require(in.good(), ErrorKind::input,
          "missing manifest: " + manifest_path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema,
                "manifest parse error in " + manifest_path.string() + ": " + e.what());
  }

  FeatureMatrix m;
  try {
    m.manifest.schema_version = j.at("schema_version").get<int>();
    require(m.manifest.schema_version == kFeatureSchemaVersion, ErrorKind::schema,
            "unknown schema_version " + std::to_string(m.manifest.schema_version) +
                " in " + manifest_path.string());
    m.manifest.task_id = j.at("task_id").get<int>();
    m.manifest.checkpoint_id = j.at("checkpoint_id").get<int>();
    m.manifest.split = parse_split(j.at("split").get<std::string>());
    m.manifest.n_samples = j.at("n_samples").get<std::int64_t>();
    m.manifest.dim = j.at("dim").get<std::int64_t>();
    m.manifest.label_count = j.at("label_count").get<std::int64_t>();
    m.manifest.blob_file = j.at("blob_file").get<std::string>();
    if (j.contains("labels_file") && !j["labels_file"].is_null()) {
      m.manifest.labels_file = j["labels_file"].get<std::string>();
    }
    m.manifest.seed_note = j.value("seed_note", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema,
                "manifest field error in " + manifest_path.string() + ": " + e.what());
  }
  require(m.manifest.task_id >= 0 && m.manifest.checkpoint_id >= 0 &&
              m.manifest.n_samples > 0 && m.manifest.dim > 0 &&
              m.manifest.label_count >= 0,
          ErrorKind::schema, "manifest range violation in " + manifest_path.string());

  const fs::path dir = manifest_path.parent_path();
  m.data = read_f32_blob(dir / m.manifest.blob_file, m.manifest.n_samples,
                         m.manifest.dim);
  require(all_finite(m.data), ErrorKind::input,
          "blob contains non-finite entries: " + (dir / m.manifest.blob_file).string());
  if (m.manifest.labels_file) {
    m.labels = read_u32_blob(dir / *m.manifest.labels_file, m.manifest.n_samples);
  }
  validate_matrix(m);
  return m;
}

std::filesystem::path feature_dir(const std::filesystem::path& root, int task_id,
                                  int checkpoint_id, Split split) {
  return root / ("task" + std::to_string(task_id)) /
         ("ckpt" + std::to_string(checkpoint_id)) / split_name(split);
}

PairedView align_pair(const FeatureMatrix& a, const FeatureMatrix& b) {
  require(a.manifest.task_id == b.manifest.task_id, ErrorKind::input,
          "align_pair: task_id mismatch");
  require(a.manifest.split == b.manifest.split, ErrorKind::input,
          "align_pair: split mismatch");
  require(a.rows() == b.rows(), ErrorKind::input,
          "align_pair: sample count mismatch");
  require(a.labels.has_value() == b.labels.has_value(), ErrorKind::input,
          "align_pair: one side has labels, the other does not");
  if (a.labels) {
    require(*a.labels == *b.labels, ErrorKind::input,
            "align_pair: label vectors differ");
  }
  return PairedView{&a, &b};
}

}  // namespace cdrift
