#include "cdrift/concept_space.hpp"

#include <algorithm>
#include <numeric>

namespace cdrift {

AnchorStats compute_anchor_stats(const LatentMatrix& z_train) {
  require(z_train.rows() > 0, ErrorKind::input,
          "compute_anchor_stats: empty latent matrix");
  AnchorStats stats;
  stats.mu = z_train.data.colwise().mean();
  stats.task_id = z_train.source_task;
  return stats;
}

BinMat binarize(const LatentMatrix& z, const AnchorStats& stats) {
  require(z.latent_dim() == stats.mu.size(), ErrorKind::input,
          "binarize: latent dim does not match anchor stats");
  BinMat a(z.rows(), z.latent_dim());
  for (Eigen::Index i = 0; i < z.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.data.cols(); ++j) {
      a(i, j) = z.data(i, j) > stats.mu(j) ? 1 : 0;
    }
  }
  return a;
}

ActiveConceptSet active_concepts(const BinMat& binary, double tau,
                                 LatentVariant variant) {
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::input, "tau must be in [0, 1]");
  require(binary.rows() > 0, ErrorKind::input, "active_concepts: empty matrix");
  ActiveConceptSet set;
  set.tau = tau;
  set.variant = variant;
  set.frequencies = Vec(binary.cols());
  const double n = static_cast<double>(binary.rows());
  for (Eigen::Index j = 0; j < binary.cols(); ++j) {
    std::int64_t count = 0;
    for (Eigen::Index i = 0; i < binary.rows(); ++i) count += binary(i, j);
    set.frequencies(j) = static_cast<double>(count) / n;
    if (set.frequencies(j) >= tau) set.indices.push_back(static_cast<int>(j));
  }
  return set;
}

FeatureMatrix ablate_inactive(const FeatureMatrix& h, const SaeModel& model,
                              const ActiveConceptSet& active) {
  const Mat z = encode_mat(model, h.data, EncodeMode::inference);
  Mat z_masked = z;
  for (Eigen::Index j = 0; j < z_masked.cols(); ++j) {
    if (!active.contains(static_cast<int>(j))) z_masked.col(j).setZero();
  }
  FeatureMatrix out = h;
  out.data = h.data + decode(model, z_masked) - decode(model, z);
  return out;
}

std::vector<std::int64_t> top_activating(const LatentMatrix& z, int neuron, int m) {
  require(neuron >= 0 && neuron < z.latent_dim(), ErrorKind::input,
          "top_activating: neuron index out of range");
  require(m >= 0 && m <= z.rows(), ErrorKind::input,
          "top_activating: m exceeds sample count");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(z.rows()));
  std::iota(idx.begin(), idx.end(), std::int64_t{0});
  const auto& col = z.data.col(neuron);
  std::stable_sort(idx.begin(), idx.end(), [&col](std::int64_t a, std::int64_t b) {
    if (col(a) != col(b)) return col(a) > col(b);
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

}  // namespace cdrift
