#include "cdrift/monosemanticity.hpp"

#include "cdrift/rng.hpp"

#include <algorithm>

namespace cdrift {

namespace {

// Gathers (weight, unit embedding) for each activating sample of a neuron.
// perm maps sample index to embedding row; empty means identity.
struct ActivatingSet {
  std::vector<double> weights;
  Mat units;  // one unit-norm embedding per row
};

ActivatingSet gather(const LatentMatrix& z, const Mat& embeddings, int neuron,
                     const std::vector<std::size_t>& perm) {
  require(neuron >= 0 && neuron < z.latent_dim(), ErrorKind::input,
          "monosemanticity: neuron index out of range");
  require(z.rows() == embeddings.rows(), ErrorKind::input,
          "monosemanticity: embeddings not aligned with latents");
  if (!perm.empty()) {
    require(perm.size() == static_cast<std::size_t>(z.rows()), ErrorKind::input,
            "monosemanticity: permutation size mismatch");
  }
  ActivatingSet s;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double w = z.data(i, neuron);
    if (w <= 0.0) continue;
    const auto e_row = perm.empty() ? i : static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]);
    const double norm = embeddings.row(e_row).norm();
    if (norm == 0.0) continue;  // zero-norm embeddings carry no direction
    s.weights.push_back(w);
    rows.push_back(e_row);
  }
  s.units = Mat(static_cast<Eigen::Index>(rows.size()), embeddings.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s.units.row(static_cast<Eigen::Index>(r)) =
        embeddings.row(rows[r]) / embeddings.row(rows[r]).norm();
  }
  return s;
}

double ms_from_set(const ActivatingSet& s) {
  require(s.weights.size() >= 2, ErrorKind::input,
          "monosemanticity: fewer than 2 activating samples");
  // sum_{i != j} w_i w_j cos_ij = ||sum_i w_i u_i||^2 - sum_i w_i^2, and the
  // weight normalizer is (sum w)^2 - sum w^2.
  Vec acc = Vec::Zero(s.units.cols());
  double w_sum = 0.0;
  double w_sq_sum = 0.0;
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    acc += s.weights[i] * s.units.row(static_cast<Eigen::Index>(i)).transpose();
    w_sum += s.weights[i];
    w_sq_sum += s.weights[i] * s.weights[i];
  }
  const double numerator = acc.squaredNorm() - w_sq_sum;
  const double denominator = w_sum * w_sum - w_sq_sum;
  require(denominator > 0.0, ErrorKind::numeric, "monosemanticity: all-zero weights");
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

}  // namespace

double monosemanticity_score(const LatentMatrix& z, const Mat& embeddings,
                             int neuron) {
  return ms_from_set(gather(z, embeddings, neuron, {}));
}

double monosemanticity_score_permuted(const LatentMatrix& z, const Mat& embeddings,
                                      int neuron,
                                      const std::vector<std::size_t>& perm) {
  return ms_from_set(gather(z, embeddings, neuron, perm));
}

MsResult permutation_baseline(const LatentMatrix& z, const Mat& embeddings,
                              const std::vector<int>& neurons, std::uint64_t seed) {
  MsResult result;
  result.neurons = neurons;
  result.permutation_seed = seed;
  Rng rng(seed);
  const auto perm = rng.permutation(static_cast<std::size_t>(z.rows()));
  result.per_concept_ms.reserve(neurons.size());
  result.baseline_ms.reserve(neurons.size());
  for (const int k : neurons) {
    result.per_concept_ms.push_back(monosemanticity_score(z, embeddings, k));
    result.baseline_ms.push_back(monosemanticity_score_permuted(z, embeddings, k, perm));
  }
  return result;
}

bool ms_evaluable(const LatentMatrix& z, const Mat& embeddings, int neuron) {
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (z.data(i, neuron) > 0.0 && embeddings.row(i).norm() > 0.0) ++count;
    if (count >= 2) return true;
  }
  return false;
}

}  // namespace cdrift
