#include "cdrift/metrics.hpp"

#include <algorithm>

namespace cdrift {

void ActivationTriple::validate() const {
  require(z_t.rows() == z_ts.rows() && z_t.rows() == z_translated.rows(),
          ErrorKind::input, "activation triple: row counts differ");
  require(z_t.latent_dim() == z_ts.latent_dim() &&
              z_t.latent_dim() == z_translated.latent_dim(),
          ErrorKind::input, "activation triple: latent dims differ");
  require(z_t.variant == LatentVariant::anchor &&
              z_ts.variant == LatentVariant::raw_after &&
              z_translated.variant == LatentVariant::translated,
          ErrorKind::input, "activation triple: unexpected variant tags");
}

std::string category_name(ConceptCategory c) {
  switch (c) {
    case ConceptCategory::retained: return "retained";
    case ConceptCategory::seemingly_deleted: return "seemingly_deleted";
    case ConceptCategory::recovered: return "recovered";
    case ConceptCategory::decodable: return "decodable";
    case ConceptCategory::lost: return "lost";
  }
  throw Error(ErrorKind::input, "bad concept category");
}

std::optional<double> deletion_ratio(const std::set<int>& active_t,
                                     const std::set<int>& active_ts) {
  if (active_t.empty()) return std::nullopt;
  std::int64_t deleted = 0;
  for (const int k : active_t) {
    if (!active_ts.contains(k)) ++deleted;
  }
  return static_cast<double>(deleted) / static_cast<double>(active_t.size());
}

std::optional<double> regained_count_ratio(const std::set<int>& deleted,
                                           const std::set<int>& active_translated) {
  if (deleted.empty()) return std::nullopt;
  std::int64_t regained = 0;
  for (const int k : deleted) {
    if (active_translated.contains(k)) ++regained;
  }
  return static_cast<double>(regained) / static_cast<double>(deleted.size());
}

std::optional<double> regained_activation_mass(const ActivationTriple& triple,
                                               const std::set<int>& deleted) {
  triple.validate();
  double loss_sum = 0.0;
  double recovery_sum = 0.0;
  for (const int k : deleted) {
    require(k >= 0 && k < triple.z_t.latent_dim(), ErrorKind::input,
            "regained_activation_mass: concept index out of range");
    for (Eigen::Index i = 0; i < triple.z_t.rows(); ++i) {
      const double loss = std::max(0.0, triple.z_t.data(i, k) - triple.z_ts.data(i, k));
      const double recovery = std::min(
          std::max(0.0, triple.z_translated.data(i, k) - triple.z_ts.data(i, k)), loss);
      loss_sum += loss;
      recovery_sum += recovery;
    }
  }
  if (loss_sum == 0.0) return std::nullopt;
  return recovery_sum / loss_sum;
}

std::vector<TaxonomyRecord> classify_taxonomy(
    const std::set<int>& active_t, const std::set<int>& active_ts,
    const std::set<int>& active_translated,
    const std::map<int, ConceptProbeScore>& decodability_scores,
    const std::map<int, std::string>& skipped) {
  std::vector<TaxonomyRecord> records;
  records.reserve(active_t.size());
  for (const int k : active_t) {
    TaxonomyRecord rec;
    rec.concept_index = k;
    if (active_ts.contains(k)) {
      rec.category = ConceptCategory::retained;
    } else if (active_translated.contains(k)) {
      rec.category = ConceptCategory::recovered;
    } else {
      const auto score = decodability_scores.find(k);
      if (score != decodability_scores.end()) {
        rec.decodability = score->second;
        rec.category = score->second.f1 > 0.0 ? ConceptCategory::decodable
                                              : ConceptCategory::lost;
      } else {
        const auto skip = skipped.find(k);
        require(skip != skipped.end(), ErrorKind::input,
                "classify_taxonomy: missing decodability score for concept " +
                    std::to_string(k));
        // A skipped probe means the anchor labels were constant; the concept
        // stays predictable by a constant readout, so it is not lost.
        rec.category = ConceptCategory::decodable;
        rec.skip_reason = skip->second;
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

double forgetting_delta(double acc_at_t, double acc_after) {
  const bool at_fraction = acc_at_t <= 1.0;
  const bool after_fraction = acc_after <= 1.0;
  require(at_fraction == after_fraction, ErrorKind::input,
          "forgetting_delta: operands appear to be on different scales");
  return acc_at_t - acc_after;
}

MetricsBundle compute_metrics_bundle(
    const ActiveConceptSet& active_t, const ActiveConceptSet& active_ts,
    const ActiveConceptSet& active_translated, const ActivationTriple& triple,
    const std::map<int, ConceptProbeScore>& decodability_scores,
    const std::map<int, std::string>& skipped) {
  const auto set_t = active_t.as_set();
  const auto set_ts = active_ts.as_set();
  const auto set_translated = active_translated.as_set();

  MetricsBundle bundle;
  bundle.active_count_t = static_cast<std::int64_t>(set_t.size());
  bundle.active_count_ts = static_cast<std::int64_t>(set_ts.size());
  bundle.active_count_translated = static_cast<std::int64_t>(set_translated.size());
  bundle.deletion_ratio = deletion_ratio(set_t, set_ts);
  if (bundle.deletion_ratio) bundle.retained_ratio = 1.0 - *bundle.deletion_ratio;

  std::set<int> deleted;
  for (const int k : set_t) {
    if (!set_ts.contains(k)) deleted.insert(k);
  }
  bundle.regained_count_ratio = regained_count_ratio(deleted, set_translated);
  bundle.regained_activation_mass = regained_activation_mass(triple, deleted);
  bundle.taxonomy =
      classify_taxonomy(set_t, set_ts, set_translated, decodability_scores, skipped);
  return bundle;
}

}  // namespace cdrift
