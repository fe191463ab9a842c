// Deletion / retention / recovery statistics and the five-way taxonomy of
// concept outcomes after continual training.
#pragma once

#include "cdrift/common.hpp"
#include "cdrift/concept_space.hpp"
#include "cdrift/probes.hpp"
#include "cdrift/sae.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cdrift {

// The three encodings of the same aligned test rows: at-task, after further
// training, and after linear translation, all under the anchored mu.
struct ActivationTriple {
  LatentMatrix z_t;
  LatentMatrix z_ts;
  LatentMatrix z_translated;

  void validate() const;
};

enum class ConceptCategory { retained, seemingly_deleted, recovered, decodable, lost };

std::string category_name(ConceptCategory c);

struct TaxonomyRecord {
  int concept_index = 0;
  ConceptCategory category = ConceptCategory::retained;
  std::optional<ConceptProbeScore> decodability;
  std::optional<std::string> skip_reason;
};

struct MetricsBundle {
  std::int64_t active_count_t = 0;
  std::int64_t active_count_ts = 0;
  std::int64_t active_count_translated = 0;
  std::optional<double> deletion_ratio;
  std::optional<double> retained_ratio;
  std::optional<double> regained_count_ratio;
  std::optional<double> regained_activation_mass;
  std::vector<TaxonomyRecord> taxonomy;
};

// |active_t \ active_ts| / |active_t|; null when active_t is empty.
std::optional<double> deletion_ratio(const std::set<int>& active_t,
                                     const std::set<int>& active_ts);

// |deleted intersect active_translated| / |deleted|; null when deleted is empty.
std::optional<double> regained_count_ratio(const std::set<int>& deleted,
                                           const std::set<int>& active_translated);

// Clipped recovery of activation magnitude over deleted concepts:
//   loss = max(0, z_t - z_ts), recovery = min(max(0, z_T - z_ts), loss),
//   mass = sum(recovery) / sum(loss); null when no loss was incurred.
std::optional<double> regained_activation_mass(const ActivationTriple& triple,
                                               const std::set<int>& deleted);

// Assigns every anchor-active concept to exactly one category. Concepts in
// deleted-minus-recovered need a decodability score or a recorded skip.
std::vector<TaxonomyRecord> classify_taxonomy(
    const std::set<int>& active_t, const std::set<int>& active_ts,
    const std::set<int>& active_translated,
    const std::map<int, ConceptProbeScore>& decodability_scores,
    const std::map<int, std::string>& skipped = {});

// acc_at_t - acc_after; both operands must be on the same scale.
double forgetting_delta(double acc_at_t, double acc_after);

MetricsBundle compute_metrics_bundle(
    const ActiveConceptSet& active_t, const ActiveConceptSet& active_ts,
    const ActiveConceptSet& active_translated, const ActivationTriple& triple,
    const std::map<int, ConceptProbeScore>& decodability_scores,
    const std::map<int, std::string>& skipped = {});

}  // namespace cdrift
