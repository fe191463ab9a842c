#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdrift/metrics.hpp"
#include "cdrift/rng.hpp"

using namespace cdrift;

namespace {

LatentMatrix latents(Mat data, LatentVariant v) {
  LatentMatrix z;
  z.data = std::move(data);
  z.variant = v;
  return z;
}

ActivationTriple triple_from(Mat z_t, Mat z_ts, Mat z_translated) {
  ActivationTriple t;
  t.z_t = latents(std::move(z_t), LatentVariant::anchor);
  t.z_ts = latents(std::move(z_ts), LatentVariant::raw_after);
  t.z_translated = latents(std::move(z_translated), LatentVariant::translated);
  return t;
}

}  // namespace

TEST_CASE("deletion ratio arithmetic") {
  CHECK(*deletion_ratio({1, 2, 3, 4}, {1, 2, 9}) == doctest::Approx(0.5));
  CHECK(*deletion_ratio({1, 2}, {1, 2}) == 0.0);
  CHECK(*deletion_ratio({1, 2}, {3, 4}) == 1.0);
  CHECK_FALSE(deletion_ratio({}, {1}).has_value());
}

TEST_CASE("regained count ratio arithmetic") {
  CHECK(*regained_count_ratio({3, 4}, {0, 3}) == doctest::Approx(0.5));
  CHECK_FALSE(regained_count_ratio({}, {1, 2}).has_value());
  CHECK(*regained_count_ratio({5}, {}) == 0.0);
}

TEST_CASE("regained activation mass follows the clipped formula") {
  SUBCASE("partial recovery 2 -> 0 -> 1 gives 0.5") {
    const auto t = triple_from(Mat::Constant(1, 1, 2.0), Mat::Zero(1, 1),
                               Mat::Constant(1, 1, 1.0));
    CHECK(*regained_activation_mass(t, {0}) == doctest::Approx(0.5));
  }
  SUBCASE("full recovery clips at the incurred loss") {
    Rng rng(1);
    Mat z_t(5, 3);
    for (Eigen::Index i = 0; i < z_t.size(); ++i) *(z_t.data() + i) = std::abs(rng.normal());
    const Mat z_ts = 0.25 * z_t;
    const auto t = triple_from(z_t, z_ts, z_t);
    CHECK(*regained_activation_mass(t, {0, 1, 2}) == doctest::Approx(1.0));
  }
  SUBCASE("no recovery when translation equals raw-after") {
    const auto t = triple_from(Mat::Constant(2, 2, 3.0), Mat::Constant(2, 2, 1.0),
                               Mat::Constant(2, 2, 1.0));
    CHECK(*regained_activation_mass(t, {0, 1}) == 0.0);
  }
  SUBCASE("overshoot does not count beyond the loss") {
    const auto t = triple_from(Mat::Constant(1, 1, 2.0), Mat::Zero(1, 1),
                               Mat::Constant(1, 1, 10.0));
    CHECK(*regained_activation_mass(t, {0}) == doctest::Approx(1.0));
  }
  SUBCASE("null when no loss was incurred") {
    const auto t = triple_from(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 2.0),
                               Mat::Constant(1, 1, 2.0));
    CHECK_FALSE(regained_activation_mass(t, {0}).has_value());
  }
  SUBCASE("mass stays in [0,1] on random triples") {
    Rng rng(2);
    for (int rep = 0; rep < 30; ++rep) {
      Mat a(4, 3), b(4, 3), c(4, 3);
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        *(a.data() + i) = std::abs(rng.normal());
        *(b.data() + i) = std::abs(rng.normal());
        *(c.data() + i) = std::abs(rng.normal());
      }
      const auto mass = regained_activation_mass(triple_from(a, b, c), {0, 2});
      if (mass) {
        CHECK(*mass >= 0.0);
        CHECK(*mass <= 1.0);
      }
    }
  }
}

TEST_CASE("taxonomy classification traces the definition") {
  std::map<int, ConceptProbeScore> scores;
  scores[2] = {2, 0.8, 0.3};
  const auto records = classify_taxonomy({0, 1, 2}, {0}, {0, 1}, scores);
  REQUIRE(records.size() == 3);
  CHECK(records[0].category == ConceptCategory::retained);
  CHECK(records[1].category == ConceptCategory::recovered);
  CHECK(records[2].category == ConceptCategory::decodable);
  REQUIRE(records[2].decodability.has_value());
  CHECK(records[2].decodability->f1 == 0.3);

  SUBCASE("zero F1 means lost") {
    scores[2] = {2, 0.5, 0.0};
    const auto lost = classify_taxonomy({0, 1, 2}, {0}, {0, 1}, scores);
    CHECK(lost[2].category == ConceptCategory::lost);
  }
  SUBCASE("missing score is an error unless skipped") {
    CHECK_THROWS_AS(classify_taxonomy({0, 1, 2}, {0}, {0, 1}, {}), Error);
    const auto skipped = classify_taxonomy({0, 1, 2}, {0}, {0, 1}, {},
                                           {{2, "single-class train labels"}});
    CHECK(skipped[2].category == ConceptCategory::decodable);
    CHECK(skipped[2].skip_reason.has_value());
  }
}

TEST_CASE("partition completeness on random instances") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::set<int> active_t, active_ts, active_tr;
    std::map<int, ConceptProbeScore> scores;
    for (int k = 0; k < 20; ++k) {
      if (rng.uniform() < 0.5) active_t.insert(k);
      if (rng.uniform() < 0.5) active_ts.insert(k);
      if (rng.uniform() < 0.5) active_tr.insert(k);
      scores[k] = {k, rng.uniform(), rng.uniform() < 0.3 ? 0.0 : rng.uniform()};
    }
    const auto records = classify_taxonomy(active_t, active_ts, active_tr, scores);
    CHECK(records.size() == active_t.size());
    std::int64_t retained = 0, recovered = 0, decodable = 0, lost = 0;
    for (const auto& r : records) {
      CHECK(active_t.contains(r.concept_index));
      switch (r.category) {
        case ConceptCategory::retained: ++retained; break;
        case ConceptCategory::recovered: ++recovered; break;
        case ConceptCategory::decodable: ++decodable; break;
        case ConceptCategory::lost: ++lost; break;
        case ConceptCategory::seemingly_deleted: break;
      }
      if (r.category == ConceptCategory::lost) {
        CHECK(r.decodability->f1 == 0.0);
      }
      if (r.category == ConceptCategory::decodable) {
        CHECK(r.decodability->f1 > 0.0);
      }
    }
    CHECK(retained + recovered + decodable + lost ==
          static_cast<std::int64_t>(records.size()));

    const auto del = deletion_ratio(active_t, active_ts);
    if (del) {
      CHECK(*del + (1.0 - *del) == 1.0);
      CHECK(retained == static_cast<std::int64_t>(
                            std::llround((1.0 - *del) * active_t.size())));
    }
  }
}

TEST_CASE("enlarging the translated set never lowers the regained count") {
  Rng rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    std::set<int> deleted, base;
    for (int k = 0; k < 15; ++k) {
      if (rng.uniform() < 0.5) deleted.insert(k);
      if (rng.uniform() < 0.4) base.insert(k);
    }
    if (deleted.empty()) continue;
    std::set<int> larger = base;
    larger.insert(static_cast<int>(rng.below(15)));
    CHECK(*regained_count_ratio(deleted, larger) >=
          *regained_count_ratio(deleted, base));
  }
}

TEST_CASE("forgetting delta matches the reported task-accuracy drops") {
  CHECK(forgetting_delta(93.30, 66.94) == doctest::Approx(26.36));
  CHECK(forgetting_delta(91.36, 90.82) == doctest::Approx(0.54));
  CHECK(forgetting_delta(0.75, 0.75) == 0.0);
  CHECK_THROWS_AS(forgetting_delta(0.9, 30.0), Error);
}

TEST_CASE("metrics bundle ties the pieces together consistently") {
  Mat z_t(4, 3), z_ts(4, 3), z_tr(4, 3);
  z_t << 1, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 0;
  z_ts << 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0;
  z_tr << 1, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0, 0;
  const auto triple = triple_from(z_t, z_ts, z_tr);

  ActiveConceptSet a_t, a_ts, a_tr;
  a_t.indices = {0, 1};
  a_t.variant = LatentVariant::anchor;
  a_ts.indices = {0};
  a_ts.variant = LatentVariant::raw_after;
  a_tr.indices = {0, 1};
  a_tr.variant = LatentVariant::translated;

  const auto bundle = compute_metrics_bundle(a_t, a_ts, a_tr, triple, {});
  CHECK(bundle.active_count_t == 2);
  CHECK(bundle.active_count_ts == 1);
  CHECK(bundle.active_count_translated == 2);
  CHECK(*bundle.deletion_ratio == doctest::Approx(0.5));
  CHECK(*bundle.retained_ratio == doctest::Approx(0.5));
  CHECK(*bundle.regained_count_ratio == 1.0);
  REQUIRE(bundle.regained_activation_mass.has_value());
  // Concept 1 lost activation on rows 0,1 (1 each); translation restored it.
  CHECK(*bundle.regained_activation_mass == doctest::Approx(1.0));
  REQUIRE(bundle.taxonomy.size() == 2);
  CHECK(bundle.taxonomy[0].category == ConceptCategory::retained);
  CHECK(bundle.taxonomy[1].category == ConceptCategory::recovered);
}
