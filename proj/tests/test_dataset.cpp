#include "doctest.h"

#include <map>
#include <random>
#include <set>
#include <vector>

#include "resp/dataset.hpp"
#include "resp/error.hpp"
#include "oracles.hpp"

using namespace resp;

using namespace oracle;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("label mapping") {
  CHECK(map_label(Disease::COPD, Scheme::Chronic3) == 1);
  CHECK(map_label(Disease::Bronchiectasis, Scheme::Chronic3) == 1);
  CHECK(map_label(Disease::Healthy, Scheme::Chronic3) == 0);
  for (const Disease d : {Disease::URTI, Disease::Pneumonia, Disease::Bronchiolitis}) {
    CHECK(map_label(d, Scheme::Chronic3) == 2);
  }
  CHECK(class_names(Scheme::Chronic3)[1] == "Chronic");
  for (std::size_t i = 0; i < kRetainedDiseases.size(); ++i) {
    CHECK(map_label(kRetainedDiseases[i], Scheme::Pathological6) == int(i));
    CHECK(class_names(Scheme::Pathological6)[i] == disease_name(kRetainedDiseases[i]));
  }
  CHECK(kind_of([] { map_label(Disease::Asthma, Scheme::Chronic3); }) == ErrorKind::ExcludedClass);
  CHECK(kind_of([] { map_label(Disease::LRTI, Scheme::Pathological6); }) == ErrorKind::ExcludedClass);
  CHECK(healthy_index(Scheme::Pathological6) == 3);
  CHECK(healthy_index(Scheme::Chronic3) == 0);
  CHECK(parse_scheme("chronic3") == Scheme::Chronic3);
  CHECK(kind_of([] { parse_scheme("nine"); }) == ErrorKind::Config);
}

TEST_CASE("patient split on randomized manifests") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    const auto refs = random_manifest(rng, 5, 20);
    const auto split = split_by_patient(refs, Scheme::Pathological6, 0.8, std::uint64_t(trial));
    CHECK(split.train.size() + split.val.size() == refs.size());
    const auto tp = patients_of(split.train), vp = patients_of(split.val);
    for (int p : vp) CHECK(tp.count(p) == 0);

    std::map<Disease, std::pair<int, int>> counts;
    for (const auto& r : split.train) ++counts[r.disease].first;
    for (const auto& r : split.val) ++counts[r.disease].second;
    for (const auto& [d, c] : counts) {
      std::map<int, int> sizes;
      for (const auto& r : refs) {
        if (r.disease == d) ++sizes[r.patient_id];
      }
      std::vector<int> counts_by_patient;
      for (const auto& [pid, n] : sizes) counts_by_patient.push_back(n);
      const double best = closest_reachable_gap(counts_by_patient, 0.2);
      const int total = c.first + c.second;
      CHECK(std::abs(c.second - 0.2 * total) == doctest::Approx(best));
      // The band is checked where some patient-disjoint split reaches it.
      if (best <= 0.05 * total) {
        const double frac = double(c.second) / double(total);
        CHECK(frac >= 0.15);
        CHECK(frac <= 0.25);
      }
    }
  }
}

TEST_CASE("ten patients of ten images split 80/20") {
  std::vector<ImageRef> refs;
  for (int c = 0; c < 6; ++c) {
    for (int p = 0; p < 10; ++p) {
      for (int i = 0; i < 10; ++i) refs.push_back({"x", 100 * c + p + 1, kRetainedDiseases[c]});
    }
  }
  const auto split = split_by_patient(refs, Scheme::Pathological6, 0.8, 1);
  std::map<Disease, int> val;
  for (const auto& r : split.val) ++val[r.disease];
  for (const Disease d : kRetainedDiseases) CHECK(val[d] == 20);
}

TEST_CASE("split edge cases") {
  const std::vector<ImageRef> single = {{"a", 1, Disease::COPD}, {"b", 1, Disease::COPD},
                                        {"c", 2, Disease::Healthy}, {"d", 3, Disease::Healthy}};
  const auto split = split_by_patient(single, Scheme::Pathological6, 0.8, 0);
  CHECK(patients_of(split.train).count(1) == 1);
  CHECK(patients_of(split.val).count(1) == 0);
  CHECK(split.warnings.size() == 1);
  // Two patients of a class always land on both sides.
  CHECK(patients_of(split.train).count(2) + patients_of(split.train).count(3) == 1);

  CHECK(kind_of([] { split_by_patient({}, Scheme::Pathological6, 0.8, 0); }) == ErrorKind::EmptyManifest);

  std::mt19937_64 rng(7);
  const auto refs = random_manifest(rng, 5, 9);
  const auto a = split_by_patient(refs, Scheme::Chronic3, 0.8, 99);
  const auto b = split_by_patient(refs, Scheme::Chronic3, 0.8, 99);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);

  const auto back = split_from_json(to_json(a));
  CHECK(back.train == a.train);
  CHECK(back.val == a.val);
  CHECK(back.seed == 99);
  CHECK(back.scheme == Scheme::Chronic3);
  CHECK(back.ratio == 0.8);
}

TEST_CASE("balanced batches") {
  std::mt19937_64 rng(5);
  std::vector<int> labels6, labels3;
  for (int i = 0; i < 300; ++i) labels6.push_back(i < 200 ? 2 : int(rng() % 6));
  for (int c = 0; c < 6; ++c) labels6.push_back(c);
  for (int i = 0; i < 100; ++i) labels3.push_back(int(rng() % 3));

  const BalancedBatcher b6(labels6, 6, 6, 11);
  for (const auto& batch : b6.epoch(0)) {
    REQUIRE(batch.size() == 6);
    std::vector<int> seen(6, 0);
    for (auto i : batch) ++seen[std::size_t(labels6[i])];
    for (int s : seen) CHECK(s == 1);
  }
  const BalancedBatcher b3(labels3, 3, 6, 11);
  for (const auto& batch : b3.epoch(4)) {
    std::vector<int> seen(3, 0);
    for (auto i : batch) ++seen[std::size_t(labels3[i])];
    for (int s : seen) CHECK(s == 2);
  }
  CHECK(kind_of([&] { BalancedBatcher(labels6, 6, 7, 0); }) == ErrorKind::IndivisibleBatch);
  CHECK(kind_of([&] { BalancedBatcher({0, 1, 7}, 6, 6, 0); }) == ErrorKind::LabelOutOfRange);
}

TEST_CASE("epoch schedule") {
  // Class sizes 2, 4, 6, 8, 10, 40: median 7, per_class 1 -> 6 * 7 batches.
  std::vector<int> labels;
  const int sizes[6] = {2, 4, 6, 8, 10, 40};
  for (int c = 0; c < 6; ++c) labels.insert(labels.end(), std::size_t(sizes[c]), c);
  const BalancedBatcher b(labels, 6, 6, 3);
  CHECK(b.per_class() == 1);
  CHECK(b.batches_per_epoch() == 42);

  const auto e0 = b.epoch(0);
  CHECK(e0 == b.epoch(0));
  CHECK(e0 != b.epoch(1));
  std::vector<int> draws(6, 0);
  std::map<std::size_t, int> uses;
  for (const auto& batch : e0) {
    for (auto i : batch) {
      ++draws[std::size_t(labels[i])];
      ++uses[i];
    }
  }
  const auto [lo, hi] = std::minmax_element(draws.begin(), draws.end());
  CHECK(*hi - *lo <= 6);
  // Small classes are cycled evenly; the large one is not repeated.
  for (std::size_t i = 0; i < 2; ++i) CHECK(uses[i] == 21);
  for (std::size_t i = 30; i < 70; ++i) CHECK(uses[i] <= 2);

  const BalancedBatcher c3(std::vector<int>{0, 0, 0, 0, 1, 1, 2, 2, 2}, 3, 6, 0);
  CHECK(c3.per_class() == 2);
  CHECK(c3.batches_per_epoch() == 3 * 2);
}
