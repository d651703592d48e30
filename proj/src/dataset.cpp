#include "resp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "resp/error.hpp"
#include "rng.hpp"

namespace resp {

std::string_view scheme_name(Scheme s) {
  return s == Scheme::Pathological6 ? "pathological6" : "chronic3";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "pathological6") return Scheme::Pathological6;
  if (name == "chronic3") return Scheme::Chronic3;
  throw Error(ErrorKind::Config, "unknown scheme '" + std::string(name) + "'");
}

std::size_t class_count(Scheme s) { return class_names(s).size(); }

const std::vector<std::string>& class_names(Scheme s) {
  static const std::vector<std::string> pathological = {"Bronchiectasis", "Bronchiolitis", "COPD",
                                                        "Healthy",        "Pneumonia",     "URTI"};
  static const std::vector<std::string> chronic = {"Healthy", "Chronic", "NonChronic"};
  return s == Scheme::Pathological6 ? pathological : chronic;
}

int map_label(Disease disease, Scheme scheme) {
  if (is_excluded(disease)) {
    throw Error(ErrorKind::ExcludedClass, std::string(disease_name(disease)) + " is not classified");
  }
  if (scheme == Scheme::Pathological6) {
    const auto it = std::find(kRetainedDiseases.begin(), kRetainedDiseases.end(), disease);
    return static_cast<int>(it - kRetainedDiseases.begin());
  }
  switch (disease) {
    case Disease::Healthy: return 0;
    case Disease::COPD:
    case Disease::Bronchiectasis: return 1;
    default: return 2;
  }
}

int healthy_index(Scheme scheme) { return map_label(Disease::Healthy, scheme); }

SplitManifest split_by_patient(const std::vector<ImageRef>& images, Scheme scheme, double ratio,
                               std::uint64_t seed) {
  if (images.empty()) throw Error(ErrorKind::EmptyManifest, "no images to split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::Config, "split ratio must be in (0, 1)");

  struct Patient {
    int id;
    std::size_t images;
  };
  std::map<int, std::size_t> per_patient;
  std::map<int, int> patient_class;
  for (const auto& img : images) {
    ++per_patient[img.patient_id];
    patient_class[img.patient_id] = map_label(img.disease, scheme);
  }
  std::map<int, std::vector<Patient>> by_class;
  for (const auto& [id, count] : per_patient) by_class[patient_class[id]].push_back({id, count});

  SplitManifest out;
  out.seed = seed;
  out.ratio = ratio;
  out.scheme = scheme;
  std::set<int> val_patients;
  const auto& names = class_names(scheme);
  for (auto& [cls, patients] : by_class) {
    std::mt19937_64 rng(detail::derive_seed(seed, static_cast<std::uint64_t>(cls)));
    detail::shuffle(patients, rng);

    // Exact subset sum over image counts: the validation side is the patient
    // subset whose total lies closest to the target share. Each reachable sum
    // remembers the first patient (in shuffled order) that reached it.
    std::size_t total = 0;
    for (const auto& p : patients) total += p.images;
    const double val_target = (1.0 - ratio) * double(total);
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> first(total + 1, kNone);
    first[0] = patients.size();
    for (std::size_t i = 0; i < patients.size(); ++i) {
      for (std::size_t sum = total; sum >= patients[i].images; --sum) {
        if (first[sum] == kNone && first[sum - patients[i].images] != kNone) first[sum] = i;
      }
    }
    // Both sides get at least one patient whenever the class has two.
    const bool both = patients.size() >= 2;
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t sum = 0; sum <= total; ++sum) {
      if (first[sum] == kNone || (both && (sum == 0 || sum == total))) continue;
      const double gap = std::abs(double(sum) - val_target);
      if (gap < best) {
        best = gap;
        pick = sum;
      }
    }
    std::vector<Patient> val_side;
    for (std::size_t sum = pick; sum > 0; sum -= patients[first[sum]].images) {
      val_side.push_back(patients[first[sum]]);
    }
    if (patients.size() < 2) {
      out.warnings.push_back("class " + names[static_cast<std::size_t>(cls)] +
                             " has a single patient; it is absent from validation");
    }
    for (const auto& p : val_side) val_patients.insert(p.id);
  }

  for (const auto& img : images) {
    (val_patients.count(img.patient_id) ? out.val : out.train).push_back(img);
  }
  return out;
}

nlohmann::json to_json(const SplitManifest& m) {
  const auto side = [](const std::vector<ImageRef>& refs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : refs) {
      arr.push_back({{"path", r.path}, {"patient", r.patient_id}, {"label", disease_name(r.disease)}});
    }
    return arr;
  };
  return {{"seed", m.seed},
          {"ratio", m.ratio},
          {"scheme", scheme_name(m.scheme)},
          {"train", side(m.train)},
          {"val", side(m.val)}};
}

SplitManifest split_from_json(const nlohmann::json& j) {
  const auto side = [](const nlohmann::json& arr) {
    std::vector<ImageRef> refs;
    for (const auto& e : arr) {
      const auto label = e.at("label").get<std::string>();
      const auto d = parse_disease(label);
      if (!d) throw Error(ErrorKind::ParseError, "unknown label " + label);
      refs.push_back({e.at("path").get<std::string>(), e.at("patient").get<int>(), *d});
    }
    return refs;
  };
  try {
    SplitManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.ratio = j.at("ratio").get<double>();
    m.scheme = parse_scheme(j.at("scheme").get<std::string>());
    m.train = side(j.at("train"));
    m.val = side(j.at("val"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("split manifest: ") + e.what());
  }
}

BalancedBatcher::BalancedBatcher(std::vector<int> labels, std::size_t n_classes, std::size_t batch,
                                 std::uint64_t seed)
    : by_class_(n_classes), batch_(batch), seed_(seed) {
  if (n_classes == 0 || batch == 0 || batch % n_classes != 0) {
    throw Error(ErrorKind::IndivisibleBatch, "batch " + std::to_string(batch) +
                                                 " is not a multiple of " +
                                                 std::to_string(n_classes) + " classes");
  }
  per_class_ = batch / n_classes;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= n_classes) {
      throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(l));
    }
    by_class_[static_cast<std::size_t>(l)].push_back(i);
  }
  std::vector<std::size_t> sizes;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (by_class_[c].empty()) {
      throw Error(ErrorKind::EmptyManifest, "class " + std::to_string(c) + " has no samples");
    }
    sizes.push_back(by_class_[c].size());
  }
  std::sort(sizes.begin(), sizes.end());
  const std::size_t mid = sizes.size() / 2;
  const double median = sizes.size() % 2 ? double(sizes[mid]) : 0.5 * double(sizes[mid - 1] + sizes[mid]);
  batches_per_epoch_ = n_classes * static_cast<std::size_t>(std::ceil(median / double(per_class_)));
}

std::vector<std::vector<std::size_t>> BalancedBatcher::epoch(std::uint64_t epoch_index) const {
  std::mt19937_64 rng(detail::derive_seed(seed_, epoch_index));
  const std::size_t draws = batches_per_epoch_ * per_class_;
  std::vector<std::vector<std::size_t>> picks(by_class_.size());
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    auto& p = picks[c];
    while (p.size() < draws) {
      auto pool = by_class_[c];
      detail::shuffle(pool, rng);
      const std::size_t take = std::min(pool.size(), draws - p.size());
      p.insert(p.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    }
  }
  std::vector<std::vector<std::size_t>> batches(batches_per_epoch_);
  for (std::size_t b = 0; b < batches_per_epoch_; ++b) {
    batches[b].reserve(batch_);
    for (std::size_t c = 0; c < picks.size(); ++c) {
      for (std::size_t k = 0; k < per_class_; ++k) batches[b].push_back(picks[c][b * per_class_ + k]);
    }
  }
  return batches;
}

}  // namespace resp
