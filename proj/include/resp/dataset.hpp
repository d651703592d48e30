#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "resp/types.hpp"

namespace resp {

enum class Scheme { Pathological6, Chronic3 };

std::string_view scheme_name(Scheme s);  // "pathological6" / "chronic3"
Scheme parse_scheme(std::string_view name);
std::size_t class_count(Scheme s);
const std::vector<std::string>& class_names(Scheme s);

/// Throws ExcludedClass for Asthma and LRTI.
int map_label(Disease disease, Scheme scheme);
/// Index of the Healthy class under the scheme.
int healthy_index(Scheme scheme);

struct ImageRef {
  std::string path;
  int patient_id = 0;
  Disease disease = Disease::Healthy;

  bool operator==(const ImageRef&) const = default;
};

struct SplitManifest {
  std::vector<ImageRef> train;
  std::vector<ImageRef> val;
  std::uint64_t seed = 0;
  double ratio = 0.8;
  Scheme scheme = Scheme::Pathological6;
  std::vector<std::string> warnings;
};

/// Whole patients go to one side. Per class, validation gets the patient subset
/// whose image count is closest to its target share; the seed orders patients
/// and so picks among equally close subsets. A class with >= 2 patients always
/// ends up on both sides.
SplitManifest split_by_patient(const std::vector<ImageRef>& images, Scheme scheme,
                               double ratio, std::uint64_t seed);

nlohmann::json to_json(const SplitManifest& m);
SplitManifest split_from_json(const nlohmann::json& j);

/// Per epoch every class contributes batch/n_classes samples to each of
/// n_classes * ceil(median class size / (batch/n_classes)) batches. Classes
/// smaller than the epoch's draw are cycled through fresh shuffles; larger
/// ones are subsampled.
class BalancedBatcher {
 public:
  BalancedBatcher(std::vector<int> labels, std::size_t n_classes, std::size_t batch,
                  std::uint64_t seed);

  std::size_t batches_per_epoch() const { return batches_per_epoch_; }
  std::size_t per_class() const { return per_class_; }
  /// Sample indices, one vector per batch; deterministic in (seed, epoch).
  std::vector<std::vector<std::size_t>> epoch(std::uint64_t epoch_index) const;

 private:
  std::vector<std::vector<std::size_t>> by_class_;
  std::size_t batch_;
  std::size_t per_class_;
  std::size_t batches_per_epoch_;
  std::uint64_t seed_;
};

}  // namespace resp
