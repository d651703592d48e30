#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace resp {

/// Diagnosis labels of the ICBHI 2017 corpus.
enum class Disease {
  Bronchiectasis,
  Bronchiolitis,
  COPD,
  Healthy,
  Pneumonia,
  URTI,
  Asthma,
  LRTI,
};

inline constexpr std::array<Disease, 8> kAllDiseases = {
    Disease::Bronchiectasis, Disease::Bronchiolitis, Disease::COPD, Disease::Healthy,
    Disease::Pneumonia,      Disease::URTI,          Disease::Asthma, Disease::LRTI};

/// The six classes that survive segmentation, in label order.
inline constexpr std::array<Disease, 6> kRetainedDiseases = {
    Disease::Bronchiectasis, Disease::Bronchiolitis, Disease::COPD,
    Disease::Healthy,        Disease::Pneumonia,     Disease::URTI};

std::string_view disease_name(Disease d);
std::optional<Disease> parse_disease(std::string_view name);

/// Asthma and LRTI are loaded but dropped after segmentation.
inline bool is_excluded(Disease d) { return d == Disease::Asthma || d == Disease::LRTI; }

}  // namespace resp
