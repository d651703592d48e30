#include "resp/types.hpp"

namespace resp {

std::string_view disease_name(Disease d) {
  switch (d) {
    case Disease::Bronchiectasis: return "Bronchiectasis";
    case Disease::Bronchiolitis: return "Bronchiolitis";
    case Disease::COPD: return "COPD";
    case Disease::Healthy: return "Healthy";
    case Disease::Pneumonia: return "Pneumonia";
    case Disease::URTI: return "URTI";
    case Disease::Asthma: return "Asthma";
    case Disease::LRTI: return "LRTI";
  }
  return "";
}

std::optional<Disease> parse_disease(std::string_view name) {
  for (Disease d : kAllDiseases) {
    if (disease_name(d) == name) return d;
  }
  return std::nullopt;
}

}  // namespace resp
