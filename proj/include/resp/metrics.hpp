#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace resp {

struct ConfusionMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> counts;  // rows: truth, cols: prediction
  std::vector<std::string> class_names;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * n + pred]; }
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, std::size_t n,
                          std::vector<std::string> class_names = {});

struct MetricsReport {
  double accuracy = 0.0;
  double weighted_accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::size_t> support;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double icbhi_score = 0.0;
  std::size_t healthy_index = 0;
  ConfusionMatrix cm;
};

/// Specificity is the Healthy recall; sensitivity is the support-weighted
/// recall over every other class.
MetricsReport report(const ConfusionMatrix& cm, std::size_t healthy_index);

nlohmann::json to_json(const MetricsReport& r);
std::string format_table(const MetricsReport& r);

}  // namespace resp
