#include "resp/metrics.hpp"

#include <cstdio>
#include <numeric>

#include "resp/error.hpp"

namespace resp {

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, std::size_t n,
                          std::vector<std::string> class_names) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorKind::LengthMismatch, "truth and prediction lengths differ");
  }
  ConfusionMatrix cm{n, std::vector<std::size_t>(n * n, 0), std::move(class_names)};
  if (cm.class_names.empty()) {
    for (std::size_t i = 0; i < n; ++i) cm.class_names.push_back("class" + std::to_string(i));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = pred[i];
    if (t < 0 || p < 0 || std::size_t(t) >= n || std::size_t(p) >= n) {
      throw Error(ErrorKind::LabelOutOfRange, "label outside [0, " + std::to_string(n) + ")");
    }
    ++cm.counts[std::size_t(t) * n + std::size_t(p)];
  }
  return cm;
}

MetricsReport report(const ConfusionMatrix& cm, std::size_t healthy_index) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  if (healthy_index >= cm.n) throw Error(ErrorKind::LabelOutOfRange, "healthy index out of range");

  const std::size_t n = cm.n;
  MetricsReport r;
  r.cm = cm;
  r.healthy_index = healthy_index;
  r.precision.assign(n, 0.0);
  r.recall.assign(n, 0.0);
  r.f1.assign(n, 0.0);
  r.support.assign(n, 0);

  std::size_t trace = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < n; ++j) {
      row += cm.at(i, j);
      col += cm.at(j, i);
    }
    const double tp = double(cm.at(i, i));
    trace += cm.at(i, i);
    r.support[i] = row;
    r.recall[i] = row ? tp / double(row) : 0.0;
    r.precision[i] = col ? tp / double(col) : 0.0;
    const double s = r.precision[i] + r.recall[i];
    r.f1[i] = s > 0 ? 2.0 * r.precision[i] * r.recall[i] / s : 0.0;
  }
  r.accuracy = double(trace) / double(total);

  double weighted = 0.0, abnormal_hits = 0.0;
  std::size_t abnormal_support = 0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += double(r.support[i]) * r.recall[i];
    r.macro_precision += r.precision[i] / double(n);
    r.macro_recall += r.recall[i] / double(n);
    r.macro_f1 += r.f1[i] / double(n);
    if (i != healthy_index) {
      abnormal_hits += double(r.support[i]) * r.recall[i];
      abnormal_support += r.support[i];
    }
  }
  r.weighted_accuracy = weighted / double(total);
  r.specificity = r.recall[healthy_index];
  r.sensitivity = abnormal_support ? abnormal_hits / double(abnormal_support) : 0.0;
  r.icbhi_score = 0.5 * (r.sensitivity + r.specificity);
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t i = 0; i < r.cm.n; ++i) {
    per_class.push_back({{"name", r.cm.class_names[i]},
                         {"precision", r.precision[i]},
                         {"recall", r.recall[i]},
                         {"f1", r.f1[i]},
                         {"support", r.support[i]}});
  }
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t i = 0; i < r.cm.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < r.cm.n; ++j) row.push_back(r.cm.at(i, j));
    matrix.push_back(row);
  }
  return {{"accuracy", r.accuracy},
          {"weighted_accuracy", r.weighted_accuracy},
          {"macro_precision", r.macro_precision},
          {"macro_recall", r.macro_recall},
          {"macro_f1", r.macro_f1},
          {"sensitivity", r.sensitivity},
          {"specificity", r.specificity},
          {"icbhi_score", r.icbhi_score},
          {"healthy_index", r.healthy_index},
          {"total", r.cm.total()},
          {"classes", per_class},
          {"confusion_matrix", matrix}};
}

std::string format_table(const MetricsReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1",
                "support");
  out += line;
  for (std::size_t i = 0; i < r.cm.n; ++i) {
    std::snprintf(line, sizeof line, "%-16s %9.4f %9.4f %9.4f %8zu\n", r.cm.class_names[i].c_str(),
                  r.precision[i], r.recall[i], r.f1[i], r.support[i]);
    out += line;
  }
  std::snprintf(line, sizeof line,
                "\naccuracy %.4f  weighted accuracy %.4f\nsensitivity %.4f  specificity %.4f  "
                "ICBHI score %.4f\n",
                r.accuracy, r.weighted_accuracy, r.sensitivity, r.specificity, r.icbhi_score);
  out += line;
  out += "\nconfusion matrix (rows: truth, cols: prediction)\n";
  for (std::size_t i = 0; i < r.cm.n; ++i) {
    std::snprintf(line, sizeof line, "%-16s", r.cm.class_names[i].c_str());
    out += line;
    for (std::size_t j = 0; j < r.cm.n; ++j) {
      std::snprintf(line, sizeof line, " %6zu", r.cm.at(i, j));
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace resp
