#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "resp/types.hpp"

namespace resp {

struct RecordingMeta {
  int patient_id = 0;
  std::string recording_index;
  std::string chest_location;
  std::string acquisition_mode;
  std::string equipment;
  std::filesystem::path path;

  /// `<patient>_<recindex>_<location>_<mode>_<equipment>`, without extension.
  std::string stem() const;

  bool operator==(const RecordingMeta&) const = default;
};

struct CycleAnnotation {
  double start_s = 0.0;
  double end_s = 0.0;
  bool crackles = false;
  bool wheezes = false;

  double duration() const { return end_s - start_s; }
  bool operator==(const CycleAnnotation&) const = default;
};

class DiagnosisTable {
 public:
  /// Throws ConflictingDiagnosis when `patient_id` already maps to another label.
  void add(int patient_id, Disease disease);
  const Disease* find(int patient_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<int, Disease>& entries() const { return entries_; }

 private:
  std::map<int, Disease> entries_;
};

struct CorpusEntry {
  RecordingMeta meta;
  std::vector<CycleAnnotation> cycles;
};

struct CorpusScan {
  std::vector<CorpusEntry> entries;
  std::vector<std::string> warnings;  // recordings skipped for lack of a diagnosis
};

RecordingMeta parse_recording_filename(std::string_view name);
std::string compose_recording_filename(const RecordingMeta& meta);

std::vector<CycleAnnotation> parse_cycle_annotations(std::string_view text);
std::vector<CycleAnnotation> load_cycle_annotations(const std::filesystem::path& path);

DiagnosisTable parse_diagnosis_table(std::string_view text);
DiagnosisTable load_diagnosis_table(const std::filesystem::path& path);

/// Pairs every `.wav` under `root` (non-recursive) with its sibling `.txt`.
CorpusScan scan_corpus(const std::filesystem::path& root, const DiagnosisTable& diagnosis);

}  // namespace resp
