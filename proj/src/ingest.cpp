#include "resp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resp/error.hpp"
#include "text_util.hpp"

namespace resp {

using detail::parse_number;
using detail::trim;

std::string detail::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string RecordingMeta::stem() const {
  return std::to_string(patient_id) + "_" + recording_index + "_" + chest_location + "_" +
         acquisition_mode + "_" + equipment;
}

void DiagnosisTable::add(int patient_id, Disease disease) {
  const auto [it, inserted] = entries_.emplace(patient_id, disease);
  if (!inserted && it->second != disease) {
    throw Error(ErrorKind::ConflictingDiagnosis,
                "patient " + std::to_string(patient_id) + " labelled both " +
                    std::string(disease_name(it->second)) + " and " +
                    std::string(disease_name(disease)));
  }
}

const Disease* DiagnosisTable::find(int patient_id) const {
  const auto it = entries_.find(patient_id);
  return it == entries_.end() ? nullptr : &it->second;
}

RecordingMeta parse_recording_filename(std::string_view name) {
  const std::string original(name);
  if (name.size() > 4 && name.substr(name.size() - 4) == ".wav") name.remove_suffix(4);
  const auto fields = detail::split_char(name, '_');
  if (fields.size() != 5) {
    throw Error(ErrorKind::MalformedName, "expected 5 underscore-separated fields: " + original);
  }
  for (const auto f : fields) {
    if (f.empty()) throw Error(ErrorKind::MalformedName, "empty field in " + original);
  }
  const auto patient = parse_number<int>(fields[0]);
  if (!patient || *patient <= 0) {
    throw Error(ErrorKind::MalformedName, "non-numeric patient id in " + original);
  }
  RecordingMeta meta;
  meta.patient_id = *patient;
  meta.recording_index = std::string(fields[1]);
  meta.chest_location = std::string(fields[2]);
  meta.acquisition_mode = std::string(fields[3]);
  meta.equipment = std::string(fields[4]);
  meta.path = original;
  return meta;
}

std::string compose_recording_filename(const RecordingMeta& meta) { return meta.stem() + ".wav"; }

std::vector<CycleAnnotation> parse_cycle_annotations(std::string_view text) {
  std::vector<CycleAnnotation> out;
  int line_no = 0;
  for (const auto line : detail::split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = detail::split_ws(line);
    const auto fail = [&](const std::string& why) {
      return Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != 4) throw fail("expected 4 fields");
    const auto start = parse_number<double>(f[0]);
    const auto end = parse_number<double>(f[1]);
    const auto crackles = parse_number<int>(f[2]);
    const auto wheezes = parse_number<int>(f[3]);
    if (!start || !end || !crackles || !wheezes) throw fail("non-numeric field");
    if (!std::isfinite(*start) || !std::isfinite(*end) || *start < 0) throw fail("bad time");
    if (*end <= *start) throw fail("end <= start");
    if ((*crackles != 0 && *crackles != 1) || (*wheezes != 0 && *wheezes != 1)) {
      throw fail("flags must be 0 or 1");
    }
    out.push_back({*start, *end, *crackles == 1, *wheezes == 1});
  }
  return out;
}

std::vector<CycleAnnotation> load_cycle_annotations(const std::filesystem::path& path) {
  return parse_cycle_annotations(detail::read_file(path.string()));
}

DiagnosisTable parse_diagnosis_table(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  DiagnosisTable table;
  bool first = true;
  int line_no = 0;
  for (const auto raw : detail::split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto f = detail::split_char(line, ',');
    const auto fail = [&](const std::string& why) {
      return Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != 2) throw fail("expected patient_id,disease");
    const auto id = parse_number<int>(trim(f[0]));
    if (!id) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw fail("non-numeric patient id");
    }
    first = false;
    if (*id <= 0) throw fail("patient id must be positive");
    const auto disease = parse_disease(trim(f[1]));
    if (!disease) throw fail("unknown disease '" + std::string(trim(f[1])) + "'");
    table.add(*id, *disease);
  }
  return table;
}

DiagnosisTable load_diagnosis_table(const std::filesystem::path& path) {
  return parse_diagnosis_table(detail::read_file(path.string()));
}

CorpusScan scan_corpus(const std::filesystem::path& root, const DiagnosisTable& diagnosis) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(ErrorKind::Io, "not a directory: " + root.string());
  std::vector<fs::path> wavs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
  }
  std::sort(wavs.begin(), wavs.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  CorpusScan scan;
  for (const auto& wav : wavs) {
    RecordingMeta meta = parse_recording_filename(wav.filename().string());
    meta.path = wav;
    auto txt = wav;
    txt.replace_extension(".txt");
    if (!fs::exists(txt)) {
      throw Error(ErrorKind::MissingAnnotation, "no annotation file for " + wav.string());
    }
    if (diagnosis.find(meta.patient_id) == nullptr) {
      scan.warnings.push_back("skipping " + wav.filename().string() + ": patient " +
                              std::to_string(meta.patient_id) + " has no diagnosis");
      continue;
    }
    scan.entries.push_back({std::move(meta), load_cycle_annotations(txt)});
  }
  return scan;
}

}  // namespace resp
