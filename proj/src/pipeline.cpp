#include "resp/pipeline.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "resp/emd.hpp"
#include "resp/error.hpp"
#include "resp/nn/network.hpp"
#include "resp/scalogram.hpp"
#include "resp/synth.hpp"
#include "resp/wav.hpp"
#include "text_util.hpp"

namespace resp::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kDiagnosisFile = "patient_diagnosis.csv";

// Runs fn(i) for i in [0, n) on up to `threads` workers. The exception of the
// lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::MissingCache, path.string() + " not found; run the earlier stage first");
  }
  try {
    return json::parse(detail::read_file(path.string()));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

void fresh_dir(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
}

Disease disease_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto d = parse_disease(name);
  if (!d) throw Error(ErrorKind::ParseError, "unknown label " + name);
  return *d;
}

json counts_to_json(const std::map<Disease, ClassCounts>& counts) {
  json j = json::object();
  for (const auto& [d, c] : counts) {
    j[std::string(disease_name(d))] = {
        {"recordings", c.recordings}, {"segments", c.segments}, {"patients", c.patients}};
  }
  return j;
}

std::map<Disease, ClassCounts> counts_from_json(const json& j) {
  std::map<Disease, ClassCounts> counts;
  for (const auto& [name, c] : j.items()) {
    auto& cc = counts[disease_from(json(name))];
    cc.recordings = c.at("recordings").get<int>();
    cc.segments = c.at("segments").get<int>();
    cc.patients = c.at("patients").get<int>();
  }
  return counts;
}

FilterBank make_bank(const RunConfig& cfg, std::size_t n) {
  FilterBank::Options o;
  o.gamma = cfg.cwt.gamma;
  o.time_bandwidth = cfg.cwt.time_bandwidth;
  o.voices_per_octave = cfg.cwt.voices_per_octave;
  return FilterBank(n, cfg.filter.target_fs, o);
}

emd::SiftOptions sift_options(const RunConfig& cfg) {
  emd::SiftOptions o;
  o.max_imfs = cfg.emd.max_imfs;
  o.sd_threshold = cfg.emd.sd_threshold;
  o.max_iterations = cfg.emd.max_iterations;
  return o;
}

SegmentKey key_of(const CycleSegment& s) {
  return {s.patient_id(), s.recording(), s.cycle_index(), s.disease()};
}

struct SegmentEntry {
  std::string id;
  fs::path file;
};

std::vector<SegmentEntry> segment_index(const RunConfig& cfg, json* index_out = nullptr) {
  const auto dir = cfg.out() / "segments";
  const json index = read_json(dir / "index.json");
  std::vector<SegmentEntry> out;
  for (const auto& e : index.at("segments")) {
    out.push_back({e.at("id").get<std::string>(), dir / e.at("file").get<std::string>()});
  }
  if (index_out) *index_out = index;
  return out;
}

nn::ImageSet images_for(const RunConfig& cfg, const std::vector<ImageRef>& refs) {
  return load_image_set(cfg.out(), refs, cfg.scheme, cfg.model.input_size);
}

}  // namespace

nn::ModelSpec model_spec(const RunConfig& cfg) {
  nn::ProposedOptions o;
  o.classes = class_count(cfg.scheme);
  o.fc_widths = cfg.model.fc_widths;
  o.dropout = cfg.model.dropout;
  o.conv_filters = cfg.model.conv_filters;
  o.input_size = cfg.model.input_size;
  return nn::build_proposed(o);
}

void write_segment(const fs::path& dir, const CycleSegment& seg) {
  std::string bytes;
  bytes.reserve(seg.samples().size() * 4);
  for (const double v : seg.samples()) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  write_text(dir / (seg.id() + ".f32"), bytes);
  write_json(dir / (seg.id() + ".json"), {{"fs", kTargetFs},
                                          {"patient", seg.patient_id()},
                                          {"label", disease_name(seg.disease())},
                                          {"recording", seg.recording()},
                                          {"cycle_index", seg.cycle_index()},
                                          {"samples", seg.samples().size()}});
}

CycleSegment read_segment(const fs::path& f32_path) {
  auto sidecar = f32_path;
  sidecar.replace_extension(".json");
  const json meta = read_json(sidecar);
  if (!fs::exists(f32_path)) throw Error(ErrorKind::MissingCache, f32_path.string() + " not found");
  const std::string bytes = detail::read_file(f32_path.string());
  try {
    const auto n = meta.at("samples").get<std::size_t>();
    if (bytes.size() != n * 4) {
      throw Error(ErrorKind::LengthMismatch, f32_path.string() + ": size disagrees with sidecar");
    }
    std::vector<double> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) {
        u |= std::uint32_t(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
      }
      samples[i] = std::bit_cast<float>(u);
    }
    return CycleSegment(std::move(samples), meta.at("patient").get<int>(),
                        disease_from(meta.at("label")), meta.at("recording").get<std::string>(),
                        meta.at("cycle_index").get<int>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, sidecar.string() + ": " + e.what());
  }
}

std::string table_one(const std::map<Disease, ClassCounts>& counts, bool with_images) {
  std::string out;
  const auto row = [&](const std::string& name, const std::string& a, const std::string& b,
                       const std::string& c, const std::string& d) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s", name.c_str(), a.c_str(), b.c_str(),
                  c.c_str());
    out += buf;
    if (with_images) {
      std::snprintf(buf, sizeof buf, " %12s", d.c_str());
      out += buf;
    }
    out += "\n";
  };
  row("Disease", "Recordings", "Segments", "Patients", "Images");
  ClassCounts total;
  for (const auto& [d, c] : counts) {
    row(std::string(disease_name(d)), std::to_string(c.recordings), std::to_string(c.segments),
        std::to_string(c.patients), std::to_string(c.images));
    total.recordings += c.recordings;
    total.segments += c.segments;
    total.patients += c.patients;
    total.images += c.images;
  }
  row("Total", std::to_string(total.recordings), std::to_string(total.segments),
      std::to_string(total.patients), std::to_string(total.images));
  return out;
}

nn::ImageSet load_image_set(const fs::path& out_dir, const std::vector<ImageRef>& refs,
                            Scheme scheme, std::size_t size) {
  nn::ImageSet set;
  set.channels = 3;
  set.height = set.width = size;
  set.pixels.resize(refs.size() * set.sample_size());
  set.labels.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const RgbImage img = read_png(out_dir / refs[i].path);
    std::uint8_t* dst = set.pixels.data() + i * set.sample_size();
    for (std::size_t ch = 0; ch < 3; ++ch) {
      Matrix plane(img.height, img.width);
      for (std::size_t p = 0; p < img.width * img.height; ++p) plane.data[p] = img.pixels[3 * p + ch];
      if (img.height != size || img.width != size) plane = resize_bilinear(plane, size, size);
      for (std::size_t p = 0; p < size * size; ++p) {
        dst[ch * size * size + p] =
            static_cast<std::uint8_t>(std::clamp(std::lround(plane.data[p]), 0L, 255L));
      }
    }
    set.labels.push_back(map_label(refs[i].disease, scheme));
  }
  return set;
}

SynthResult cmd_synth(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto root = cfg.corpus();
  fresh_dir(root);
  const auto recordings = synthesize(cfg.synth, cfg.seed);
  SynthResult result;
  result.root = root;
  std::string diagnosis;
  for (const auto& rec : recordings) {
    const auto stem = rec.meta.stem();
    write_wav16(root / (stem + ".wav"), rec.samples, static_cast<int>(std::lround(rec.fs)));
    std::string txt;
    for (const auto& c : rec.cycles) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f\t%.3f\t%d\t%d\n", c.start_s, c.end_s, int(c.crackles),
                    int(c.wheezes));
      txt += buf;
    }
    write_text(root / (stem + ".txt"), txt);
    diagnosis += std::to_string(rec.meta.patient_id) + "," + std::string(disease_name(rec.disease)) + "\n";
    result.cycles += static_cast<int>(rec.cycles.size());
    ++result.recordings;
  }
  write_text(root / kDiagnosisFile, diagnosis);
  log << "synth: " << result.recordings << " recordings, " << result.cycles << " cycles in "
      << root.string() << "\n";
  return result;
}

PreprocessResult cmd_preprocess(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto root = cfg.corpus();
  const auto table = load_diagnosis_table(root / kDiagnosisFile);
  const auto scan = scan_corpus(root, table);

  PreprocessOptions opts;
  opts.low_hz = cfg.filter.low_hz;
  opts.high_hz = cfg.filter.high_hz;
  opts.order = cfg.filter.order;
  opts.target_fs = cfg.filter.target_fs;

  struct Done {
    std::vector<CycleSegment> segments;
    SegmentationSummary summary;
  };
  std::vector<Done> done(scan.entries.size());
  parallel_for(scan.entries.size(), cfg.threads, [&](std::size_t i) {
    const auto& entry = scan.entries[i];
    const auto wav = read_wav(entry.meta.path);
    const Signal sig = preprocess_recording({wav.samples, wav.fs}, opts);
    const Disease d = *table.find(entry.meta.patient_id);
    done[i].segments = extract_segments(sig, entry.cycles, entry.meta, d, &done[i].summary);
  });

  const auto dir = cfg.out() / "segments";
  fresh_dir(dir);
  PreprocessResult result;
  result.warnings = scan.warnings;
  std::map<Disease, std::set<int>> patients;
  json list = json::array();
  for (std::size_t i = 0; i < done.size(); ++i) {
    const Disease d = *table.find(scan.entries[i].meta.patient_id);
    result.summary.kept += done[i].summary.kept;
    result.summary.dropped_short += done[i].summary.dropped_short;
    result.summary.dropped_excluded += done[i].summary.dropped_excluded;
    if (is_excluded(d)) continue;
    auto& cc = result.per_class[d];
    ++cc.recordings;
    patients[d].insert(scan.entries[i].meta.patient_id);
    for (const auto& seg : done[i].segments) {
      write_segment(dir, seg);
      ++cc.segments;
      list.push_back({{"id", seg.id()},
                      {"file", seg.id() + ".f32"},
                      {"patient", seg.patient_id()},
                      {"label", disease_name(seg.disease())}});
    }
  }
  for (auto& [d, cc] : result.per_class) cc.patients = static_cast<int>(patients[d].size());

  write_json(dir / "index.json",
             {{"fs", cfg.filter.target_fs},
              {"segments", list},
              {"classes", counts_to_json(result.per_class)},
              {"kept", result.summary.kept},
              {"dropped_short", result.summary.dropped_short},
              {"dropped_excluded", result.summary.dropped_excluded}});
  const auto table_text = table_one(result.per_class, false);
  write_text(dir / "summary.txt", table_text);
  for (const auto& w : result.warnings) log << "warning: " << w << "\n";
  log << table_text << "kept " << result.summary.kept << ", dropped " << result.summary.dropped_short
      << " short and " << result.summary.dropped_excluded << " excluded-class cycles\n";
  return result;
}

FeaturesResult cmd_features(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  json index;
  const auto entries = segment_index(cfg, &index);
  if (entries.empty()) throw Error(ErrorKind::EmptyManifest, "no segments to render");

  std::vector<SegmentKey> keys;
  std::vector<std::size_t> lengths;
  for (const auto& e : entries) {
    const auto seg = read_segment(e.file);
    keys.push_back(key_of(seg));
    lengths.push_back(seg.samples().size());
  }
  const auto plan = plan_augmentation(keys, cfg.seed);
  std::vector<std::vector<const VariantPlan*>> by_segment(entries.size());
  {
    std::size_t s = 0;
    for (const auto& p : plan) {
      while (p.key.id() != keys[s].id()) ++s;
      by_segment[s].push_back(&p);
    }
  }

  const auto dir = cfg.out() / "images";
  fresh_dir(dir);
  const FilterBank bank = make_bank(cfg, lengths.front());
  const bool hybrid = cfg.mode == ScalogramMode::Hybrid;
  std::vector<emd::Selection> selected(entries.size(), emd::Selection{0, 0.0});
  std::vector<std::size_t> n_imfs(entries.size(), 0);
  parallel_for(entries.size(), cfg.threads, [&](std::size_t i) {
    const auto seg = read_segment(entries[i].file);
    if (seg.samples().size() != bank.n()) {
      throw Error(ErrorKind::LengthMismatch, entries[i].id + " differs in length from the first segment");
    }
    Matrix norm;
    if (hybrid) {
      const auto imfs = emd::decompose(seg.samples(), sift_options(cfg));
      selected[i] = emd::select_max_correlated_imf(seg.samples(), imfs);
      n_imfs[i] = imfs.size();
      norm = render_scalogram(imfs.imfs[selected[i].index - 1], bank, kImageSize, cfg.cwt.floor_db);
    } else {
      norm = render_scalogram(seg.samples(), bank, kImageSize, cfg.cwt.floor_db);
    }
    for (const auto* p : by_segment[i]) {
      write_png(dir / p->filename(), apply_colormap(norm, colormap_table(p->colormap)));
    }
  });

  FeaturesResult result;
  result.per_class = counts_from_json(index.at("classes"));
  json images = json::array();
  for (const auto& p : plan) {
    images.push_back({{"path", "images/" + p.filename()},
                      {"patient", p.key.patient_id},
                      {"label", disease_name(p.key.disease)},
                      {"segment", p.key.id()},
                      {"variant", p.variant},
                      {"colormap", colormap_name(p.colormap)}});
    ++result.per_class[p.key.disease].images;
  }
  result.images = plan.size();
  write_json(dir / "manifest.json",
             {{"mode", mode_name(cfg.mode)}, {"seed", cfg.seed}, {"images", images}});
  if (hybrid) {
    json sel = json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      sel.push_back({{"segment", entries[i].id},
                     {"imf", selected[i].index},
                     {"coefficient", selected[i].coefficient},
                     {"n_imfs", n_imfs[i]}});
    }
    write_json(dir / "selected_imfs.json", {{"segments", sel}});
  }
  const auto table_text = table_one(result.per_class, true);
  write_text(dir / "summary.txt", table_text);
  log << "features (" << mode_name(cfg.mode) << "): " << result.images << " images\n" << table_text;
  return result;
}

SplitManifest cmd_split(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const json manifest = read_json(cfg.out() / "images" / "manifest.json");
  std::vector<ImageRef> refs;
  try {
    for (const auto& e : manifest.at("images")) {
      refs.push_back({e.at("path").get<std::string>(), e.at("patient").get<int>(), disease_from(e.at("label"))});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("image manifest: ") + e.what());
  }
  auto split = split_by_patient(refs, cfg.scheme, cfg.split.ratio, cfg.seed);
  write_json(cfg.out() / "split.json", to_json(split));
  for (const auto& w : split.warnings) log << "warning: " << w << "\n";
  log << "split: " << split.train.size() << " train, " << split.val.size() << " val images\n";
  return split;
}

nn::TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto split = split_from_json(read_json(cfg.out() / "split.json"));
  if (split.scheme != cfg.scheme) {
    throw Error(ErrorKind::Config, "split was made for scheme " + std::string(scheme_name(split.scheme)));
  }
  const auto train_set = images_for(cfg, split.train);
  const auto val_set = images_for(cfg, split.val);

  nn::Network net(model_spec(cfg), cfg.seed);
  nn::TrainConfig tc;
  tc.adam.lr = cfg.train.lr;
  tc.adam.beta1 = cfg.train.beta1;
  tc.adam.beta2 = cfg.train.beta2;
  tc.adam.eps = cfg.train.eps;
  tc.batch = cfg.train.batch;
  tc.epochs = cfg.train.epochs;
  tc.seed = cfg.seed;
  tc.stop_at_accuracy = cfg.train.stop_at_accuracy;

  std::string csv = "epoch,train_loss,val_loss,val_accuracy\n";
  const auto result = nn::train(net, train_set, val_set, tc, [&](const nn::EpochLog& e) {
    csv += std::to_string(e.epoch) + "," + fmt("%.10g", e.train_loss) + "," +
           fmt("%.10g", e.val_loss) + "," + fmt("%.10g", e.val_accuracy) + "\n";
    log << "epoch " << e.epoch << "  train_loss " << fmt("%.4f", e.train_loss) << "  val_loss "
        << fmt("%.4f", e.val_loss) << "  val_acc " << fmt("%.4f", e.val_accuracy) << "\n";
  });
  nn::save_checkpoint(cfg.out() / "model.ckpt", net);
  write_text(cfg.out() / "train_log.csv", csv);
  write_json(cfg.out() / "train_summary.json",
             {{"initial_loss", result.initial_loss},
              {"epochs_run", result.log.size()},
              {"final_val_accuracy", result.log.empty() ? 0.0 : result.log.back().val_accuracy},
              {"params", net.param_count()}});
  log << "initial loss " << fmt("%.4f", result.initial_loss) << "\n";
  return result;
}

MetricsReport cmd_eval(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto split = split_from_json(read_json(cfg.out() / "split.json"));
  const auto ckpt = cfg.out() / "model.ckpt";
  if (!fs::exists(ckpt)) throw Error(ErrorKind::MissingCache, ckpt.string() + " not found; run train first");
  auto net = nn::load_checkpoint(ckpt);
  if (net.spec().classes != class_count(split.scheme)) {
    throw Error(ErrorKind::ShapeMismatch, "checkpoint class count does not match the split scheme");
  }
  const auto val = load_image_set(cfg.out(), split.val, split.scheme, net.spec().input_height);
  const auto rep = nn::evaluate(net, val, static_cast<std::size_t>(healthy_index(split.scheme)),
                                class_names(split.scheme));
  write_json(cfg.out() / "report.json", to_json(rep));
  const auto text = format_table(rep);
  write_text(cfg.out() / "report.txt", text);
  log << text;
  return rep;
}

AnalyzeResult cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto spec = model_spec(cfg);
  AnalyzeResult r;
  r.layers = nn::infer_layers(spec);
  r.params = nn::count_params(spec);
  r.madd = nn::count_madd(spec);
  const nn::Network net(spec, cfg.seed);
  for (const auto* t : net.params()) r.params_enumerated += t->size();

  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-4s %-14s %-18s %12s %14s\n", "#", "layer", "output", "params", "madd");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-4s %-14s %-18s %12s %14s\n", "", "input",
                nn::shape_string(spec.input_shape()).c_str(), "", "");
  out += buf;
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    const auto& l = r.layers[i];
    std::snprintf(buf, sizeof buf, "%-4zu %-14s %-18s %12zu %14zu\n", i + 1, l.name.c_str(),
                  nn::shape_string(l.output).c_str(), l.params, l.madd);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "total params %zu (enumerated %zu), total madd %zu\n", r.params,
                r.params_enumerated, r.madd);
  out += buf;
  fs::create_directories(cfg.out());
  write_text(cfg.out() / "analysis.txt", out);
  log << out;
  if (r.params != r.params_enumerated) {
    throw Error(ErrorKind::ShapeMismatch, "parameter count formula disagrees with instantiated tensors");
  }
  return r;
}

EmdResult cmd_emd(const RunConfig& cfg, const fs::path& segment, std::ostream& log) {
  cfg.validate();
  const auto seg = read_segment(segment);
  const auto imfs = emd::decompose(seg.samples(), sift_options(cfg));
  const auto sel = emd::select_max_correlated_imf(seg.samples(), imfs);
  const auto dir = cfg.out() / "emd";
  fs::create_directories(dir);
  std::string bytes;
  for (const auto& imf : imfs.imfs) {
    for (const double v : imf) {
      const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
    }
  }
  write_text(dir / (seg.id() + ".imfs.f32"), bytes);
  write_json(dir / (seg.id() + ".imfs.json"), {{"segment", seg.id()},
                                               {"n_imfs", imfs.size()},
                                               {"samples", seg.samples().size()},
                                               {"selected_index", sel.index},
                                               {"coefficient", sel.coefficient}});
  log << seg.id() << ": " << imfs.size() << " IMFs, selected IMF " << sel.index << " (r = "
      << fmt("%.4f", sel.coefficient) << ")\n";
  return {imfs.size(), sel.index, sel.coefficient};
}

fs::path cmd_scalogram(const RunConfig& cfg, const fs::path& segment, Colormap colormap,
                       std::ostream& log) {
  cfg.validate();
  const auto seg = read_segment(segment);
  const auto bank = make_bank(cfg, seg.samples().size());
  Matrix norm;
  if (cfg.mode == ScalogramMode::Hybrid) {
    const auto imfs = emd::decompose(seg.samples(), sift_options(cfg));
    const auto sel = emd::select_max_correlated_imf(seg.samples(), imfs);
    norm = render_scalogram(imfs.imfs[sel.index - 1], bank, kImageSize, cfg.cwt.floor_db);
  } else {
    norm = render_scalogram(seg.samples(), bank, kImageSize, cfg.cwt.floor_db);
  }
  const auto dir = cfg.out() / "scalograms";
  fs::create_directories(dir);
  const auto path = dir / (seg.id() + "_" + std::string(mode_name(cfg.mode)) + "_" +
                           std::string(colormap_name(colormap)) + ".png");
  write_png(path, apply_colormap(norm, colormap_table(colormap)));
  log << "wrote " << path.string() << "\n";
  return path;
}

}  // namespace resp::pipeline
