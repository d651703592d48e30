#include "resp/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>

#include "colormap_assets.hpp"
#include "resp/error.hpp"
#include "text_util.hpp"

namespace resp {
namespace {

std::string_view embedded_csv(Colormap c) {
  switch (c) {
    case Colormap::Parula: return assets::kParulaCsv;
    case Colormap::HSV: return assets::kHsvCsv;
    case Colormap::Jet: return assets::kJetCsv;
    case Colormap::Hot: return assets::kHotCsv;
  }
  return {};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

struct AxisMap {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<double> w;
};

// Corner-aligned sample positions of `out` points over `in` source points.
AxisMap axis_map(std::size_t in, std::size_t out) {
  AxisMap m;
  m.lo.resize(out);
  m.hi.resize(out);
  m.w.resize(out);
  for (std::size_t i = 0; i < out; ++i) {
    const double pos = out == 1 ? 0.0 : double(i) * double(in - 1) / double(out - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), in - 1);
    m.lo[i] = lo;
    m.hi[i] = std::min(lo + 1, in - 1);
    m.w[i] = pos - double(lo);
  }
  return m;
}

double db_value(double p, double peak, double floor_db) {
  if (peak <= 0.0) return 0.0;
  const double v = std::clamp(10.0 * std::log10(p / peak), floor_db, 0.0);
  return (v - floor_db) / (0.0 - floor_db);
}

double lerp(double a, double b, double w) { return a + (b - a) * w; }

}  // namespace

std::string_view colormap_name(Colormap c) {
  switch (c) {
    case Colormap::Parula: return "parula";
    case Colormap::HSV: return "hsv";
    case Colormap::Jet: return "jet";
    case Colormap::Hot: return "hot";
  }
  return "";
}

std::optional<Colormap> parse_colormap(std::string_view name) {
  for (Colormap c : kAllColormaps) {
    if (colormap_name(c) == name) return c;
  }
  return std::nullopt;
}

ColormapTable parse_colormap_csv(std::string_view text) {
  ColormapTable table{};
  std::size_t row = 0;
  for (const auto raw : detail::split_lines(text)) {
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto f = detail::split_char(line, ',');
    if (row >= 256 || f.size() != 3) {
      throw Error(ErrorKind::ParseError, "colormap needs 256 rows of r,g,b");
    }
    std::uint8_t ch[3];
    for (int c = 0; c < 3; ++c) {
      const auto v = detail::parse_number<int>(detail::trim(f[c]));
      if (!v || *v < 0 || *v > 255) throw Error(ErrorKind::ParseError, "channel outside [0,255]");
      ch[c] = static_cast<std::uint8_t>(*v);
    }
    table.entries[row++] = {ch[0], ch[1], ch[2]};
  }
  if (row != 256) throw Error(ErrorKind::ParseError, "colormap has " + std::to_string(row) + " rows");
  return table;
}

ColormapTable load_colormap(Colormap c, const std::filesystem::path& asset_dir) {
  const auto path = asset_dir / (std::string(colormap_name(c)) + ".csv");
  return parse_colormap_csv(detail::read_file(path.string()));
}

const ColormapTable& colormap_table(Colormap c) {
  static std::mutex mutex;
  static std::map<Colormap, ColormapTable> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(c);
  if (it == cache.end()) {
    const char* dir = std::getenv("RESP_SCALOGRAM_ASSETS");
    ColormapTable t = (dir && *dir) ? load_colormap(c, dir) : parse_colormap_csv(embedded_csv(c));
    it = cache.emplace(c, t).first;
  }
  return it->second;
}

Matrix to_db(const Matrix& power, double floor_db) {
  double peak = 0.0;
  for (double p : power.data) peak = std::max(peak, p);
  Matrix out(power.rows, power.cols);
  for (std::size_t i = 0; i < power.data.size(); ++i) out.data[i] = db_value(power.data[i], peak, floor_db);
  return out;
}

RgbImage apply_colormap(const Matrix& norm, const ColormapTable& table) {
  RgbImage img{norm.cols, norm.rows, {}};
  img.pixels.resize(norm.rows * norm.cols * 3);
  for (std::size_t i = 0; i < norm.data.size(); ++i) {
    const long idx = std::clamp(std::lround(norm.data[i] * 255.0), 0L, 255L);
    const Rgb c = table.entries[static_cast<std::size_t>(idx)];
    img.pixels[3 * i] = c.r;
    img.pixels[3 * i + 1] = c.g;
    img.pixels[3 * i + 2] = c.b;
  }
  return img;
}

Matrix resize_bilinear(const Matrix& src, std::size_t rows, std::size_t cols) {
  if (src.rows < 2 || src.cols < 2) throw Error(ErrorKind::TooSmall, "resize needs at least 2x2");
  if (src.rows == rows && src.cols == cols) return src;
  const AxisMap mx = axis_map(src.cols, cols);
  const AxisMap my = axis_map(src.rows, rows);
  Matrix horiz(src.rows, cols);
  for (std::size_t r = 0; r < src.rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) horiz(r, c) = lerp(src(r, mx.lo[c]), src(r, mx.hi[c]), mx.w[c]);
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = lerp(horiz(my.lo[r], c), horiz(my.hi[r], c), my.w[r]);
  }
  return out;
}

Matrix scalogram_matrix(const Scalogram& s) {
  Matrix m(s.n_scales, s.n_samples);
  m.data = s.power;
  return m;
}

Matrix render_scalogram(std::span<const double> x, const FilterBank& bank, std::size_t size,
                        double floor_db) {
  const std::size_t rows = bank.n_scales();
  const std::size_t n = bank.n();
  if (rows < 2) throw Error(ErrorKind::TooSmall, "need at least 2 scales");

  // Keep only the columns the horizontal pass reads.
  const AxisMap mx = axis_map(n, size);
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < size; ++c) {
    cols.push_back(mx.lo[c]);
    cols.push_back(mx.hi[c]);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  std::vector<std::size_t> slot(n, 0);
  for (std::size_t i = 0; i < cols.size(); ++i) slot[cols[i]] = i;

  CwtEngine engine(bank);
  engine.load(x);
  std::vector<double> row(n);
  Matrix kept(rows, cols.size());
  double peak = 0.0;
  for (std::size_t j = 0; j < rows; ++j) {
    engine.power_row(j, row);
    for (double p : row) peak = std::max(peak, p);
    for (std::size_t i = 0; i < cols.size(); ++i) kept(j, i) = row[cols[i]];
  }
  for (double& v : kept.data) v = db_value(v, peak, floor_db);

  if (rows == size && n == size) return kept;
  Matrix horiz(rows, size);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < size; ++c) {
      horiz(r, c) = lerp(kept(r, slot[mx.lo[c]]), kept(r, slot[mx.hi[c]]), mx.w[c]);
    }
  }
  const AxisMap my = axis_map(rows, size);
  Matrix out(size, size);
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c < size; ++c) out(r, c) = lerp(horiz(my.lo[r], c), horiz(my.hi[r], c), my.w[r]);
  }
  return out;
}

std::string SegmentKey::id() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", cycle_index);
  return recording + "_" + buf;
}

std::string VariantPlan::filename() const {
  // The recording stem minus its patient prefix, with '-' so fields stay underscore-delimited.
  std::string rec = key.recording;
  const std::string prefix = std::to_string(key.patient_id) + "_";
  if (rec.rfind(prefix, 0) == 0) rec.erase(0, prefix.size());
  std::replace(rec.begin(), rec.end(), '_', '-');
  char cycle[16];
  std::snprintf(cycle, sizeof cycle, "%03d", key.cycle_index);
  return std::to_string(key.patient_id) + "_" + rec + "_" + cycle + "_" + std::to_string(variant) +
         "_" + std::string(colormap_name(colormap)) + ".png";
}

Colormap draw_colormap(std::uint64_t seed, std::string_view segment_id) {
  const std::uint64_t h = splitmix64(seed ^ splitmix64(fnv1a(segment_id)));
  return kAllColormaps[h % kAllColormaps.size()];
}

std::vector<VariantPlan> plan_augmentation(std::span<const SegmentKey> segments, std::uint64_t seed,
                                           std::span<const Disease> majority) {
  std::vector<VariantPlan> plan;
  for (const auto& key : segments) {
    const bool is_majority = std::find(majority.begin(), majority.end(), key.disease) != majority.end();
    if (is_majority) {
      plan.push_back({key, 0, draw_colormap(seed, key.id())});
    } else {
      for (std::size_t v = 0; v < kAllColormaps.size(); ++v) {
        plan.push_back({key, static_cast<int>(v), kAllColormaps[v]});
      }
    }
  }
  return plan;
}

std::vector<ScalogramImage> augment(const Matrix& norm, const SegmentKey& key, bool minority,
                                    std::uint64_t seed) {
  if (norm.rows != kImageSize || norm.cols != kImageSize) {
    throw Error(ErrorKind::ShapeMismatch, "scalogram images are 224x224");
  }
  const std::array<Disease, 1> majority = {key.disease};
  const auto plan = minority ? plan_augmentation(std::span(&key, 1), seed, {})
                             : plan_augmentation(std::span(&key, 1), seed, majority);
  std::vector<ScalogramImage> out;
  for (const auto& p : plan) out.push_back({apply_colormap(norm, colormap_table(p.colormap)), p});
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  if (img.pixels.size() != img.width * img.height * 3) {
    throw Error(ErrorKind::ShapeMismatch, "pixel buffer does not match dimensions");
  }
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw Error(ErrorKind::Io, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorKind::Io, "png encoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < img.height; ++r) {
    png_write_row(png, img.pixels.data() + r * img.width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

RgbImage read_png(const std::filesystem::path& path) {
  FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path.string());
  RgbImage img;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorKind::Io, "png decoding failed for " + path.string());
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.pixels.resize(img.width * img.height * 3);
  for (std::size_t r = 0; r < img.height; ++r) {
    png_read_row(png, img.pixels.data() + r * img.width * 3, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

}  // namespace resp
