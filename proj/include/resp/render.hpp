#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resp/matrix.hpp"
#include "resp/scalogram.hpp"
#include "resp/types.hpp"

namespace resp {

inline constexpr std::size_t kImageSize = 224;

enum class Colormap { Parula, HSV, Jet, Hot };
inline constexpr std::array<Colormap, 4> kAllColormaps = {Colormap::Parula, Colormap::HSV,
                                                          Colormap::Jet, Colormap::Hot};

std::string_view colormap_name(Colormap c);  // lowercase asset name
std::optional<Colormap> parse_colormap(std::string_view name);

struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

struct ColormapTable {
  std::array<Rgb, 256> entries;
};

/// Parses 256 rows of `r,g,b`.
ColormapTable parse_colormap_csv(std::string_view text);

/// Tables from `$RESP_SCALOGRAM_ASSETS/<name>.csv` when the variable is set,
/// otherwise the copies compiled into the library.
const ColormapTable& colormap_table(Colormap c);
ColormapTable load_colormap(Colormap c, const std::filesystem::path& asset_dir);

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
};

/// 10*log10(p / max p) clamped to [floor_db, 0], mapped to [0, 1].
Matrix to_db(const Matrix& power, double floor_db = -80.0);
RgbImage apply_colormap(const Matrix& norm, const ColormapTable& table);
/// Corner-aligned separable bilinear interpolation.
Matrix resize_bilinear(const Matrix& src, std::size_t rows, std::size_t cols);

/// Same result as resize_bilinear(to_db(power of cwt(x))), computed one scale
/// row at a time while keeping only the columns the resize touches.
Matrix render_scalogram(std::span<const double> x, const FilterBank& bank,
                        std::size_t size = kImageSize, double floor_db = -80.0);

Matrix scalogram_matrix(const Scalogram& s);

struct SegmentKey {
  int patient_id = 0;
  std::string recording;  // recording stem
  int cycle_index = 0;
  Disease disease = Disease::Healthy;

  std::string id() const;
};

struct VariantPlan {
  SegmentKey key;
  int variant = 0;
  Colormap colormap = Colormap::Parula;

  /// `<patient>_<rec>_<cycle>_<variant>_<colormap>.png`
  std::string filename() const;
};

inline constexpr std::array<Disease, 1> kMajorityDefault = {Disease::COPD};

struct ScalogramImage {
  RgbImage rgb;
  VariantPlan provenance;
};

/// Colormap assignment for a whole corpus. Segments of majority classes get a
/// single image whose colormap is drawn from (seed, segment id); every other
/// segment gets one image per colormap.
std::vector<VariantPlan> plan_augmentation(std::span<const SegmentKey> segments, std::uint64_t seed,
                                           std::span<const Disease> majority = kMajorityDefault);

std::vector<ScalogramImage> augment(const Matrix& norm, const SegmentKey& key, bool minority,
                                    std::uint64_t seed);

Colormap draw_colormap(std::uint64_t seed, std::string_view segment_id);

void write_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png(const std::filesystem::path& path);

}  // namespace resp
