#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace resp::emd {

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

struct ImfSet {
  std::vector<std::vector<double>> imfs;
  std::vector<double> residue;
  std::size_t source_len = 0;

  std::size_t size() const { return imfs.size(); }
};

struct SiftOptions {
  std::size_t max_imfs = 9;
  double sd_threshold = 0.2;
  int max_iterations = 50;
};

struct Selection {
  std::size_t index;  // 1-based, matching IMF_1..IMF_N
  double coefficient;
};

/// Strict interior extrema; a flat plateau reports its midpoint.
Extrema find_extrema(std::span<const double> x);

/// Sign changes, skipping exact zeros.
std::size_t count_zero_crossings(std::span<const double> x);

/// Natural cubic spline through x[idx], with the two nearest extrema mirrored
/// across each end. Exactly two extrema give the straight line through them.
std::vector<double> envelope(std::span<const double> x, std::span<const std::size_t> idx);

/// Sifts until the SD stop holds together with the IMF condition, or for
/// max_iterations; a mode still failing the IMF condition is sifted further,
/// up to 20 * max_iterations, until it meets it. Stops when the remainder has
/// fewer than two maxima or minima, when max_imfs is reached, or when a mode
/// after the first still fails the IMF condition; the remainder is then the
/// residue.
ImfSet decompose(std::span<const double> x, const SiftOptions& opts = {});

double pearson(std::span<const double> a, std::span<const double> b);

/// argmax_i |pearson(x, IMF_i)|, smallest index on ties.
Selection select_max_correlated_imf(std::span<const double> x, const ImfSet& set);

}  // namespace resp::emd
