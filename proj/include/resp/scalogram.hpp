#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "resp/fft.hpp"

namespace resp {

/// Generalized Morse wavelets on a geometric scale grid, sampled on the DFT
/// grid of an n-point signal. Scale index 0 is the finest (highest frequency).
class FilterBank {
 public:
  struct Options {
    double gamma = 3.0;
    double time_bandwidth = 60.0;  // P^2 = beta * gamma
    int voices_per_octave = 10;
  };

  FilterBank(std::size_t n, double fs, const Options& opts);
  FilterBank(std::size_t n, double fs) : FilterBank(n, fs, Options{}) {}

  std::size_t n() const { return n_; }
  double fs() const { return fs_; }
  double gamma() const { return gamma_; }
  double beta() const { return beta_; }
  int voices_per_octave() const { return vpo_; }
  std::size_t n_scales() const { return scales_.size(); }
  const std::vector<double>& scales() const { return scales_; }
  const std::vector<double>& center_freqs() const { return center_freqs_; }

  /// Peak radian frequency of the mother wavelet, (beta/gamma)^(1/gamma).
  double peak_omega() const;
  /// Mother wavelet at radian frequency omega; zero for omega <= 0, peak value 2.
  double mother(double omega) const;

  /// Wavelet at scale j on DFT bin k (0 <= k < n). Zero outside the stored support.
  double value(std::size_t j, std::size_t k) const;
  /// First bin of the stored support of scale j; values below it are zero.
  std::size_t first_bin(std::size_t j) const { return rows_[j].first_bin; }
  std::span<const double> support(std::size_t j) const { return rows_[j].values; }

 private:
  struct Row {
    std::size_t first_bin = 0;
    std::vector<double> values;
  };

  std::size_t n_;
  double fs_;
  double gamma_;
  double beta_;
  int vpo_;
  double log_norm_;  // log of the amplitude constant that makes the peak equal 2
  std::vector<double> scales_;
  std::vector<double> center_freqs_;
  std::vector<Row> rows_;
};

struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const std::complex<double>& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Rows: scales (a), columns: time (b).
struct Scalogram {
  std::size_t n_scales = 0;
  std::size_t n_samples = 0;
  std::vector<double> power;
  std::vector<double> scales;
  std::vector<double> center_freqs;
  double fs = 0.0;

  double at(std::size_t r, std::size_t c) const { return power[r * n_samples + c]; }
};

/// Streams CWT rows one scale at a time so callers never hold the full matrix.
class CwtEngine {
 public:
  explicit CwtEngine(const FilterBank& bank);

  /// Takes the DFT of x; must precede row().
  void load(std::span<const double> x);
  /// Writes scale j's coefficients into out (length n).
  void row(std::size_t j, std::span<std::complex<double>> out);
  /// Writes |Z|^2 of scale j into out (length n).
  void power_row(std::size_t j, std::span<double> out);

 private:
  const FilterBank& bank_;
  Fft fft_;
  std::vector<std::complex<double>> spectrum_;
};

ComplexMatrix cwt(std::span<const double> x, const FilterBank& bank);
Scalogram power(const ComplexMatrix& z, const FilterBank& bank);

}  // namespace resp
