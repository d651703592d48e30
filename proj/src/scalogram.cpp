#include "resp/scalogram.hpp"

#include <cmath>
#include <numbers>

#include "resp/error.hpp"

namespace resp {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Stored support ends where the wavelet falls below this fraction of its peak.
constexpr double kSupportFloor = 1e-14;
// The finest scale puts 10% of the peak response at the Nyquist frequency.
constexpr double kNyquistFraction = 0.1;

}  // namespace

FilterBank::FilterBank(std::size_t n, double fs, const Options& opts)
    : n_(n), fs_(fs), gamma_(opts.gamma), beta_(opts.time_bandwidth / opts.gamma),
      vpo_(opts.voices_per_octave) {
  if (n < 32) throw Error(ErrorKind::TooShort, "filter bank needs at least 32 samples");
  if (!(gamma_ > 0) || !(beta_ > 0) || vpo_ < 1 || !(fs > 0)) {
    throw Error(ErrorKind::Config, "invalid Morse parameters");
  }
  const double wp = peak_omega();
  log_norm_ = std::log(2.0) - beta_ * std::log(wp) + std::pow(wp, gamma_);

  // Decaying side of the mother wavelet: find u > wp with mother(u) = target.
  const auto solve_decay = [&](double target) {
    double lo = wp, hi = wp;
    while (mother(hi) > target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mother(mid) > target ? lo : hi) = mid;
    }
    return hi;
  };
  const auto solve_rise = [&](double target) {
    double lo = wp, hi = wp;
    while (mother(lo) > target) lo *= 0.5;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (mother(mid) > target ? hi : lo) = mid;
    }
    return lo;
  };

  const double s_min = solve_decay(2.0 * kNyquistFraction) / std::numbers::pi;
  const double duration = std::sqrt(beta_ * gamma_) / wp;  // time spread at unit scale
  const double s_max = static_cast<double>(n) / (4.0 * duration);
  if (s_max <= s_min) throw Error(ErrorKind::TooShort, "signal too short for one scale");
  const auto count =
      static_cast<std::size_t>(std::floor(vpo_ * std::log2(s_max / s_min))) + 1;

  const double u_lo = solve_rise(2.0 * kSupportFloor);
  const double u_hi = solve_decay(2.0 * kSupportFloor);
  const std::size_t nyquist = n / 2;
  for (std::size_t j = 0; j < count; ++j) {
    const double s = s_min * std::exp2(static_cast<double>(j) / vpo_);
    scales_.push_back(s);
    center_freqs_.push_back(wp / (kTwoPi * s) * fs);

    // Bin k sits at omega_k = 2*pi*k/n; the wavelet is sampled at s * omega_k.
    const double per_bin = kTwoPi * s / static_cast<double>(n);
    auto k0 = static_cast<std::size_t>(std::max(1.0, std::floor(u_lo / per_bin)));
    auto k1 = static_cast<std::size_t>(std::min(double(nyquist), std::ceil(u_hi / per_bin)));
    Row row;
    row.first_bin = k0;
    if (k1 >= k0) {
      row.values.resize(k1 - k0 + 1);
      for (std::size_t k = k0; k <= k1; ++k) row.values[k - k0] = mother(per_bin * double(k));
    }
    rows_.push_back(std::move(row));
  }
}

double FilterBank::peak_omega() const { return std::pow(beta_ / gamma_, 1.0 / gamma_); }

double FilterBank::mother(double omega) const {
  if (omega <= 0.0) return 0.0;
  return std::exp(log_norm_ + beta_ * std::log(omega) - std::pow(omega, gamma_));
}

double FilterBank::value(std::size_t j, std::size_t k) const {
  const Row& r = rows_[j];
  if (k < r.first_bin || k >= r.first_bin + r.values.size()) return 0.0;
  return r.values[k - r.first_bin];
}

CwtEngine::CwtEngine(const FilterBank& bank)
    : bank_(bank), fft_(bank.n()), spectrum_(bank.n()) {}

void CwtEngine::load(std::span<const double> x) {
  if (x.size() != bank_.n()) {
    throw Error(ErrorKind::LengthMismatch, "signal length " + std::to_string(x.size()) +
                                               " != filter bank length " +
                                               std::to_string(bank_.n()));
  }
  auto buf = fft_.buffer();
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  fft_.forward();
  std::copy(buf.begin(), buf.end(), spectrum_.begin());
}

void CwtEngine::row(std::size_t j, std::span<std::complex<double>> out) {
  auto buf = fft_.buffer();
  std::fill(buf.begin(), buf.end(), std::complex<double>{});
  const std::size_t first = bank_.first_bin(j);
  const auto vals = bank_.support(j);
  for (std::size_t i = 0; i < vals.size(); ++i) buf[first + i] = spectrum_[first + i] * vals[i];
  fft_.backward();
  const double inv_n = 1.0 / static_cast<double>(bank_.n());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = buf[t] * inv_n;
}

void CwtEngine::power_row(std::size_t j, std::span<double> out) {
  std::vector<std::complex<double>> z(bank_.n());
  row(j, z);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = std::norm(z[t]);
}

ComplexMatrix cwt(std::span<const double> x, const FilterBank& bank) {
  CwtEngine engine(bank);
  engine.load(x);
  ComplexMatrix z{bank.n_scales(), bank.n(), {}};
  z.data.resize(z.rows * z.cols);
  for (std::size_t j = 0; j < z.rows; ++j) {
    engine.row(j, std::span(z.data).subspan(j * z.cols, z.cols));
  }
  return z;
}

Scalogram power(const ComplexMatrix& z, const FilterBank& bank) {
  Scalogram s;
  s.n_scales = z.rows;
  s.n_samples = z.cols;
  s.power.resize(z.data.size());
  for (std::size_t i = 0; i < z.data.size(); ++i) s.power[i] = std::norm(z.data[i]);
  s.scales = bank.scales();
  s.center_freqs = bank.center_freqs();
  s.fs = bank.fs();
  return s;
}

}  // namespace resp
