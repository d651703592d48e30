#include "resp/preprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <numeric>

#include "resp/error.hpp"

namespace resp {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

Biquad section_from_poles(cplx p1, cplx p2, double omega_center) {
  // Zeros at z = +1 and z = -1: numerator (1 - z^-2).
  Biquad q{1.0, 0.0, -1.0, -(p1 + p2).real(), (p1 * p2).real()};
  const double mag = std::abs(q.response(omega_center));
  q.b0 /= mag;
  q.b2 /= mag;
  return q;
}

}  // namespace

cplx Biquad::response(double omega) const {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

cplx FilterCoefficients::response(double freq_hz) const {
  const double omega = 2.0 * kPi * freq_hz / fs;
  cplx h = 1.0;
  for (const auto& s : sections) h *= s.response(omega);
  return h;
}

FilterCoefficients design_bandpass(double low_hz, double high_hz, int order, double fs) {
  if (!(fs > 0) || order < 1) throw Error(ErrorKind::InvalidBand, "order and fs must be positive");
  if (!(low_hz > 0) || !(high_hz > low_hz) || !(high_hz < fs / 2)) {
    throw Error(ErrorKind::InvalidBand, "need 0 < low < high < fs/2, got [" +
                                            std::to_string(low_hz) + ", " +
                                            std::to_string(high_hz) + "] at fs " +
                                            std::to_string(fs));
  }
  const double w1 = 2.0 * fs * std::tan(kPi * low_hz / fs);
  const double w2 = 2.0 * fs * std::tan(kPi * high_hz / fs);
  const double w0 = std::sqrt(w1 * w2);
  const double bw = w2 - w1;
  const double omega_center = 2.0 * std::atan(w0 / (2.0 * fs));

  std::vector<cplx> upper;  // digital poles with Im > 0
  std::vector<double> real_poles;
  for (int k = 1; k <= order; ++k) {
    const cplx proto = std::polar(1.0, kPi * (2.0 * k + order - 1) / (2.0 * order));
    const cplx a = proto * bw / 2.0;
    const cplx d = std::sqrt(a * a - w0 * w0);
    for (const cplx s : {a + d, a - d}) {
      const cplx z = (2.0 * fs + s) / (2.0 * fs - s);
      if (z.imag() > 1e-12) {
        upper.push_back(z);
      } else if (std::abs(z.imag()) <= 1e-12) {
        real_poles.push_back(z.real());
      }
    }
  }
  std::sort(upper.begin(), upper.end(),
            [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  std::sort(real_poles.begin(), real_poles.end());

  FilterCoefficients out;
  out.fs = fs;
  out.low_hz = low_hz;
  out.high_hz = high_hz;
  out.order = order;
  for (const cplx p : upper) out.sections.push_back(section_from_poles(p, std::conj(p), omega_center));
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    out.sections.push_back(section_from_poles(real_poles[i], real_poles[i + 1], omega_center));
  }
  return out;
}

Signal apply_filter(const Signal& sig, const FilterCoefficients& coeffs) {
  if (std::abs(sig.fs - coeffs.fs) > 1e-9 * coeffs.fs) {
    throw Error(ErrorKind::SampleRateMismatch, "signal at " + std::to_string(sig.fs) +
                                                   " Hz, filter designed for " +
                                                   std::to_string(coeffs.fs) + " Hz");
  }
  Signal out{sig.samples, sig.fs};
  for (const auto& q : coeffs.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : out.samples) {
      const double x = v;
      const double y = q.b0 * x + z1;
      z1 = q.b1 * x - q.a1 * y + z2;
      z2 = q.b2 * x - q.a2 * y;
      v = y;
    }
  }
  return out;
}

Signal resample(const Signal& sig, double target_fs) {
  if (sig.fs == target_fs) return sig;

  // Rates are treated as multiples of 1 mHz so fractional rates still reduce.
  auto up = static_cast<long long>(std::llround(target_fs * 1000.0));
  auto down = static_cast<long long>(std::llround(sig.fs * 1000.0));
  const long long g = std::gcd(up, down);
  up /= g;
  down /= g;

  const std::size_t n_in = sig.samples.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * target_fs / sig.fs));

  constexpr double kZeroCrossings = 16.0;
  constexpr double kRolloff = 0.95;
  constexpr double kKaiserBeta = 8.0;
  const double cutoff = kRolloff * std::min(1.0, double(up) / double(down));
  const double half = kZeroCrossings / cutoff;
  const auto taps_half = static_cast<long long>(std::ceil(half));
  const std::size_t taps = static_cast<std::size_t>(2 * taps_half);
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);

  // One kernel per phase; phase p covers output positions with (n*down) % up == p.
  std::vector<double> table(static_cast<std::size_t>(up) * taps);
  for (long long p = 0; p < up; ++p) {
    for (std::size_t k = 0; k < taps; ++k) {
      const double tau = double(p) / double(up) + double(taps_half - 1 - static_cast<long long>(k));
      double h = 0.0;
      if (std::abs(tau) < half) {
        const double x = cutoff * tau;
        const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
        const double r = tau / half;
        const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
        h = cutoff * sinc * w;
      }
      table[static_cast<std::size_t>(p) * taps + k] = h;
    }
  }

  Signal out;
  out.fs = target_fs;
  out.samples.assign(n_out, 0.0);
  const auto n_in_ll = static_cast<long long>(n_in);
  for (std::size_t n = 0; n < n_out; ++n) {
    const long long pos = static_cast<long long>(n) * down;
    const long long base = pos / up;
    const long long phase = pos % up;
    const double* h = table.data() + static_cast<std::size_t>(phase) * taps;
    const long long first = base - taps_half + 1;
    const long long lo = std::max(0LL, first);
    const long long hi = std::min(n_in_ll, first + static_cast<long long>(taps));
    double acc = 0.0;
    for (long long j = lo; j < hi; ++j) acc += sig.samples[static_cast<std::size_t>(j)] * h[j - first];
    out.samples[n] = acc;
  }
  return out;
}

Signal normalize(Signal sig) {
  double peak = 0.0;
  for (double v : sig.samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return sig;
  for (double& v : sig.samples) v /= peak;
  return sig;
}

CycleSegment::CycleSegment(std::vector<double> samples, int patient_id, Disease disease,
                           std::string recording, int cycle_index)
    : samples_(std::move(samples)),
      patient_id_(patient_id),
      disease_(disease),
      recording_(std::move(recording)),
      cycle_index_(cycle_index) {
  if (samples_.size() != kSegmentSamples) {
    throw Error(ErrorKind::LengthMismatch,
                "segment has " + std::to_string(samples_.size()) + " samples");
  }
  for (double v : samples_) {
    if (!(std::abs(v) <= 1.0)) throw Error(ErrorKind::ParseError, "segment sample outside [-1, 1]");
  }
  if (is_excluded(disease_)) {
    throw Error(ErrorKind::ExcludedClass, std::string(disease_name(disease_)) + " segment");
  }
}

std::string CycleSegment::id() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", cycle_index_);
  return recording_ + "_" + buf;
}

std::vector<CycleSegment> extract_segments(const Signal& sig,
                                           std::span<const CycleAnnotation> cycles,
                                           const RecordingMeta& meta, Disease disease,
                                           SegmentationSummary* summary) {
  if (sig.fs != kTargetFs) {
    throw Error(ErrorKind::SampleRateMismatch, "segments are cut at 22050 Hz");
  }
  SegmentationSummary local;
  std::vector<CycleSegment> out;
  const auto len = static_cast<long long>(sig.samples.size());
  const auto min_len = static_cast<long long>(std::llround(kMinCycleSeconds * sig.fs));
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    if (is_excluded(disease)) {
      ++local.dropped_excluded;
      continue;
    }
    const long long start = std::min(len, static_cast<long long>(std::llround(cycles[c].start_s * sig.fs)));
    const long long end = std::min(len, static_cast<long long>(std::llround(cycles[c].end_s * sig.fs)));
    const long long span_len = end - start;
    if (span_len < min_len) {
      ++local.dropped_short;
      continue;
    }
    std::vector<double> seg(kSegmentSamples);
    for (std::size_t i = 0; i < kSegmentSamples; ++i) {
      seg[i] = sig.samples[static_cast<std::size_t>(start + static_cast<long long>(i) % span_len)];
    }
    out.emplace_back(std::move(seg), meta.patient_id, disease, meta.stem(), static_cast<int>(c));
    ++local.kept;
  }
  if (summary) {
    summary->kept += local.kept;
    summary->dropped_short += local.dropped_short;
    summary->dropped_excluded += local.dropped_excluded;
  }
  return out;
}

Signal preprocess_recording(const Signal& raw, const PreprocessOptions& opts) {
  Signal sig;
  if (opts.high_hz < raw.fs / 2) {
    sig = apply_filter(raw, design_bandpass(opts.low_hz, opts.high_hz, opts.order, raw.fs));
    sig = resample(sig, opts.target_fs);
  } else {
    // The native rate cannot carry the passband; band-limit after upsampling instead.
    sig = resample(raw, opts.target_fs);
    sig = apply_filter(sig, design_bandpass(opts.low_hz, opts.high_hz, opts.order, sig.fs));
  }
  return normalize(std::move(sig));
}

}  // namespace resp
