#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "resp/ingest.hpp"
#include "resp/types.hpp"

namespace resp {

inline constexpr double kTargetFs = 22050.0;
inline constexpr double kSegmentSeconds = 6.0;
inline constexpr double kMinCycleSeconds = 3.0;
inline constexpr std::size_t kSegmentSamples = 132300;  // 6 s at 22050 Hz

struct Signal {
  std::vector<double> samples;
  double fs = 0.0;
};

/// One biquad, normalized so a0 == 1.
struct Biquad {
  double b0, b1, b2;
  double a1, a2;

  std::complex<double> response(double omega) const;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  double fs = 0.0;
  double low_hz = 0.0;
  double high_hz = 0.0;
  int order = 0;  // prototype order; the bandpass has 2*order poles

  std::complex<double> response(double freq_hz) const;
};

/// Butterworth bandpass as a cascade of `order` second-order sections, via
/// the bilinear transform of a prewarped analog prototype.
FilterCoefficients design_bandpass(double low_hz, double high_hz, int order, double fs);

/// Causal direct-form-II-transposed cascade with zero initial state.
Signal apply_filter(const Signal& sig, const FilterCoefficients& coeffs);

/// Rational polyphase resampler with a Kaiser-windowed sinc kernel.
Signal resample(const Signal& sig, double target_fs);

/// Peak normalization to [-1, 1]; all-zero input is returned unchanged.
Signal normalize(Signal sig);

class CycleSegment {
 public:
  /// Validates length, amplitude range and class; throws ParseError otherwise.
  CycleSegment(std::vector<double> samples, int patient_id, Disease disease,
               std::string recording, int cycle_index);

  const std::vector<double>& samples() const { return samples_; }
  int patient_id() const { return patient_id_; }
  Disease disease() const { return disease_; }
  const std::string& recording() const { return recording_; }
  int cycle_index() const { return cycle_index_; }
  /// `<recording>_<cycle>` with the cycle zero-padded to three digits.
  std::string id() const;

 private:
  std::vector<double> samples_;
  int patient_id_;
  Disease disease_;
  std::string recording_;
  int cycle_index_;
};

struct SegmentationSummary {
  int kept = 0;
  int dropped_short = 0;
  int dropped_excluded = 0;
};

/// Cuts annotated cycles out of a 22050 Hz recording. Cycles shorter than 3 s
/// are dropped, longer ones truncated to 6 s, and the rest extended to 6 s by
/// repeating their own samples.
std::vector<CycleSegment> extract_segments(const Signal& sig,
                                           std::span<const CycleAnnotation> cycles,
                                           const RecordingMeta& meta, Disease disease,
                                           SegmentationSummary* summary = nullptr);

struct PreprocessOptions {
  double low_hz = 50.0;
  double high_hz = 2500.0;
  int order = 6;
  double target_fs = kTargetFs;
};

/// filter -> resample -> normalize for one recording.
Signal preprocess_recording(const Signal& raw, const PreprocessOptions& opts = {});

}  // namespace resp
