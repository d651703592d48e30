#pragma once

#include <cstdint>
#include <vector>

#include "resp/config.hpp"
#include "resp/ingest.hpp"

namespace resp {

/// A generated recording: per-class tone plus an upward chirp under a
/// breathing envelope, with white noise. Patients jitter the class tone.
struct SynthRecording {
  RecordingMeta meta;
  Disease disease = Disease::Healthy;
  double fs = 0.0;
  std::vector<double> samples;
  std::vector<CycleAnnotation> cycles;
};

/// Carrier frequency of a class before per-patient jitter.
double synth_tone_hz(Disease d);

std::vector<SynthRecording> synthesize(const RunConfig::Synth& opts, std::uint64_t seed);

}  // namespace resp
