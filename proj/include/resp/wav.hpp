#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace resp {

struct WavData {
  std::vector<double> samples;  // first channel, scaled to [-1, 1)
  double fs = 0.0;
  int channels = 0;
  int bits_per_sample = 0;
};

/// Reads RIFF/PCM (8, 16 or 24 bit). Multichannel files yield channel 0.
WavData read_wav(const std::filesystem::path& path);

/// Writes mono 16-bit PCM; samples are clipped to [-1, 1].
void write_wav16(const std::filesystem::path& path, std::span<const double> samples, int fs);

}  // namespace resp
