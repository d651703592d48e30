#include "resp/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "resp/error.hpp"

namespace resp {
namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
std::uint16_t le16(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
  os.write(b, 4);
}
void put16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {char(v), char(v >> 8)};
  os.write(b, 2);
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  const auto bad = [&](const std::string& why) {
    return Error(ErrorKind::UnsupportedAudio, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw bad("not a RIFF/WAVE file");
  }

  WavData out;
  int format = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t len = le32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(len, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw bad("short fmt chunk");
      format = le16(chunk + 8);
      out.channels = le16(chunk + 10);
      out.fs = le32(chunk + 12);
      out.bits_per_sample = le16(chunk + 22);
      // WAVE_FORMAT_EXTENSIBLE carries the real format tag in its sub-format GUID.
      if (format == 0xFFFE && avail >= 26) format = le16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = avail;
    }
    pos = body + len + (len & 1);
  }
  if (format != 1) throw bad("only PCM is supported");
  if (out.channels < 1 || out.fs <= 0) throw bad("invalid fmt chunk");
  if (out.bits_per_sample != 8 && out.bits_per_sample != 16 && out.bits_per_sample != 24) {
    throw bad("unsupported bit depth " + std::to_string(out.bits_per_sample));
  }
  if (data == nullptr) throw bad("missing data chunk");

  const std::size_t width = out.bits_per_sample / 8;
  const std::size_t frame = width * out.channels;
  const std::size_t frames = data_len / frame;
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* s = data + i * frame;
    double v = 0.0;
    switch (width) {
      case 1: v = (double(s[0]) - 128.0) / 128.0; break;
      case 2: v = double(std::int16_t(le16(s))) / 32768.0; break;
      case 3: {
        std::int32_t x = std::int32_t(s[0]) | std::int32_t(s[1]) << 8 | std::int32_t(s[2]) << 16;
        if (x & 0x800000) x -= 0x1000000;
        v = double(x) / 8388608.0;
        break;
      }
    }
    out.samples[i] = v;
  }
  return out;
}

void write_wav16(const std::filesystem::path& path, std::span<const double> samples, int fs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  const auto data_len = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  put32(os, 36 + data_len);
  os.write("WAVEfmt ", 8);
  put32(os, 16);
  put16(os, 1);
  put16(os, 1);
  put32(os, static_cast<std::uint32_t>(fs));
  put32(os, static_cast<std::uint32_t>(fs) * 2);
  put16(os, 2);
  put16(os, 16);
  os.write("data", 4);
  put32(os, data_len);
  for (double s : samples) {
    const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace resp
