#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace resp {

/// In-place complex DFT of a fixed length, backed by FFTW. Each instance owns
/// its plans and buffer; instances may live on different threads.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;

  std::size_t size() const { return n_; }
  std::span<std::complex<double>> buffer();

  void forward();   // unnormalized, e^{-i...}
  void backward();  // unnormalized, e^{+i...}; divide by n for the inverse

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace resp
