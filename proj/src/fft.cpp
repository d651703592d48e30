#include "resp/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace resp {
namespace {

// FFTW's planner is not thread-safe; execution with distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }
};

Fft::Fft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  std::lock_guard lock(planner_mutex());
  impl_->buf = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  // FFTW_ESTIMATE picks the same algorithm every run, keeping results bit-stable.
  impl_->fwd = fftw_plan_dft_1d(len, impl_->buf, impl_->buf, FFTW_FORWARD, FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_1d(len, impl_->buf, impl_->buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

std::span<std::complex<double>> Fft::buffer() {
  return {reinterpret_cast<std::complex<double>*>(impl_->buf), n_};
}

void Fft::forward() { fftw_execute(impl_->fwd); }
void Fft::backward() { fftw_execute(impl_->bwd); }

}  // namespace resp
