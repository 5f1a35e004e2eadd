#include "rda/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "rda/error.hpp"

namespace rda {

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw ParameterError("FFT length must be positive");
  std::vector<cdouble> a(n), b(n);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags);
  inverse_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags);
  if (!forward_ || !inverse_) throw NumericError("FFTW could not plan length " + std::to_string(n));
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
}

void FftPlan::execute(void* plan, std::span<const cdouble> in, std::span<cdouble> out) const {
  if (in.size() != n_ || out.size() != n_) throw DimensionError("FFT buffer length mismatch");
  if (in.data() == out.data()) throw DimensionError("FFT does not run in place");
  // Out-of-place complex plans leave the input untouched.
  fftw_execute_dft(static_cast<fftw_plan>(plan),
                   reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void FftPlan::forward(std::span<const cdouble> in, std::span<cdouble> out) const {
  execute(forward_, in, out);
}

void FftPlan::inverse(std::span<const cdouble> in, std::span<cdouble> out) const {
  execute(inverse_, in, out);
}

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const FftPlan>(n);
  return slot;
}

}  // namespace rda
