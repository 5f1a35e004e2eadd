#ifndef RDA_FFT_HPP
#define RDA_FFT_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace rda {

using cdouble = std::complex<double>;

/// 1-D complex transform of any length, backed by FFTW estimate-mode plans so
/// results are reproducible run to run.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }

  /// out[k] = sum_t in[t] exp(-2 pi i k t / n), unnormalized.
  void forward(std::span<const cdouble> in, std::span<cdouble> out) const;
  /// out[k] = sum_t in[t] exp(+2 pi i k t / n), unnormalized.
  void inverse(std::span<const cdouble> in, std::span<cdouble> out) const;

  /// Shared, immutable plan for length n.
  static std::shared_ptr<const FftPlan> get(std::size_t n);

 private:
  void execute(void* plan, std::span<const cdouble> in, std::span<cdouble> out) const;

  std::size_t n_;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

}  // namespace rda

#endif  // RDA_FFT_HPP
