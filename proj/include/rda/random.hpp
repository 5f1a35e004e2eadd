#ifndef RDA_RANDOM_HPP
#define RDA_RANDOM_HPP

#include <cstdint>
#include <random>

namespace rda {

/// Seeded random stream. All distributions are implemented here rather than
/// via <random> distributions so outputs are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Standard Gumbel(0, 1).
  double gumbel();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Derives an independent child seed; used for per-item streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rda

#endif  // RDA_RANDOM_HPP
