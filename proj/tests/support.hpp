#ifndef RDA_TESTS_SUPPORT_HPP
#define RDA_TESTS_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "rda/image.hpp"
#include "rda/random.hpp"
#include "rda/spectral.hpp"

namespace rda::test {

inline Image random_image(int h, int w, int channels, std::uint64_t seed) {
  Rng rng(seed);
  Image image(h, w, channels);
  for (double& v : image.values()) v = rng.uniform();
  return image;
}

// O(H^4) transform straight from the definition, written centered.
inline Spectrum naive_dft(std::span<const double> plane, int h) {
  Spectrum out(h);
  const int c = h / 2;
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < h; ++v) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < h; ++j) {
          const double angle = -2.0 * std::numbers::pi * static_cast<double>(u * i + v * j) / h;
          acc += plane[static_cast<std::size_t>(i) * h + j] *
                 std::complex<double>(std::cos(angle), std::sin(angle));
        }
      }
      out.at((u + c) % h, (v + c) % h) = acc;
    }
  }
  return out;
}

inline double max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() /
           ("rda_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace rda::test

#endif  // RDA_TESTS_SUPPORT_HPP
