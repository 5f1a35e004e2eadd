#ifndef RDA_SPECTRAL_HPP
#define RDA_SPECTRAL_HPP

#include <memory>
#include <utility>
#include <span>
#include <vector>

#include "rda/fft.hpp"
#include "rda/image.hpp"

namespace rda {

/// Centered H x H spectrum: the zero-frequency term sits at (H/2, H/2)
/// (integer division), so low frequencies cluster around the middle.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(int size);
  Spectrum(int size, std::vector<cdouble> data);

  int size() const { return size_; }
  int center() const { return size_ / 2; }
  std::size_t count() const { return data_.size(); }

  cdouble& at(int i, int j) { return data_[static_cast<std::size_t>(i) * size_ + j]; }
  cdouble at(int i, int j) const { return data_[static_cast<std::size_t>(i) * size_ + j]; }

  std::span<cdouble> values() { return data_; }
  std::span<const cdouble> values() const { return data_; }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  int size_ = 0;
  std::vector<cdouble> data_;
};

/// N annular frequency components of one spectrum; bands[0] holds the DC term.
struct BandStack {
  std::vector<Spectrum> bands;
  int band_count() const { return static_cast<int>(bands.size()); }
};

/// Distance of grid index (i, j) from the spectrum center, divided by the
/// distance from the center to the farthest grid index. Lies in [0, 1].
double normalized_radius(int size, int i, int j);

/// Precomputed assignment of every grid index to one of N bands, using the
/// half-open rule d in ((n-1)/N, n/N] with the DC term in the first band.
/// Band indices are 0-based here. Every band is point-symmetric about the
/// center, so masking the spectrum of a real image keeps it conjugate-symmetric.
class BandLayout {
 public:
  BandLayout(int size, int band_count);

  int size() const { return size_; }
  int band_count() const { return band_count_; }
  int band(int i, int j) const { return band_of_[static_cast<std::size_t>(i) * size_ + j]; }
  std::span<const int> assignments() const { return band_of_; }
  /// Number of grid indices in each band; some are empty for large N.
  std::span<const int> occupancy() const { return occupancy_; }

  static std::shared_ptr<const BandLayout> get(int size, int band_count);

 private:
  int size_;
  int band_count_;
  std::vector<int> band_of_;
  std::vector<int> occupancy_;
};

/// Unnormalized forward 2-D DFT of one square plane, center-shifted.
Spectrum dft2(std::span<const double> plane, int size);
/// Per-channel dft2 of a square image.
std::vector<Spectrum> dft2(const Image& image);

/// Inverse of dft2 with 1/H^2 normalization. The imaginary residue is
/// discarded after checking it is negligible relative to the larger of the
/// real output and the largest single-coefficient contribution; a larger
/// residue raises NumericError.
std::vector<double> idft2_plane(const Spectrum& spectrum);
Image idft2(const Spectrum& spectrum);
Image idft2(std::span<const Spectrum> channels);

/// Largest |Im| / scale seen by the realness check of the inverse transform.
double imaginary_residue(const Spectrum& spectrum);

/// Two real planes through one complex transform: returns dft2(a), dft2(b).
std::pair<Spectrum, Spectrum> dft2_pair(std::span<const double> a, std::span<const double> b,
                                        int size);
/// Inverse of two conjugate-symmetric spectra through one complex transform.
/// No realness check: callers guarantee the symmetry structurally.
std::pair<std::vector<double>, std::vector<double>> idft2_pair(const Spectrum& a,
                                                               const Spectrum& b);

BandStack decompose(const Spectrum& spectrum, int band_count);
Spectrum compose(const BandStack& stack);

/// Pass band on the normalized radius: keeps d in (lo, hi], plus the DC term
/// when lo == 0.
struct RadialBand {
  double lo = 1.0 / 6.0;
  double hi = 0.5;
};

void validate(const RadialBand& band);
bool in_band(const RadialBand& band, int size, int i, int j);
/// Zeroes spectrum coefficients outside the band, in place.
void apply_band(Spectrum& spectrum, const RadialBand& band);
/// 1 where in_band holds, row-major over the centered grid.
std::vector<char> band_mask(int size, const RadialBand& band);
Image bandpass(const Image& image, const RadialBand& band);

}  // namespace rda

#endif  // RDA_SPECTRAL_HPP
