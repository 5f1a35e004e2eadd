#include "rda/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "rda/error.hpp"

namespace rda {

namespace {

struct RadiusTerms {
  long long d2;
  long long dmax2;
};

// Squared distances in integer arithmetic so band edges are exact.
RadiusTerms radius_terms(int size, int i, int j) {
  const long long c = size / 2;
  const long long di = i - c;
  const long long dj = j - c;
  return {di * di + dj * dj, 2 * c * c};
}

// Centered index of the frequency opposite to i. Frequencies wrap modulo
// size, so on even grids the outermost row pairs with itself.
int mirror(int i, int size) {
  const int c = size / 2;
  return ((2 * c - i) % size + size) % size;
}

void check_square_plane(std::size_t plane, int size) {
  if (size < 1 || plane != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
    throw DimensionError("dft2 requires a square plane");
  }
}

}  // namespace

Spectrum::Spectrum(int size)
    : size_(size), data_(static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
  if (size < 1) throw DimensionError("spectrum size must be positive");
}

Spectrum::Spectrum(int size, std::vector<cdouble> data) : size_(size), data_(std::move(data)) {
  if (size < 1 || data_.size() != static_cast<std::size_t>(size) * static_cast<std::size_t>(size)) {
    throw DimensionError("spectrum buffer must hold size*size coefficients");
  }
}

double normalized_radius(int size, int i, int j) {
  auto [d2, dmax2] = radius_terms(size, i, j);
  if (dmax2 == 0) return 0.0;
  return std::sqrt(static_cast<double>(d2) / static_cast<double>(dmax2));
}

BandLayout::BandLayout(int size, int band_count)
    : size_(size), band_count_(band_count) {
  if (band_count < 1) throw ParameterError("band count must be at least 1");
  if (size < 1) throw DimensionError("band layout size must be positive");
  band_of_.resize(static_cast<std::size_t>(size) * size);
  occupancy_.assign(static_cast<std::size_t>(band_count), 0);
  const long long n2 = static_cast<long long>(band_count) * band_count;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      auto [d2, dmax2] = radius_terms(size, i, j);
      int band = 1;
      if (d2 > 0) {
        // smallest n with d/dmax <= n/N, i.e. d2 * N^2 <= n^2 * dmax2
        band = static_cast<int>(std::ceil(band_count * std::sqrt(static_cast<double>(d2) /
                                                                 static_cast<double>(dmax2))));
        band = std::clamp(band, 1, band_count);
        while (band > 1 && d2 * n2 <= static_cast<long long>(band - 1) * (band - 1) * dmax2) --band;
        while (band < band_count && d2 * n2 > static_cast<long long>(band) * band * dmax2) ++band;
      }
      band_of_[static_cast<std::size_t>(i) * size + j] = band - 1;
      ++occupancy_[static_cast<std::size_t>(band - 1)];
    }
  }
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      if (band(i, j) != band(mirror(i, size), mirror(j, size))) {
        throw NumericError("band layout is not point-symmetric");
      }
    }
  }
}

std::shared_ptr<const BandLayout> BandLayout::get(int size, int band_count) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const BandLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{size, band_count}];
  if (!slot) slot = std::make_shared<const BandLayout>(size, band_count);
  return slot;
}

namespace {

// Forward 2-D transform of a complex plane, written center-shifted.
Spectrum forward_complex(std::span<const cdouble> plane, int size) {
  const auto plan = FftPlan::get(static_cast<std::size_t>(size));
  const std::size_t n = static_cast<std::size_t>(size);
  std::vector<cdouble> rows(n * n);
  std::vector<cdouble> line_in(n), line_out(n);
  for (std::size_t i = 0; i < n; ++i) {
    plan->forward(plane.subspan(i * n, n), std::span<cdouble>(rows).subspan(i * n, n));
  }
  Spectrum out(size);
  const std::size_t c = n / 2;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) line_in[i] = rows[i * n + j];
    plan->forward(line_in, line_out);
    const std::size_t sj = (j + c) % n;
    for (std::size_t u = 0; u < n; ++u) {
      out.at(static_cast<int>((u + c) % n), static_cast<int>(sj)) = line_out[u];
    }
  }
  return out;
}

}  // namespace

Spectrum dft2(std::span<const double> plane, int size) {
  check_square_plane(plane.size(), size);
  std::vector<cdouble> complex_plane(plane.begin(), plane.end());
  return forward_complex(complex_plane, size);
}

std::pair<Spectrum, Spectrum> dft2_pair(std::span<const double> a, std::span<const double> b,
                                        int size) {
  check_square_plane(a.size(), size);
  check_square_plane(b.size(), size);
  std::vector<cdouble> packed(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) packed[k] = {a[k], b[k]};
  Spectrum z = forward_complex(packed, size);
  // A(k) = (Z(k) + conj Z(-k)) / 2,  B(k) = (Z(k) - conj Z(-k)) / 2i
  Spectrum fa(size), fb(size);
  for (int i = 0; i < size; ++i) {
    const int mi = mirror(i, size);
    for (int j = 0; j < size; ++j) {
      const cdouble zk = z.at(i, j);
      const cdouble zm = std::conj(z.at(mi, mirror(j, size)));
      fa.at(i, j) = 0.5 * (zk + zm);
      const cdouble d = 0.5 * (zk - zm);
      fb.at(i, j) = {d.imag(), -d.real()};
    }
  }
  return {std::move(fa), std::move(fb)};
}

std::vector<Spectrum> dft2(const Image& image) {
  if (!image.square()) throw DimensionError("dft2 requires a square image; use resize_to_square");
  std::vector<Spectrum> out;
  out.reserve(static_cast<std::size_t>(image.channels()));
  for (int c = 0; c < image.channels(); ++c) out.push_back(dft2(image.plane(c), image.height()));
  return out;
}

namespace {

std::vector<cdouble> inverse_complex(const Spectrum& spectrum) {
  const std::size_t n = static_cast<std::size_t>(spectrum.size());
  const std::size_t c = n / 2;
  const auto plan = FftPlan::get(n);
  std::vector<cdouble> cols(n * n);
  std::vector<cdouble> line_in(n), line_out(n);
  // undo the centering while loading columns
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t sj = (v + c) % n;
    for (std::size_t u = 0; u < n; ++u) {
      line_in[u] = spectrum.at(static_cast<int>((u + c) % n), static_cast<int>(sj));
    }
    plan->inverse(line_in, line_out);
    for (std::size_t i = 0; i < n; ++i) cols[i * n + v] = line_out[i];
  }
  std::vector<cdouble> out(n * n);
  const double scale = 1.0 / static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    plan->inverse(std::span<const cdouble>(cols).subspan(i * n, n), line_out);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = line_out[j] * scale;
  }
  return out;
}

double coefficient_scale(const Spectrum& spectrum) {
  double m = 0.0;
  for (const auto& z : spectrum.values()) m = std::max(m, std::abs(z));
  return m / static_cast<double>(spectrum.count());
}

constexpr double kRealnessTolerance = 1e-8;

}  // namespace

std::pair<std::vector<double>, std::vector<double>> idft2_pair(const Spectrum& a,
                                                               const Spectrum& b) {
  if (a.size() != b.size()) throw DimensionError("idft2_pair: sizes differ");
  Spectrum packed(a.size());
  auto pa = a.values();
  auto pb = b.values();
  auto pz = packed.values();
  for (std::size_t k = 0; k < pz.size(); ++k) {
    pz[k] = {pa[k].real() - pb[k].imag(), pa[k].imag() + pb[k].real()};
  }
  auto values = inverse_complex(packed);
  std::pair<std::vector<double>, std::vector<double>> out;
  out.first.resize(values.size());
  out.second.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.first[k] = values[k].real();
    out.second[k] = values[k].imag();
  }
  return out;
}

double imaginary_residue(const Spectrum& spectrum) {
  auto values = inverse_complex(spectrum);
  double max_re = 0.0, max_im = 0.0;
  for (const auto& v : values) {
    max_re = std::max(max_re, std::abs(v.real()));
    max_im = std::max(max_im, std::abs(v.imag()));
  }
  double scale = std::max(max_re, coefficient_scale(spectrum));
  return scale > 0.0 ? max_im / scale : max_im;
}

std::vector<double> idft2_plane(const Spectrum& spectrum) {
  auto values = inverse_complex(spectrum);
  double max_re = 0.0, max_im = 0.0;
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = values[k].real();
    max_re = std::max(max_re, std::abs(values[k].real()));
    max_im = std::max(max_im, std::abs(values[k].imag()));
  }
  const double scale = std::max(max_re, coefficient_scale(spectrum));
  if (max_im > kRealnessTolerance * scale) {
    throw NumericError("idft2: imaginary residue " + std::to_string(max_im) +
                       " exceeds tolerance; spectrum is not conjugate-symmetric");
  }
  return out;
}

Image idft2(const Spectrum& spectrum) {
  return Image(spectrum.size(), spectrum.size(), 1, idft2_plane(spectrum));
}

Image idft2(std::span<const Spectrum> channels) {
  if (channels.empty()) throw DimensionError("idft2: no channels");
  const int size = channels.front().size();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(size) * size * channels.size());
  for (const auto& spectrum : channels) {
    if (spectrum.size() != size) throw DimensionError("idft2: channel sizes differ");
    auto plane = idft2_plane(spectrum);
    data.insert(data.end(), plane.begin(), plane.end());
  }
  return Image(size, size, static_cast<int>(channels.size()), std::move(data));
}

BandStack decompose(const Spectrum& spectrum, int band_count) {
  if (band_count < 1) throw ParameterError("decompose: band count must be at least 1");
  const auto layout = BandLayout::get(spectrum.size(), band_count);
  BandStack stack;
  stack.bands.assign(static_cast<std::size_t>(band_count), Spectrum(spectrum.size()));
  auto assignments = layout->assignments();
  auto source = spectrum.values();
  for (std::size_t k = 0; k < source.size(); ++k) {
    stack.bands[static_cast<std::size_t>(assignments[k])].values()[k] = source[k];
  }
  return stack;
}

Spectrum compose(const BandStack& stack) {
  if (stack.bands.empty()) throw DimensionError("compose: empty band stack");
  Spectrum out = stack.bands.front();
  for (std::size_t n = 1; n < stack.bands.size(); ++n) {
    const auto& band = stack.bands[n];
    if (band.size() != out.size()) throw DimensionError("compose: band sizes differ");
    auto src = band.values();
    auto dst = out.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return out;
}

void validate(const RadialBand& band) {
  if (!(band.lo >= 0.0 && band.lo < band.hi && band.hi <= 1.0)) {
    throw ParameterError("pass band requires 0 <= lo < hi <= 1, got (" + std::to_string(band.lo) +
                         ", " + std::to_string(band.hi) + ")");
  }
}

bool in_band(const RadialBand& band, int size, int i, int j) {
  double d = normalized_radius(size, i, j);
  if (d == 0.0) return band.lo == 0.0;
  return d > band.lo && d <= band.hi;
}

void apply_band(Spectrum& spectrum, const RadialBand& band) {
  for (int i = 0; i < spectrum.size(); ++i) {
    for (int j = 0; j < spectrum.size(); ++j) {
      if (!in_band(band, spectrum.size(), i, j)) spectrum.at(i, j) = 0.0;
    }
  }
}

std::vector<char> band_mask(int size, const RadialBand& band) {
  validate(band);
  std::vector<char> mask(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      mask[static_cast<std::size_t>(i) * size + j] = in_band(band, size, i, j) ? 1 : 0;
    }
  }
  return mask;
}

Image bandpass(const Image& image, const RadialBand& band) {
  validate(band);
  auto spectra = dft2(image);
  for (auto& s : spectra) apply_band(s, band);
  return idft2(spectra);
}

}  // namespace rda
