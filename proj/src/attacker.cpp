#include "rda/attacker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rda/error.hpp"

namespace rda {

AttackerParams AttackerParams::make(int band_count, double budget, double temperature,
                                    RadialBand rec_band) {
  AttackerParams params;
  params.gate = GateParams::uniform(band_count, temperature);
  params.band_count = band_count;
  params.budget = budget;
  params.rec_band = rec_band;
  validate(params);
  return params;
}

void validate(const AttackerParams& params) {
  if (params.band_count < 1) throw ParameterError("attacker needs at least one band");
  if (!(params.budget > 0.0 && params.budget <= 1.0)) {
    throw ParameterError("gate budget p must lie in (0, 1]");
  }
  validate(params.rec_band);
  validate(params.gate);
  if (params.gate.band_count() != params.band_count) {
    throw ParameterError("gate logits do not match the band count");
  }
}

ReferencePool::ReferencePool(std::vector<Image> images) {
  if (images.empty()) throw StateError("reference pool is empty");
  images_.reserve(images.size());
  spectra_.reserve(images.size());
  for (auto& image : images) {
    Image square = resize_to_square(image).image;
    if (!images_.empty() && !square.same_shape(images_.front())) {
      throw DimensionError("reference images must share one shape");
    }
    spectra_.push_back(dft2(square));
    images_.push_back(std::move(square));
  }
}

std::size_t ReferencePool::pick(Rng& rng) const {
  return static_cast<std::size_t>(rng.below(images_.size()));
}

Image AdversarialSample::delta(int band) const {
  if (!has_deltas()) throw StateError("adversarial sample carries no deltas");
  std::vector<Spectrum> restricted;
  restricted.reserve(difference.size());
  auto assignments = layout->assignments();
  for (const auto& d : difference) {
    Spectrum s(d.size());
    for (std::size_t k = 0; k < assignments.size(); ++k) {
      if (assignments[k] == band) s.values()[k] = d.values()[k];
    }
    restricted.push_back(std::move(s));
  }
  return idft2(restricted);
}

AdversarialSample compose_attack(const Image& x, std::span<const Spectrum> x_spectra,
                                 const ReferencePool& pool, std::size_t reference,
                                 GateSample gate, int band_count,
                                 std::shared_ptr<const std::vector<char>> rec_mask) {
  if (!x.square()) throw DimensionError("attack requires a square image; use resize_to_square");
  if (reference >= pool.size()) throw StateError("reference index out of range");
  const Image& ref = pool.image(reference);
  if (!x.same_shape(ref)) throw DimensionError("input and reference shapes differ");
  if (x_spectra.size() != static_cast<std::size_t>(x.channels())) {
    throw DimensionError("input spectra do not match the channel count");
  }
  if (gate.band_count() != band_count) throw DimensionError("gate sample band count mismatch");
  if (rec_mask && rec_mask->size() != x.plane_size()) {
    throw DimensionError("reconstruction mask does not match the image");
  }

  AdversarialSample sample;
  sample.layout = BandLayout::get(x.height(), band_count);
  sample.reference = reference;
  const auto& ref_spectra = pool.spectra(reference);
  auto assignments = sample.layout->assignments();

  std::vector<Spectrum> mixed;
  std::vector<Spectrum> shifted;
  mixed.reserve(x_spectra.size());
  for (std::size_t c = 0; c < x_spectra.size(); ++c) {
    const auto z = x_spectra[c].values();
    const auto zr = ref_spectra[c].values();
    Spectrum diff(x.height());
    Spectrum out(x.height());
    Spectrum shift(x.height());
    for (std::size_t k = 0; k < z.size(); ++k) {
      diff.values()[k] = zr[k] - z[k];
      const bool swapped = gate.hard[static_cast<std::size_t>(assignments[k])] != 0;
      out.values()[k] = swapped ? zr[k] : z[k];
      if (swapped && rec_mask && (*rec_mask)[k]) shift.values()[k] = diff.values()[k];
    }
    sample.difference.push_back(std::move(diff));
    mixed.push_back(std::move(out));
    shifted.push_back(std::move(shift));
  }
  const int selected = gate.count();
  if (rec_mask) {
    sample.rec_mask = std::move(rec_mask);
    sample.raw = Image(x.height(), x.width(), x.channels());
    sample.shift = Image(x.height(), x.width(), x.channels());
    for (int c = 0; c < x.channels(); ++c) {
      auto planes = idft2_pair(mixed[static_cast<std::size_t>(c)],
                               shifted[static_cast<std::size_t>(c)]);
      std::copy(planes.first.begin(), planes.first.end(), sample.raw.plane(c).begin());
      std::copy(planes.second.begin(), planes.second.end(), sample.shift.plane(c).begin());
    }
  }
  // With nothing or everything swapped the mixed spectrum equals z or z_ref
  // exactly, so return the corresponding image without a round trip.
  if (selected == 0) {
    sample.raw = x;
  } else if (selected == band_count) {
    sample.raw = ref;
  } else if (!sample.has_shift()) {
    sample.raw = idft2(mixed);
  }
  sample.image = clamp01(sample.raw);
  sample.gate = std::move(gate);
  return sample;
}

FourierAttacker::FourierAttacker(AttackerParams params, std::shared_ptr<const ReferencePool> pool)
    : params_(std::move(params)), pool_(std::move(pool)) {
  validate(params_);
  if (!pool_ || pool_->size() == 0) throw StateError("attacker needs a non-empty reference pool");
  rec_mask_ = std::make_shared<const std::vector<char>>(
      band_mask(pool_->image(0).height(), params_.rec_band));
}

AdversarialSample FourierAttacker::attack(const Image& x, Rng& rng) {
  auto spectra = dft2(x);
  return attack(x, spectra, rng);
}

AdversarialSample FourierAttacker::attack(const Image& x, std::span<const Spectrum> x_spectra,
                                          Rng& rng) {
  ++calls_;
  std::size_t reference = pool_->pick(rng);
  GateSample gate = gate_forward(params_.gate, rng);
  return compose_attack(x, x_spectra, *pool_, reference, std::move(gate), params_.band_count,
                        rec_mask_);
}

AdversarialSample attack(const Image& x, const ReferencePool& pool, const AttackerParams& params,
                         Rng& rng) {
  validate(params);
  if (pool.size() == 0) throw StateError("reference pool is empty");
  auto spectra = dft2(x);
  std::size_t reference = pool.pick(rng);
  GateSample gate = gate_forward(params.gate, rng);
  return compose_attack(x, spectra, pool, reference, std::move(gate), params.band_count);
}

RecTerms rec_terms(const Image& x_passed, const Image& x_faa, const RadialBand& band) {
  if (!x_passed.same_shape(x_faa)) throw DimensionError("rec_loss: shape mismatch");
  Image b = bandpass(x_faa, band);
  Image sign(x_faa.height(), x_faa.width(), x_faa.channels());
  const double scale = 1.0 / static_cast<double>(x_faa.size());
  auto av = x_passed.values();
  auto bv = b.values();
  auto sv = sign.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < sv.size(); ++k) {
    double d = bv[k] - av[k];
    sum += std::abs(d);
    sv[k] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
  }
  // The band-pass is a symmetric projection, so it is its own adjoint.
  return {sum * scale, bandpass(sign, band)};
}

double rec_loss(const AdversarialSample& sample) {
  if (!sample.has_shift()) throw StateError("sample was composed without a reconstruction band");
  double sum = 0.0;
  for (double v : sample.shift.values()) sum += std::abs(v);
  return sum / static_cast<double>(sample.shift.size());
}

double rec_loss(const Image& x, const Image& x_faa, const RadialBand& band) {
  if (!x.same_shape(x_faa)) throw DimensionError("rec_loss: shape mismatch");
  Image a = bandpass(x, band);
  Image b = bandpass(x_faa, band);
  double sum = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) sum += std::abs(av[k] - bv[k]);
  return sum / static_cast<double>(av.size());
}

Image rec_loss_gradient(const Image& x, const Image& x_faa, const RadialBand& band) {
  if (!x.same_shape(x_faa)) throw DimensionError("rec_loss_gradient: shape mismatch");
  return rec_terms(bandpass(x, band), x_faa, band).gradient;
}

double attack_objective(double task_loss, double gate_loss, double rec_loss) {
  if (!std::isfinite(task_loss) || !std::isfinite(gate_loss) || !std::isfinite(rec_loss)) {
    throw NumericError("attack objective received a non-finite term");
  }
  return task_loss - gate_loss - rec_loss;
}

std::vector<double> attack_backward(const AdversarialSample& sample, const Image& grad_wrt_input) {
  return attack_backward(sample, grad_wrt_input, 0.0);
}

std::vector<double> attack_backward(const AdversarialSample& sample, const Image& grad_wrt_input,
                                    double rec_weight) {
  if (!sample.has_deltas()) throw StateError("attack_backward needs the sample's deltas");
  if (!grad_wrt_input.same_shape(sample.raw)) {
    throw DimensionError("attack_backward: gradient shape mismatch");
  }
  if (rec_weight != 0.0 && !sample.has_shift()) {
    throw StateError("sample was composed without a reconstruction band");
  }
  Image masked = grad_wrt_input;
  auto raw = sample.raw.values();
  auto g = masked.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (raw[k] < 0.0 || raw[k] > 1.0) g[k] = 0.0;
  }
  // d rec_loss / d raw = R(sign(shift)) / M; R is a self-adjoint projection.
  Image sign(masked.height(), masked.width(), masked.channels());
  if (rec_weight != 0.0) {
    const double scale = rec_weight / static_cast<double>(sample.shift.size());
    auto sh = sample.shift.values();
    auto sv = sign.values();
    for (std::size_t k = 0; k < sv.size(); ++k) {
      sv[k] = sh[k] > 0.0 ? scale : (sh[k] < 0.0 ? -scale : 0.0);
    }
  }
  const int bands = sample.layout->band_count();
  std::vector<double> out(static_cast<std::size_t>(bands), 0.0);
  auto assignments = sample.layout->assignments();
  const double scale = 1.0 / static_cast<double>(masked.plane_size());
  for (int c = 0; c < masked.channels(); ++c) {
    const auto d = sample.difference[static_cast<std::size_t>(c)].values();
    if (rec_weight == 0.0) {
      Spectrum grad_spectrum = dft2(masked.plane(c), masked.height());
      const auto gs = grad_spectrum.values();
      for (std::size_t k = 0; k < gs.size(); ++k) {
        out[static_cast<std::size_t>(assignments[k])] +=
            scale * (d[k].real() * gs[k].real() + d[k].imag() * gs[k].imag());
      }
      continue;
    }
    auto [task, rec] = dft2_pair(masked.plane(c), sign.plane(c), masked.height());
    const auto gs = task.values();
    const auto rs = rec.values();
    const auto& mask = *sample.rec_mask;
    for (std::size_t k = 0; k < gs.size(); ++k) {
      cdouble u = gs[k];
      if (mask[k]) u -= rs[k];
      out[static_cast<std::size_t>(assignments[k])] +=
          scale * (d[k].real() * u.real() + d[k].imag() * u.imag());
    }
  }
  return out;
}

}  // namespace rda
