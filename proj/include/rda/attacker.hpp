#ifndef RDA_ATTACKER_HPP
#define RDA_ATTACKER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rda/gate.hpp"
#include "rda/image.hpp"
#include "rda/random.hpp"
#include "rda/spectral.hpp"

namespace rda {

struct AttackerParams {
  GateParams gate;
  int band_count = 16;
  double budget = 0.1;
  RadialBand rec_band;

  static AttackerParams make(int band_count, double budget, double temperature,
                             RadialBand rec_band);
};

void validate(const AttackerParams& params);

/// Target-domain images supplying replacement bands, with their spectra
/// computed once up front.
class ReferencePool {
 public:
  explicit ReferencePool(std::vector<Image> images);

  std::size_t size() const { return images_.size(); }
  const Image& image(std::size_t k) const { return images_.at(k); }
  const std::vector<Spectrum>& spectra(std::size_t k) const { return spectra_.at(k); }
  /// Uniform draw with replacement.
  std::size_t pick(Rng& rng) const;

 private:
  std::vector<Image> images_;
  std::vector<std::vector<Spectrum>> spectra_;
};

struct AdversarialSample {
  Image raw;    // x^FAA before clamping
  Image image;  // clamped copy fed to the task model
  GateSample gate;
  std::size_t reference = 0;
  /// Per channel z_ref - z. Restricting it to band n and inverting gives the
  /// band's perturbation delta, so raw = x + sum_n g_n * delta(n).
  std::vector<Spectrum> difference;
  std::shared_ptr<const BandLayout> layout;
  /// Band-passed perturbation R(raw) - R(x), present when composed with a
  /// reconstruction band; rec_mask marks that band's coefficients.
  Image shift;
  std::shared_ptr<const std::vector<char>> rec_mask;

  bool has_deltas() const { return layout != nullptr && !difference.empty(); }
  bool has_shift() const { return rec_mask != nullptr; }
  Image delta(int band) const;
};

/// Replaces the gated bands of x with the reference's bands and inverts.
/// x_spectra must be dft2(x). A non-null rec_mask (see band_mask) also
/// fills the sample's shift.
AdversarialSample compose_attack(const Image& x, std::span<const Spectrum> x_spectra,
                                 const ReferencePool& pool, std::size_t reference,
                                 GateSample gate, int band_count,
                                 std::shared_ptr<const std::vector<char>> rec_mask = nullptr);

/// The Fourier attacker: draws a reference and a gate sample, then swaps
/// bands. Counts its invocations.
class FourierAttacker {
 public:
  FourierAttacker(AttackerParams params, std::shared_ptr<const ReferencePool> pool);

  AdversarialSample attack(const Image& x, Rng& rng);
  AdversarialSample attack(const Image& x, std::span<const Spectrum> x_spectra, Rng& rng);

  AttackerParams& params() { return params_; }
  const AttackerParams& params() const { return params_; }
  const ReferencePool& pool() const { return *pool_; }
  std::uint64_t calls() const { return calls_; }

 private:
  AttackerParams params_;
  std::shared_ptr<const ReferencePool> pool_;
  std::shared_ptr<const std::vector<char>> rec_mask_;
  std::uint64_t calls_ = 0;
};

AdversarialSample attack(const Image& x, const ReferencePool& pool, const AttackerParams& params,
                         Rng& rng);

/// Mean absolute difference of the band-passed images.
double rec_loss(const AdversarialSample& sample);
double rec_loss(const Image& x, const Image& x_faa, const RadialBand& band);
/// Subgradient of rec_loss w.r.t. x_faa.
Image rec_loss_gradient(const Image& x, const Image& x_faa, const RadialBand& band);

struct RecTerms {
  double loss = 0.0;
  Image gradient;  // w.r.t. x_faa
};
/// rec_loss and its gradient given an already band-passed clean image.
RecTerms rec_terms(const Image& x_passed, const Image& x_faa, const RadialBand& band);

/// task - gate - rec; the attacker maximizes it.
double attack_objective(double task_loss, double gate_loss, double rec_loss);

/// Gradient of a loss w.r.t. each gate value g_n, given the loss gradient
/// w.r.t. the model-facing (clamped) image. Uses the linearity of the swap:
/// dL/dg_n = <grad masked to unclamped pixels, delta(n)>, evaluated in the
/// frequency domain with one forward transform of the gradient.
std::vector<double> attack_backward(const AdversarialSample& sample, const Image& grad_wrt_input);
/// Same, for grad_wrt_input's loss minus rec_weight * rec_loss(sample). Both
/// spectra come from one paired transform per channel.
std::vector<double> attack_backward(const AdversarialSample& sample, const Image& grad_wrt_input,
                                    double rec_weight);

}  // namespace rda

#endif  // RDA_ATTACKER_HPP
