#ifndef RDA_GATE_HPP
#define RDA_GATE_HPP

#include <span>
#include <vector>

#include "rda/random.hpp"

namespace rda {

/// Learnable per-band keep/perturb logits. logits[2n] is the keep category
/// of band n, logits[2n + 1] the perturb category.
struct GateParams {
  std::vector<double> logits;
  double temperature = 1.0;

  int band_count() const { return static_cast<int>(logits.size() / 2); }
  double& keep(int n) { return logits[2 * static_cast<std::size_t>(n)]; }
  double& perturb(int n) { return logits[2 * static_cast<std::size_t>(n) + 1]; }

  /// All logits zero: every band is perturbed with probability 1/2.
  static GateParams uniform(int band_count, double temperature = 1.0);
  /// Logits chosen so each band is perturbed with probability p.
  static GateParams with_probability(int band_count, double p, double temperature = 1.0);
};

void validate(const GateParams& params);

struct GateSample {
  std::vector<int> hard;      // g_n in {0, 1}
  std::vector<double> soft;   // relaxed perturb probability y_n
  std::vector<double> noise;  // Gumbel draws, same layout as the logits
  double temperature = 1.0;

  int band_count() const { return static_cast<int>(hard.size()); }
  int count() const;
  /// A sample with fixed hard values, e.g. read from a gate file. It carries
  /// no noise record and therefore cannot be back-propagated.
  static GateSample fixed(std::vector<int> hard);
};

/// Draws one Gumbel pair per band. hard_n = 1 iff the noisy perturb logit
/// strictly exceeds the noisy keep logit.
GateSample gate_forward(const GateParams& params, Rng& rng);

/// Recomputes the relaxed perturb probabilities for a given noise record;
/// the function that gate_backward differentiates.
std::vector<double> relaxed_perturb(std::span<const double> logits, std::span<const double> noise,
                                    double temperature);

/// Budget hinge: the selected count s if s > N * p, else 0.
double gate_loss(const GateSample& sample, int band_count, double budget);
double gate_loss(int count, int band_count, double budget);
bool budget_exceeded(int count, int band_count, double budget);

/// d gate_loss / d g_n: one for every band while the hinge is active.
std::vector<double> gate_loss_gradient(const GateSample& sample, int band_count, double budget);

/// Straight-through backward: upstream gradient w.r.t. each g_n is passed to
/// y_n unchanged, then through the tempered softmax to the 2N logits.
std::vector<double> gate_backward(const GateSample& sample, std::span<const double> upstream);

}  // namespace rda

#endif  // RDA_GATE_HPP
