#include "rda/gate.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rda/error.hpp"

namespace rda {

namespace {

// Perturb-category probability of a two-way tempered softmax.
double perturb_probability(double keep, double perturb, double temperature) {
  double a = keep / temperature;
  double b = perturb / temperature;
  double m = std::max(a, b);
  double ea = std::exp(a - m);
  double eb = std::exp(b - m);
  return eb / (ea + eb);
}

}  // namespace

GateParams GateParams::uniform(int band_count, double temperature) {
  if (band_count < 1) throw ParameterError("gate needs at least one band");
  return {std::vector<double>(2 * static_cast<std::size_t>(band_count), 0.0), temperature};
}

GateParams GateParams::with_probability(int band_count, double p, double temperature) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("gate probability must lie in (0, 1)");
  GateParams params = uniform(band_count, temperature);
  // The hard draw ignores the temperature: P(perturb) = sigmoid(perturb - keep).
  for (int n = 0; n < band_count; ++n) params.perturb(n) = std::log(p / (1.0 - p));
  return params;
}

void validate(const GateParams& params) {
  if (!(params.temperature > 0.0) || !std::isfinite(params.temperature)) {
    throw ParameterError("gate temperature must be positive, got " +
                         std::to_string(params.temperature));
  }
  if (params.logits.empty() || params.logits.size() % 2 != 0) {
    throw ParameterError("gate logits must hold one keep/perturb pair per band");
  }
  for (double l : params.logits) {
    if (!std::isfinite(l)) throw ParameterError("gate logits must be finite");
  }
}

int GateSample::count() const { return std::accumulate(hard.begin(), hard.end(), 0); }

GateSample GateSample::fixed(std::vector<int> hard) {
  GateSample sample;
  sample.soft.reserve(hard.size());
  for (int& g : hard) {
    if (g != 0 && g != 1) throw ParameterError("gate values must be 0 or 1");
    sample.soft.push_back(g);
  }
  sample.hard = std::move(hard);
  return sample;
}

GateSample gate_forward(const GateParams& params, Rng& rng) {
  validate(params);
  const int bands = params.band_count();
  GateSample sample;
  sample.temperature = params.temperature;
  sample.noise.resize(params.logits.size());
  for (double& g : sample.noise) g = rng.gumbel();
  sample.hard.resize(static_cast<std::size_t>(bands));
  for (int n = 0; n < bands; ++n) {
    const std::size_t k = 2 * static_cast<std::size_t>(n);
    double keep = params.logits[k] + sample.noise[k];
    double perturb = params.logits[k + 1] + sample.noise[k + 1];
    sample.hard[static_cast<std::size_t>(n)] = perturb > keep ? 1 : 0;
  }
  sample.soft = relaxed_perturb(params.logits, sample.noise, params.temperature);
  return sample;
}

std::vector<double> relaxed_perturb(std::span<const double> logits, std::span<const double> noise,
                                    double temperature) {
  if (logits.size() != noise.size()) throw DimensionError("noise record does not match logits");
  std::vector<double> soft(logits.size() / 2);
  for (std::size_t n = 0; n < soft.size(); ++n) {
    soft[n] = perturb_probability(logits[2 * n] + noise[2 * n], logits[2 * n + 1] + noise[2 * n + 1],
                                  temperature);
  }
  return soft;
}

bool budget_exceeded(int count, int band_count, double budget) {
  return static_cast<double>(count) > static_cast<double>(band_count) * budget;
}

double gate_loss(int count, int band_count, double budget) {
  if (!(budget > 0.0 && budget <= 1.0)) throw ParameterError("gate budget p must lie in (0, 1]");
  return budget_exceeded(count, band_count, budget) ? static_cast<double>(count) : 0.0;
}

double gate_loss(const GateSample& sample, int band_count, double budget) {
  return gate_loss(sample.count(), band_count, budget);
}

std::vector<double> gate_loss_gradient(const GateSample& sample, int band_count, double budget) {
  double active = gate_loss(sample, band_count, budget) > 0.0 ? 1.0 : 0.0;
  return std::vector<double>(sample.hard.size(), active);
}

std::vector<double> gate_backward(const GateSample& sample, std::span<const double> upstream) {
  const std::size_t bands = sample.hard.size();
  if (sample.noise.size() != 2 * bands || sample.soft.size() != bands) {
    throw StateError("gate_backward needs the sample's noise record");
  }
  if (upstream.size() != bands) throw DimensionError("gate_backward: upstream size mismatch");
  std::vector<double> grad(2 * bands, 0.0);
  for (std::size_t n = 0; n < bands; ++n) {
    double y = sample.soft[n];
    double dy = upstream[n] * y * (1.0 - y) / sample.temperature;
    grad[2 * n] = -dy;
    grad[2 * n + 1] = dy;
  }
  return grad;
}

}  // namespace rda
