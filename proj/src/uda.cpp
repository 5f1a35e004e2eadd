#include "rda/uda.hpp"

#include <cmath>

#include "rda/error.hpp"

namespace rda {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::baseline: return "baseline";
    case Mode::faa_s: return "faa-s";
    case Mode::faa_t: return "faa-t";
    case Mode::faa_full: return "faa";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "baseline") return Mode::baseline;
  if (text == "faa-s") return Mode::faa_s;
  if (text == "faa-t") return Mode::faa_t;
  if (text == "faa") return Mode::faa_full;
  throw UsageError("unknown mode '" + text + "' (expected baseline|faa-s|faa-t|faa)");
}

std::string to_string(UnsupKind kind) {
  return kind == UnsupKind::self_train ? "self" : "entropy";
}

UnsupKind parse_unsup(const std::string& text) {
  if (text == "self") return UnsupKind::self_train;
  if (text == "entropy") return UnsupKind::entropy;
  throw UsageError("unknown unsupervised loss '" + text + "' (expected self|entropy)");
}

void validate(const LossConfig& config) {
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw ParameterError("lambda must be a finite non-negative weight");
  }
  if (!(config.pseudo_threshold >= 0.0 && config.pseudo_threshold <= 1.0)) {
    throw ParameterError("pseudo-label threshold must lie in [0, 1]");
  }
}

PreparedBatch prepare_batch(std::span<const Image> images,
                            std::span<const std::vector<Spectrum>> spectra,
                            FourierAttacker* attacker, Rng& rng) {
  PreparedBatch batch;
  if (!attacker) {
    batch.inputs.assign(images.begin(), images.end());
    return batch;
  }
  if (!spectra.empty() && spectra.size() != images.size()) {
    throw DimensionError("prepare_batch: spectra do not match images");
  }
  batch.samples.reserve(images.size());
  batch.inputs.reserve(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    auto sample = spectra.empty() ? attacker->attack(images[k], rng)
                                  : attacker->attack(images[k], spectra[k], rng);
    batch.inputs.push_back(sample.image);
    batch.samples.push_back(std::move(sample));
  }
  return batch;
}

namespace {

LossResult empty_result(const TaskModel& model, std::span<const Image> inputs) {
  LossResult result;
  result.param_grad.assign(model.params().size(), 0.0);
  result.input_grads.reserve(inputs.size());
  for (const auto& x : inputs) {
    result.input_grads.emplace_back(x.height(), x.width(), x.channels());
  }
  return result;
}

}  // namespace

LossResult supervised_loss(const TaskModel& model, std::span<const Image> inputs,
                           std::span<const int> labels) {
  if (inputs.size() != labels.size()) throw DimensionError("inputs and labels differ in length");
  if (inputs.empty()) throw DimensionError("empty batch");
  LossResult result = empty_result(model, inputs);
  const double weight = 1.0 / static_cast<double>(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto cache = forward_cached(model, inputs[k]);
    result.value += weight * ce_loss(cache.prediction, labels[k]);
    backward_into(model, cache, LossKind::cross_entropy, labels[k], weight, result.param_grad,
                  result.input_grads[k].values());
  }
  result.counted = inputs.size();
  return result;
}

LossResult unsupervised_loss(const TaskModel& model, std::span<const Image> inputs,
                             std::span<const std::optional<int>> pseudo, UnsupKind kind) {
  if (inputs.empty()) throw DimensionError("empty batch");
  LossResult result = empty_result(model, inputs);
  if (kind == UnsupKind::entropy) {
    const double weight = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      auto cache = forward_cached(model, inputs[k]);
      result.value += weight * entropy(cache.prediction);
      backward_into(model, cache, LossKind::entropy, std::nullopt, weight, result.param_grad,
                    result.input_grads[k].values());
    }
    result.counted = inputs.size();
    return result;
  }

  if (pseudo.size() != inputs.size()) throw DimensionError("pseudo labels do not match inputs");
  std::size_t accepted = 0;
  for (const auto& label : pseudo) accepted += label.has_value();
  if (accepted == 0) {
    result.empty = true;
    return result;
  }
  const double weight = 1.0 / static_cast<double>(accepted);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!pseudo[k]) continue;
    auto cache = forward_cached(model, inputs[k]);
    result.value += weight * ce_loss(cache.prediction, *pseudo[k]);
    backward_into(model, cache, LossKind::cross_entropy, pseudo[k], weight, result.param_grad,
                  result.input_grads[k].values());
  }
  result.counted = accepted;
  return result;
}

BatchLoss source_loss(std::span<const Image> images, std::span<const int> labels,
                      const TaskModel& model, FourierAttacker* attacker,
                      const LossConfig& config, Rng& rng,
                      std::span<const std::vector<Spectrum>> spectra) {
  BatchLoss out;
  out.batch = prepare_batch(images, spectra, attacks_source(config.mode) ? attacker : nullptr, rng);
  out.loss = supervised_loss(model, out.batch.inputs, labels);
  return out;
}

BatchLoss target_loss(std::span<const Image> images, std::span<const std::optional<int>> pseudo,
                      const TaskModel& model, FourierAttacker* attacker,
                      const LossConfig& config, Rng& rng,
                      std::span<const std::vector<Spectrum>> spectra) {
  BatchLoss out;
  out.batch = prepare_batch(images, spectra, attacks_target(config.mode) ? attacker : nullptr, rng);
  out.loss = unsupervised_loss(model, out.batch.inputs, pseudo, config.unsup);
  return out;
}

double total_task_loss(double source, double target, double lambda) {
  return source + lambda * target;
}

}  // namespace rda
