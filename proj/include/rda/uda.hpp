#ifndef RDA_UDA_HPP
#define RDA_UDA_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rda/attacker.hpp"
#include "rda/model.hpp"

namespace rda {

/// Which losses see FAA-perturbed inputs.
enum class Mode { baseline, faa_s, faa_t, faa_full };
enum class UnsupKind { self_train, entropy };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);
std::string to_string(UnsupKind kind);
UnsupKind parse_unsup(const std::string& text);

inline bool attacks_source(Mode mode) { return mode == Mode::faa_s || mode == Mode::faa_full; }
inline bool attacks_target(Mode mode) { return mode == Mode::faa_t || mode == Mode::faa_full; }

struct LossConfig {
  Mode mode = Mode::baseline;
  UnsupKind unsup = UnsupKind::self_train;
  double lambda = 1.0;
  double pseudo_threshold = 0.9;
};

void validate(const LossConfig& config);

/// Model-facing inputs of one batch, with the adversarial samples that
/// produced them when the batch was attacked.
struct PreparedBatch {
  std::vector<Image> inputs;
  std::vector<AdversarialSample> samples;  // empty when not attacked
  bool attacked() const { return !samples.empty(); }
};

/// Passes images through the attacker when `attacker` is non-null. When
/// spectra are given they must be dft2 of the matching images.
PreparedBatch prepare_batch(std::span<const Image> images,
                            std::span<const std::vector<Spectrum>> spectra,
                            FourierAttacker* attacker, Rng& rng);

struct LossResult {
  double value = 0.0;
  std::size_t counted = 0;
  bool empty = false;  // every sample abstained
  std::vector<double> param_grad;
  std::vector<Image> input_grads;  // gradient of `value` w.r.t. each input
};

/// Mean cross-entropy over the batch.
LossResult supervised_loss(const TaskModel& model, std::span<const Image> inputs,
                           std::span<const int> labels);

/// self_train: mean cross-entropy against pseudo labels over accepted
/// samples (abstentions excluded); entropy: mean prediction entropy.
LossResult unsupervised_loss(const TaskModel& model, std::span<const Image> inputs,
                             std::span<const std::optional<int>> pseudo, UnsupKind kind);

struct BatchLoss {
  LossResult loss;
  PreparedBatch batch;
};

/// Supervised source loss; inputs are attacked iff the mode attacks source.
BatchLoss source_loss(std::span<const Image> images, std::span<const int> labels,
                      const TaskModel& model, FourierAttacker* attacker,
                      const LossConfig& config, Rng& rng,
                      std::span<const std::vector<Spectrum>> spectra = {});

/// Unsupervised target loss; inputs are attacked iff the mode attacks target.
BatchLoss target_loss(std::span<const Image> images, std::span<const std::optional<int>> pseudo,
                      const TaskModel& model, FourierAttacker* attacker,
                      const LossConfig& config, Rng& rng,
                      std::span<const std::vector<Spectrum>> spectra = {});

double total_task_loss(double source, double target, double lambda);

}  // namespace rda

#endif  // RDA_UDA_HPP
