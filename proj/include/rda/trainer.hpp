#ifndef RDA_TRAINER_HPP
#define RDA_TRAINER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rda/attacker.hpp"
#include "rda/data.hpp"
#include "rda/metrics.hpp"
#include "rda/model.hpp"
#include "rda/uda.hpp"

namespace rda {

/// SGD with momentum, L2 weight decay and polynomial learning-rate decay.
struct OptimState {
  std::vector<double> momentum_buffer;
  double base_lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double poly_power = 0.9;
  long max_iter = 1;
};

void validate(const OptimState& state);

/// base_lr * (1 - iter / max_iter)^power
double poly_lr(const OptimState& state, long iter);

/// grad += wd * param; buf = m * buf + grad; param -= lr_t * buf.
void sgd_step(std::span<double> params, std::span<const double> grads, OptimState& state,
              long iter);

struct RunConfig {
  LossConfig loss;
  ModelKind model_kind = ModelKind::mlp;
  int hidden = 64;
  long iters = 5000;
  int batch = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double poly_power = 0.9;
  int bands = 16;
  double budget = 0.1;
  double tau = 1.0;
  RadialBand rec_band{1.0 / 6.0, 0.5};
  double attacker_lr = 1e-2;
  double attacker_momentum = 0.9;
  long log_interval = 50;
  /// Target samples abstain until this iteration; labels then refresh once per epoch.
  long pseudo_warmup = 300;
  std::uint64_t seed = 0;
};

void validate(const RunConfig& config);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Clean-input mean cross-entropy and accuracy, in dataset order.
EvalResult evaluate(const TaskModel& model, const data::LabeledSet& set);

/// Per-phase statistics of one iteration.
struct StepStats {
  double train_loss = 0.0;
  double gate_count = 0.0;
  double l_gat = 0.0;
  double l_rec = 0.0;
  double objective = 0.0;
  std::size_t attacked = 0;
};

/// Alternating defend/attack training. step() runs one iteration; the
/// phase methods are exposed so each can be exercised in isolation.
class Trainer {
 public:
  Trainer(RunConfig config, const data::Datasets& datasets);

  /// Sample batches, defend, attack, and log when due.
  void step();
  void run();

  void sample_batches();
  /// Update the task model on the current batches with the attacker frozen.
  StepStats defend();
  /// Update the attacker on the current batches with the task model frozen.
  StepStats attack();
  void refresh_pseudo_labels();

  long iteration() const { return iteration_; }
  const RunConfig& config() const { return config_; }
  const TaskModel& model() const { return model_; }
  TaskModel& model() { return model_; }
  FourierAttacker* attacker() { return attacker_ ? &*attacker_ : nullptr; }
  const FourierAttacker* attacker() const { return attacker_ ? &*attacker_ : nullptr; }
  const RunMetrics& metrics() const { return metrics_; }
  const std::vector<std::optional<int>>& pseudo_labels() const { return pseudo_; }

 private:
  void log_row();

  RunConfig config_;
  const data::Datasets& data_;
  TaskModel model_;
  std::optional<FourierAttacker> attacker_;
  OptimState model_opt_;
  OptimState attacker_opt_;
  Rng batch_rng_;
  Rng attack_rng_;

  std::vector<std::vector<Spectrum>> source_spectra_;
  std::vector<std::vector<Spectrum>> target_spectra_;
  std::vector<std::optional<int>> pseudo_;

  std::vector<std::size_t> source_idx_;
  std::vector<std::size_t> target_idx_;
  std::optional<PreparedBatch> source_batch_;
  std::optional<PreparedBatch> target_batch_;

  long iteration_ = 0;
  long steps_per_epoch_ = 1;
  RunMetrics metrics_;
  double window_loss_ = 0.0;
  double window_gate_ = 0.0;
  double window_gat_ = 0.0;
  double window_rec_ = 0.0;
  long window_steps_ = 0;
  long window_attack_steps_ = 0;
};

struct TrainResult {
  TaskModel model;
  std::optional<AttackerParams> attacker;
  RunMetrics metrics;
};

TrainResult train(const RunConfig& config, const data::Datasets& datasets);

}  // namespace rda

#endif  // RDA_TRAINER_HPP
