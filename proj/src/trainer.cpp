#include "rda/trainer.hpp"

#include <cmath>
#include <string>

#include "rda/error.hpp"

namespace rda {

void validate(const OptimState& state) {
  if (!(state.base_lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(state.momentum >= 0.0 && state.momentum < 1.0)) {
    throw ParameterError("momentum must lie in [0, 1)");
  }
  if (!(state.weight_decay >= 0.0)) throw ParameterError("weight decay must be non-negative");
  if (!(state.poly_power >= 0.0)) throw ParameterError("poly power must be non-negative");
  if (state.max_iter < 1) throw ParameterError("max iterations must be positive");
}

double poly_lr(const OptimState& state, long iter) {
  double frac = 1.0 - static_cast<double>(iter) / static_cast<double>(state.max_iter);
  return state.base_lr * std::pow(std::max(frac, 0.0), state.poly_power);
}

void sgd_step(std::span<double> params, std::span<const double> grads, OptimState& state,
              long iter) {
  if (params.size() != grads.size()) throw DimensionError("sgd_step: gradient size mismatch");
  if (state.momentum_buffer.empty()) state.momentum_buffer.assign(params.size(), 0.0);
  if (state.momentum_buffer.size() != params.size()) {
    throw DimensionError("sgd_step: momentum buffer size mismatch");
  }
  const double lr = poly_lr(state, iter);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double g = grads[k] + state.weight_decay * params[k];
    state.momentum_buffer[k] = state.momentum * state.momentum_buffer[k] + g;
    params[k] -= lr * state.momentum_buffer[k];
  }
}

void validate(const RunConfig& config) {
  validate(config.loss);
  if (config.iters < 1) throw ParameterError("iterations must be positive");
  if (config.batch < 1) throw ParameterError("batch size must be positive");
  if (config.log_interval < 1) throw ParameterError("log interval must be positive");
  if (config.pseudo_warmup < 0) throw ParameterError("pseudo-label warm-up must be non-negative");
  if (config.hidden < 1) throw ParameterError("hidden width must be positive");
  if (!(config.tau > 0.0)) throw ParameterError("gate temperature must be positive");
  if (config.bands < 1) throw ParameterError("band count must be at least 1");
  if (!(config.budget > 0.0 && config.budget <= 1.0)) {
    throw ParameterError("gate budget p must lie in (0, 1]");
  }
  validate(config.rec_band);
  if (!(config.attacker_lr > 0.0)) throw ParameterError("attacker learning rate must be positive");
  if (!(config.attacker_momentum >= 0.0 && config.attacker_momentum < 1.0)) {
    throw ParameterError("attacker momentum must lie in [0, 1)");
  }
  OptimState probe{{}, config.lr, config.momentum, config.weight_decay, config.poly_power,
                   config.iters};
  validate(probe);
}

EvalResult evaluate(const TaskModel& model, const data::LabeledSet& set) {
  if (set.images.empty()) throw StateError("cannot evaluate on an empty dataset");
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < set.images.size(); ++k) {
    auto pred = forward(model, set.images[k]);
    loss += ce_loss(pred, set.labels[k]);
    correct += pred.argmax() == set.labels[k];
  }
  const double n = static_cast<double>(set.images.size());
  return {loss / n, static_cast<double>(correct) / n};
}

namespace {

int class_count(const data::LabeledSet& set) {
  int k = 0;
  for (int label : set.labels) k = std::max(k, label + 1);
  return k;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& from, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto k : idx) out.push_back(from[k]);
  return out;
}

}  // namespace

Trainer::Trainer(RunConfig config, const data::Datasets& datasets)
    : config_(std::move(config)),
      data_(datasets),
      model_(ModelKind::linear, 1, 1, 2),
      batch_rng_(derive_seed(config_.seed, 1)),
      attack_rng_(derive_seed(config_.seed, 2)) {
  validate(config_);
  if (data_.source_train.images.empty() || data_.target_train.images.empty()) {
    throw StateError("training needs non-empty source and target sets");
  }
  const Image& first = data_.source_train.images.front();
  model_ = TaskModel::initialize(config_.model_kind, static_cast<int>(first.size()),
                                 config_.hidden, class_count(data_.source_train),
                                 derive_seed(config_.seed, 3));
  model_opt_ = OptimState{{}, config_.lr, config_.momentum, config_.weight_decay,
                          config_.poly_power, config_.iters};
  attacker_opt_ = OptimState{{}, config_.attacker_lr, config_.attacker_momentum, 0.0, 0.0,
                             config_.iters};

  const Mode mode = config_.loss.mode;
  if (mode != Mode::baseline) {
    auto pool = std::make_shared<const ReferencePool>(data_.target_train.images);
    attacker_.emplace(AttackerParams::make(config_.bands, config_.budget, config_.tau,
                                           config_.rec_band),
                      std::move(pool));
  }
  if (attacks_source(mode)) {
    for (const auto& x : data_.source_train.images) {
      source_spectra_.push_back(dft2(x));
    }
  }
  if (attacks_target(mode)) {
    for (const auto& x : data_.target_train.images) {
      target_spectra_.push_back(dft2(x));
    }
  }
  pseudo_.assign(data_.target_train.size(), std::nullopt);
  steps_per_epoch_ = static_cast<long>((data_.target_train.size() + config_.batch - 1) /
                                       static_cast<std::size_t>(config_.batch));
}

void Trainer::refresh_pseudo_labels() {
  for (std::size_t k = 0; k < data_.target_train.size(); ++k) {
    pseudo_[k] = pseudo_label(forward(model_, data_.target_train.images[k]),
                              config_.loss.pseudo_threshold);
  }
}

void Trainer::sample_batches() {
  const auto b = static_cast<std::size_t>(config_.batch);
  source_idx_.resize(b);
  target_idx_.resize(b);
  for (auto& k : source_idx_) k = batch_rng_.below(data_.source_train.size());
  for (auto& k : target_idx_) k = batch_rng_.below(data_.target_train.size());
  source_batch_.reset();
  target_batch_.reset();
}

StepStats Trainer::defend() {
  if (source_idx_.empty()) throw StateError("defend called before sample_batches");
  FourierAttacker* attacker = this->attacker();
  const auto images = gather(data_.source_train.images, source_idx_);
  const auto labels = gather(data_.source_train.labels, source_idx_);
  const auto spectra = source_spectra_.empty() ? std::vector<std::vector<Spectrum>>{}
                                               : gather(source_spectra_, source_idx_);
  auto src = source_loss(images, labels, model_, attacker, config_.loss, attack_rng_, spectra);

  std::vector<double> grad = std::move(src.loss.param_grad);
  double target_value = 0.0;
  if (config_.loss.lambda > 0.0) {
    const auto t_images = gather(data_.target_train.images, target_idx_);
    const auto t_pseudo = gather(pseudo_, target_idx_);
    const auto t_spectra = target_spectra_.empty() ? std::vector<std::vector<Spectrum>>{}
                                                   : gather(target_spectra_, target_idx_);
    auto tgt = target_loss(t_images, t_pseudo, model_, attacker, config_.loss, attack_rng_,
                           t_spectra);
    target_value = tgt.loss.value;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      grad[k] += config_.loss.lambda * tgt.loss.param_grad[k];
    }
    target_batch_ = std::move(tgt.batch);
  }
  source_batch_ = std::move(src.batch);

  StepStats stats;
  stats.train_loss = total_task_loss(src.loss.value, target_value, config_.loss.lambda);
  if (!std::isfinite(stats.train_loss) || stats.train_loss > 1e3) {
    throw NumericError("training diverged at iteration " + std::to_string(iteration_) +
                       " (loss " + std::to_string(stats.train_loss) + ")");
  }
  sgd_step(model_.mutable_params(), grad, model_opt_, iteration_);
  return stats;
}

StepStats Trainer::attack() {
  StepStats stats;
  FourierAttacker* attacker = this->attacker();
  if (!attacker) return stats;
  if (!source_batch_) throw StateError("attack called before defend");

  struct Part {
    const PreparedBatch* batch;
    const std::vector<std::size_t>* idx;
    LossResult loss;
    double weight;
  };
  std::vector<Part> parts;
  if (source_batch_->attacked()) {
    auto labels = gather(data_.source_train.labels, source_idx_);
    parts.push_back({&*source_batch_, &source_idx_,
                     supervised_loss(model_, source_batch_->inputs, labels), 1.0});
  }
  if (target_batch_ && target_batch_->attacked()) {
    auto pseudo = gather(pseudo_, target_idx_);
    parts.push_back({&*target_batch_, &target_idx_,
                     unsupervised_loss(model_, target_batch_->inputs, pseudo, config_.loss.unsup),
                     config_.loss.lambda});
  }
  std::size_t total = 0;
  for (const auto& part : parts) total += part.batch->samples.size();
  if (total == 0) return stats;

  const auto& params = attacker->params();
  const double per_sample = 1.0 / static_cast<double>(total);
  std::vector<double> logit_grad(params.gate.logits.size(), 0.0);
  double task = 0.0;
  for (auto& part : parts) {
    task += part.weight * part.loss.value;
    for (std::size_t s = 0; s < part.batch->samples.size(); ++s) {
      const auto& sample = part.batch->samples[s];
      Image upstream = part.loss.input_grads[s];
      for (double& u : upstream.values()) u *= part.weight;
      auto gate_grad = attack_backward(sample, upstream, per_sample);
      auto budget_grad = gate_loss_gradient(sample.gate, params.band_count, params.budget);
      for (std::size_t n = 0; n < gate_grad.size(); ++n) gate_grad[n] -= per_sample * budget_grad[n];
      auto lg = gate_backward(sample.gate, gate_grad);
      for (std::size_t k = 0; k < lg.size(); ++k) logit_grad[k] += lg[k];

      stats.l_rec += per_sample * rec_loss(sample);
      stats.l_gat += per_sample * gate_loss(sample.gate, params.band_count, params.budget);
      stats.gate_count += per_sample * sample.gate.count();
    }
  }
  stats.attacked = total;
  stats.objective = attack_objective(task, stats.l_gat, stats.l_rec);

  // Ascent on the objective is descent on its negation.
  for (double& g : logit_grad) g = -g;
  sgd_step(attacker->params().gate.logits, logit_grad, attacker_opt_, iteration_);
  return stats;
}

void Trainer::step() {
  if (iteration_ >= config_.iters) throw StateError("training already finished");
  if (config_.loss.unsup == UnsupKind::self_train && config_.loss.lambda > 0.0 &&
      iteration_ >= config_.pseudo_warmup &&
      (iteration_ - config_.pseudo_warmup) % steps_per_epoch_ == 0) {
    refresh_pseudo_labels();
  }
  sample_batches();
  StepStats defended = defend();
  StepStats attacked = attack();
  window_loss_ += defended.train_loss;
  ++window_steps_;
  if (attacked.attacked > 0) {
    window_gate_ += attacked.gate_count;
    window_gat_ += attacked.l_gat;
    window_rec_ += attacked.l_rec;
    ++window_attack_steps_;
  }
  ++iteration_;
  if (iteration_ % config_.log_interval == 0 || iteration_ == config_.iters) log_row();
}

void Trainer::run() {
  while (iteration_ < config_.iters) step();
}

void Trainer::log_row() {
  MetricsRow row;
  row.iter = iteration_;
  row.train_loss = window_steps_ > 0 ? window_loss_ / static_cast<double>(window_steps_) : 0.0;
  if (window_attack_steps_ > 0) {
    const double n = static_cast<double>(window_attack_steps_);
    row.gate_count = window_gate_ / n;
    row.l_gat = window_gat_ / n;
    row.l_rec = window_rec_ / n;
  }
  auto src = evaluate(model_, data_.source_test);
  auto tgt = evaluate(model_, data_.target_test);
  row.src_test_loss = src.loss;
  row.tgt_test_loss = tgt.loss;
  row.tgt_acc = tgt.accuracy;
  row.lr = poly_lr(model_opt_, iteration_ - 1);
  metrics_.append(row);
  window_loss_ = window_gate_ = window_gat_ = window_rec_ = 0.0;
  window_steps_ = window_attack_steps_ = 0;
}

TrainResult train(const RunConfig& config, const data::Datasets& datasets) {
  Trainer trainer(config, datasets);
  trainer.run();
  TrainResult result{trainer.model(), std::nullopt, trainer.metrics()};
  if (const auto* attacker = trainer.attacker()) result.attacker = attacker->params();
  return result;
}

}  // namespace rda
