#ifndef RDA_MODEL_HPP
#define RDA_MODEL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rda/image.hpp"

namespace rda {

enum class ModelKind { linear, mlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Task classifier F. Parameters live in one flat vector so the optimizer
/// can treat them uniformly:
///   linear: W[K x D], b[K]
///   mlp:    W1[Hd x D], b1[Hd], W2[K x Hd], b2[K]  (rectifier hidden layer)
class TaskModel {
 public:
  TaskModel(ModelKind kind, int input_dim, int hidden, int classes);

  /// Scaled-normal initialization, std = sqrt(2 / fan_in); biases zero.
  static TaskModel initialize(ModelKind kind, int input_dim, int hidden, int classes,
                              std::uint64_t seed);

  ModelKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }

  std::span<const double> params() const { return params_; }
  /// Mutable access invalidates outstanding forward caches.
  std::span<double> mutable_params();
  std::uint64_t generation() const { return generation_; }

  friend bool operator==(const TaskModel& a, const TaskModel& b) {
    return a.kind_ == b.kind_ && a.input_dim_ == b.input_dim_ && a.hidden_ == b.hidden_ &&
           a.classes_ == b.classes_ && a.params_ == b.params_;
  }

 private:
  ModelKind kind_;
  int input_dim_;
  int hidden_;
  int classes_;
  std::vector<double> params_;
  std::uint64_t generation_;
};

struct Prediction {
  std::vector<double> logits;
  std::vector<double> probabilities;
  double log_normalizer = 0.0;  // log-sum-exp of the logits

  int argmax() const;
};

Prediction make_prediction(std::vector<double> logits);

struct ForwardCache {
  Prediction prediction;
  std::vector<double> input;
  std::vector<double> hidden;  // post-activation, mlp only
  std::uint64_t generation = 0;
};

Prediction forward(const TaskModel& model, const Image& image);
ForwardCache forward_cached(const TaskModel& model, const Image& image);

double ce_loss(const Prediction& prediction, int label);
double entropy(const Prediction& prediction);

enum class LossKind { cross_entropy, entropy };

struct Gradients {
  std::vector<double> params;
  std::vector<double> input;
};

/// Exact gradients of the chosen loss w.r.t. parameters and input.
Gradients backward(const TaskModel& model, const ForwardCache& cache, LossKind loss,
                   std::optional<int> label = std::nullopt);

/// Accumulating form used for batches: adds weight * dL/dparams into
/// param_grad and writes weight * dL/dinput into input_grad.
void backward_into(const TaskModel& model, const ForwardCache& cache, LossKind loss,
                   std::optional<int> label, double weight, std::span<double> param_grad,
                   std::span<double> input_grad);

/// Argmax class when its probability reaches the threshold, else nothing.
std::optional<int> pseudo_label(const Prediction& prediction, double threshold);

}  // namespace rda

#endif  // RDA_MODEL_HPP
