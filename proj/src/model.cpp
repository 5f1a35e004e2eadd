#include "rda/model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "rda/error.hpp"
#include "rda/random.hpp"

namespace rda {

namespace {

std::uint64_t next_generation() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

std::size_t param_count(ModelKind kind, int d, int h, int k) {
  auto D = static_cast<std::size_t>(d), H = static_cast<std::size_t>(h),
       K = static_cast<std::size_t>(k);
  return kind == ModelKind::linear ? K * D + K : H * D + H + K * H + K;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::linear ? "linear" : "mlp"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "linear") return ModelKind::linear;
  if (text == "mlp") return ModelKind::mlp;
  throw ParameterError("unknown model kind '" + text + "'");
}

TaskModel::TaskModel(ModelKind kind, int input_dim, int hidden, int classes)
    : kind_(kind),
      input_dim_(input_dim),
      hidden_(kind == ModelKind::linear ? 0 : hidden),
      classes_(classes),
      generation_(next_generation()) {
  if (input_dim < 1 || classes < 2 || (kind == ModelKind::mlp && hidden < 1)) {
    throw ParameterError("invalid model dimensions");
  }
  params_.assign(param_count(kind_, input_dim_, hidden_, classes_), 0.0);
}

TaskModel TaskModel::initialize(ModelKind kind, int input_dim, int hidden, int classes,
                                std::uint64_t seed) {
  TaskModel model(kind, input_dim, hidden, classes);
  Rng rng(seed);
  auto p = model.mutable_params();
  const auto D = static_cast<std::size_t>(input_dim);
  const auto K = static_cast<std::size_t>(classes);
  if (kind == ModelKind::linear) {
    const double std = std::sqrt(2.0 / input_dim);
    for (std::size_t k = 0; k < K * D; ++k) p[k] = std * rng.normal();
  } else {
    const auto H = static_cast<std::size_t>(model.hidden());
    const double std1 = std::sqrt(2.0 / input_dim);
    const double std2 = std::sqrt(2.0 / model.hidden());
    for (std::size_t k = 0; k < H * D; ++k) p[k] = std1 * rng.normal();
    const std::size_t w2 = H * D + H;
    for (std::size_t k = 0; k < K * H; ++k) p[w2 + k] = std2 * rng.normal();
  }
  return model;
}

std::span<double> TaskModel::mutable_params() {
  generation_ = next_generation();
  return params_;
}

int Prediction::argmax() const {
  return static_cast<int>(std::max_element(probabilities.begin(), probabilities.end()) -
                          probabilities.begin());
}

Prediction make_prediction(std::vector<double> logits) {
  Prediction p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  p.probabilities.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p.probabilities[k] = std::exp(logits[k] - m);
    sum += p.probabilities[k];
  }
  for (double& v : p.probabilities) v /= sum;
  p.log_normalizer = m + std::log(sum);
  p.logits = std::move(logits);
  return p;
}

namespace {

// Four partial sums so the compiler can keep independent chains in flight.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t d = 0;
  for (; d + 4 <= n; d += 4) {
    s0 += a[d] * b[d];
    s1 += a[d + 1] * b[d + 1];
    s2 += a[d + 2] * b[d + 2];
    s3 += a[d + 3] * b[d + 3];
  }
  for (; d < n; ++d) s0 += a[d] * b[d];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

ForwardCache forward_cached(const TaskModel& model, const Image& image) {
  if (image.size() != static_cast<std::size_t>(model.input_dim())) {
    throw DimensionError("model input width " + std::to_string(model.input_dim()) +
                         " does not match image size " + std::to_string(image.size()));
  }
  ForwardCache cache;
  cache.generation = model.generation();
  cache.input.assign(image.values().begin(), image.values().end());
  const auto p = model.params();
  const auto D = static_cast<std::size_t>(model.input_dim());
  const auto K = static_cast<std::size_t>(model.classes());
  const double* x = cache.input.data();

  std::vector<double> logits(K);
  if (model.kind() == ModelKind::linear) {
    for (std::size_t k = 0; k < K; ++k) {
      const double* w = p.data() + k * D;
      logits[k] = p[K * D + k] + dot(w, x, D);
    }
  } else {
    const auto H = static_cast<std::size_t>(model.hidden());
    cache.hidden.resize(H);
    for (std::size_t h = 0; h < H; ++h) {
      const double* w = p.data() + h * D;
      const double acc = p[H * D + h] + dot(w, x, D);
      cache.hidden[h] = acc > 0.0 ? acc : 0.0;
    }
    const std::size_t w2 = H * D + H;
    const std::size_t b2 = w2 + K * H;
    for (std::size_t k = 0; k < K; ++k) {
      const double* w = p.data() + w2 + k * H;
      double acc = p[b2 + k];
      for (std::size_t h = 0; h < H; ++h) acc += w[h] * cache.hidden[h];
      logits[k] = acc;
    }
  }
  cache.prediction = make_prediction(std::move(logits));
  return cache;
}

Prediction forward(const TaskModel& model, const Image& image) {
  return forward_cached(model, image).prediction;
}

double ce_loss(const Prediction& prediction, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= prediction.logits.size()) {
    throw ParameterError("label out of range");
  }
  return prediction.log_normalizer - prediction.logits[static_cast<std::size_t>(label)];
}

double entropy(const Prediction& prediction) {
  double h = 0.0;
  for (std::size_t k = 0; k < prediction.probabilities.size(); ++k) {
    double p = prediction.probabilities[k];
    if (p > 0.0) h -= p * (prediction.logits[k] - prediction.log_normalizer);
  }
  return h;
}

void backward_into(const TaskModel& model, const ForwardCache& cache, LossKind loss,
                   std::optional<int> label, double weight, std::span<double> param_grad,
                   std::span<double> input_grad) {
  if (cache.generation != model.generation()) {
    throw StateError("forward cache is stale: model parameters changed since forward");
  }
  const auto D = static_cast<std::size_t>(model.input_dim());
  const auto K = static_cast<std::size_t>(model.classes());
  if (param_grad.size() != model.params().size() || input_grad.size() != D) {
    throw DimensionError("gradient buffer size mismatch");
  }
  const auto& pred = cache.prediction;

  // dL/dlogits
  std::vector<double> delta(K);
  if (loss == LossKind::cross_entropy) {
    if (!label) throw ParameterError("cross-entropy backward needs a label");
    for (std::size_t k = 0; k < K; ++k) delta[k] = pred.probabilities[k];
    delta[static_cast<std::size_t>(*label)] -= 1.0;
  } else {
    const double h = entropy(pred);
    for (std::size_t k = 0; k < K; ++k) {
      double p = pred.probabilities[k];
      delta[k] = -p * ((pred.logits[k] - pred.log_normalizer) + h);
    }
  }
  for (double& v : delta) v *= weight;

  const auto p = model.params();
  const double* x = cache.input.data();
  std::fill(input_grad.begin(), input_grad.end(), 0.0);
  if (model.kind() == ModelKind::linear) {
    for (std::size_t k = 0; k < K; ++k) {
      double* gw = param_grad.data() + k * D;
      const double* w = p.data() + k * D;
      const double dk = delta[k];
      for (std::size_t d = 0; d < D; ++d) {
        gw[d] += dk * x[d];
        input_grad[d] += dk * w[d];
      }
      param_grad[K * D + k] += dk;
    }
    return;
  }

  const auto H = static_cast<std::size_t>(model.hidden());
  const std::size_t w2 = H * D + H;
  const std::size_t b2 = w2 + K * H;
  std::vector<double> dhidden(H, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double dk = delta[k];
    double* gw = param_grad.data() + w2 + k * H;
    const double* w = p.data() + w2 + k * H;
    for (std::size_t h = 0; h < H; ++h) {
      gw[h] += dk * cache.hidden[h];
      dhidden[h] += dk * w[h];
    }
    param_grad[b2 + k] += dk;
  }
  for (std::size_t h = 0; h < H; ++h) {
    if (cache.hidden[h] <= 0.0) continue;
    const double dh = dhidden[h];
    double* gw = param_grad.data() + h * D;
    const double* w = p.data() + h * D;
    for (std::size_t d = 0; d < D; ++d) {
      gw[d] += dh * x[d];
      input_grad[d] += dh * w[d];
    }
    param_grad[H * D + h] += dh;
  }
}

Gradients backward(const TaskModel& model, const ForwardCache& cache, LossKind loss,
                   std::optional<int> label) {
  Gradients g;
  g.params.assign(model.params().size(), 0.0);
  g.input.assign(static_cast<std::size_t>(model.input_dim()), 0.0);
  backward_into(model, cache, loss, label, 1.0, g.params, g.input);
  return g;
}

std::optional<int> pseudo_label(const Prediction& prediction, double threshold) {
  int best = prediction.argmax();
  if (prediction.probabilities[static_cast<std::size_t>(best)] >= threshold) return best;
  return std::nullopt;
}

}  // namespace rda
