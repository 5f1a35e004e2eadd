#include <cmath>

#include "doctest.h"
#include "rda/error.hpp"
#include "rda/uda.hpp"
#include "support.hpp"

using namespace rda;
using rda::test::random_image;

namespace {

std::vector<Image> images(int n, std::uint64_t seed) {
  std::vector<Image> out;
  for (int k = 0; k < n; ++k) out.push_back(random_image(8, 8, 1, seed + static_cast<std::uint64_t>(k)));
  return out;
}

FourierAttacker make_attacker(GateParams gate) {
  auto pool = std::make_shared<const ReferencePool>(images(3, 500));
  auto params = AttackerParams::make(gate.band_count(), 0.1, 1.0, {});
  params.gate = std::move(gate);
  return FourierAttacker(params, pool);
}

}  // namespace

TEST_CASE("mode algebra through attack counters") {
  auto model = TaskModel::initialize(ModelKind::mlp, 64, 8, 3, 1);
  auto src = images(4, 10);
  auto tgt = images(4, 20);
  std::vector<int> labels{0, 1, 2, 0};
  std::vector<std::optional<int>> pseudo{0, std::nullopt, 2, 1};
  struct Expect {
    Mode mode;
    std::uint64_t source_calls, target_calls;
  };
  for (auto e : {Expect{Mode::baseline, 0, 0}, Expect{Mode::faa_s, 4, 0}, Expect{Mode::faa_t, 0, 4},
                 Expect{Mode::faa_full, 4, 4}}) {
    auto attacker = make_attacker(GateParams::uniform(8));
    LossConfig config;
    config.mode = e.mode;
    Rng rng(3);
    FourierAttacker* a = e.mode == Mode::baseline ? nullptr : &attacker;
    auto s = source_loss(src, labels, model, a, config, rng);
    CHECK(attacker.calls() == e.source_calls);
    CHECK(s.batch.attacked() == (e.source_calls > 0));
    auto t = target_loss(tgt, pseudo, model, a, config, rng);
    CHECK(attacker.calls() == e.source_calls + e.target_calls);
    CHECK(t.batch.attacked() == (e.target_calls > 0));
  }
}

TEST_CASE("baseline source loss is the plain mean cross-entropy") {
  auto model = TaskModel::initialize(ModelKind::linear, 64, 1, 3, 2);
  auto src = images(5, 30);
  std::vector<int> labels{0, 1, 2, 1, 0};
  LossConfig config;
  Rng rng(1);
  auto s = source_loss(src, labels, model, nullptr, config, rng);
  double expected = 0.0;
  for (std::size_t k = 0; k < src.size(); ++k) expected += ce_loss(forward(model, src[k]), labels[k]);
  expected /= 5.0;
  CHECK(std::abs(s.loss.value - expected) <= 1e-12);
  CHECK(s.loss.counted == 5);
}

TEST_CASE("zero gate under faa_s equals the baseline loss exactly") {
  auto model = TaskModel::initialize(ModelKind::mlp, 64, 8, 3, 3);
  auto src = images(4, 40);
  std::vector<int> labels{2, 1, 0, 1};
  GateParams closed = GateParams::uniform(8);
  for (int n = 0; n < 8; ++n) {
    closed.keep(n) = 1e6;
    closed.perturb(n) = -1e6;
  }
  auto attacker = make_attacker(closed);
  LossConfig base, faa;
  faa.mode = Mode::faa_s;
  Rng r1(4), r2(4);
  auto plain = source_loss(src, labels, model, nullptr, base, r1);
  auto attacked = source_loss(src, labels, model, &attacker, faa, r2);
  CHECK(attacked.batch.attacked());
  CHECK(plain.loss.value == attacked.loss.value);
  CHECK(plain.loss.param_grad == attacked.loss.param_grad);
}

TEST_CASE("target loss") {
  auto model = TaskModel::initialize(ModelKind::mlp, 64, 8, 4, 5);
  auto tgt = images(4, 60);
  LossConfig config;
  Rng rng(1);
  SUBCASE("all abstain gives an empty zero loss") {
    std::vector<std::optional<int>> none(4);
    auto t = target_loss(tgt, none, model, nullptr, config, rng);
    CHECK(t.loss.empty);
    CHECK(t.loss.value == 0.0);
    CHECK(t.loss.counted == 0);
    for (double g : t.loss.param_grad) CHECK(g == 0.0);
  }
  SUBCASE("mean over accepted samples only") {
    std::vector<std::optional<int>> pseudo{3, std::nullopt, 0, std::nullopt};
    auto t = target_loss(tgt, pseudo, model, nullptr, config, rng);
    const double expected = (ce_loss(forward(model, tgt[0]), 3) + ce_loss(forward(model, tgt[2]), 0)) / 2.0;
    CHECK(std::abs(t.loss.value - expected) <= 1e-12);
    CHECK(t.loss.counted == 2);
    CHECK_FALSE(t.loss.empty);
  }
  SUBCASE("entropy of uniform predictions is ln K") {
    TaskModel zero(ModelKind::mlp, 64, 8, 4);
    config.unsup = UnsupKind::entropy;
    std::vector<std::optional<int>> none(4);
    auto t = target_loss(tgt, none, zero, nullptr, config, rng);
    CHECK(t.loss.value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SUBCASE("entropy mean matches duplicate arithmetic") {
    config.unsup = UnsupKind::entropy;
    std::vector<std::optional<int>> none(4);
    auto t = target_loss(tgt, none, model, nullptr, config, rng);
    double expected = 0.0;
    for (const auto& x : tgt) expected += entropy(forward(model, x));
    CHECK(std::abs(t.loss.value - expected / 4.0) <= 1e-12);
  }
}

TEST_CASE("input gradients are per-sample gradients of the batch mean") {
  auto model = TaskModel::initialize(ModelKind::mlp, 64, 8, 3, 7);
  auto src = images(3, 70);
  std::vector<int> labels{0, 2, 1};
  auto r = supervised_loss(model, src, labels);
  REQUIRE(r.input_grads.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    auto g = backward(model, forward_cached(model, src[k]), LossKind::cross_entropy, labels[k]);
    for (std::size_t i = 0; i < g.input.size(); ++i) {
      CHECK(r.input_grads[k].values()[i] == doctest::Approx(g.input[i] / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("total loss and configuration") {
  CHECK(total_task_loss(1.0, 0.5, 0.0) == 1.0);
  CHECK(total_task_loss(1.0, 0.5, 1.0) == 1.5);
  CHECK(total_task_loss(1.0, 0.5, 2.0) == 2.0);
  LossConfig bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(validate(bad), ParameterError);
  CHECK(parse_mode("faa-s") == Mode::faa_s);
  CHECK(parse_mode("faa") == Mode::faa_full);
  CHECK(to_string(Mode::faa_t) == "faa-t");
  CHECK(parse_unsup("entropy") == UnsupKind::entropy);
  CHECK_THROWS(parse_mode("fda"));
  CHECK(attacks_source(Mode::faa_full));
  CHECK_FALSE(attacks_target(Mode::faa_s));
}
