#include <fstream>

#include "doctest.h"
#include "rda/checkpoint.hpp"
#include "rda/error.hpp"
#include "support.hpp"

using namespace rda;

namespace {

void round_to_float(std::span<double> values) {
  for (double& v : values) v = static_cast<float>(v);
}

}  // namespace

TEST_CASE("model round trips") {
  test::TempDir dir("ckpt_model");
  for (auto kind : {ModelKind::linear, ModelKind::mlp}) {
    auto model = TaskModel::initialize(kind, 36, 5, 4, 3);
    round_to_float(model.mutable_params());
    checkpoint::save_model(dir.path / "m.bin", model);
    CHECK(checkpoint::load_model(dir.path / "m.bin") == model);
  }
  std::ifstream in(dir.path / "m.bin", std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header == "MODEL mlp 36 5 4");
}

TEST_CASE("gate round trips") {
  test::TempDir dir("ckpt_gate");
  auto gate = GateParams::with_probability(6, 0.2, 0.5);
  gate.keep(2) = 1.25;
  round_to_float(gate.logits);
  checkpoint::save_gate(dir.path / "g.bin", gate);
  auto loaded = checkpoint::load_gate(dir.path / "g.bin", 0.5);
  CHECK(loaded.logits == gate.logits);
  CHECK(loaded.temperature == 0.5);
}

TEST_CASE("corrupt checkpoints") {
  test::TempDir dir("ckpt_bad");
  CHECK_THROWS_AS(checkpoint::load_model(dir.path / "none"), IoError);
  std::ofstream(dir.path / "a", std::ios::binary) << "MODEL linear 4 2\n1234";
  CHECK_THROWS_AS(checkpoint::load_model(dir.path / "a"), IoError);
  std::ofstream(dir.path / "b", std::ios::binary) << "MODEL cnn 4 2\n";
  CHECK_THROWS_AS(checkpoint::load_model(dir.path / "b"), IoError);
  std::ofstream(dir.path / "c", std::ios::binary) << "GATE x\n";
  CHECK_THROWS_AS(checkpoint::load_gate(dir.path / "c"), IoError);
}
