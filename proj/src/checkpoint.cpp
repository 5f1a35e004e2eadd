#include "rda/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "rda/error.hpp"
#include "rda/image_io.hpp"

namespace rda::checkpoint {

namespace {

struct Split {
  std::string header;
  std::string payload;
};

Split read_with_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string bytes = buffer.str();
  auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw IoError("missing header in " + path.string());
  return {bytes.substr(0, newline), bytes.substr(newline + 1)};
}

std::vector<double> decode_floats(const std::string& payload, std::size_t count,
                                  const std::filesystem::path& path) {
  if (payload.size() != 4 * count) throw IoError("payload size mismatch in " + path.string());
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = io::read_f32_le(payload.data() + 4 * k);
  return values;
}

}  // namespace

void save_model(const std::filesystem::path& path, const TaskModel& model) {
  std::string out = "MODEL " + to_string(model.kind()) + " " + std::to_string(model.input_dim());
  if (model.kind() == ModelKind::mlp) out += " " + std::to_string(model.hidden());
  out += " " + std::to_string(model.classes()) + "\n";
  for (double v : model.params()) io::append_f32_le(out, static_cast<float>(v));
  io::write_atomic(path, out);
}

TaskModel load_model(const std::filesystem::path& path) {
  auto [header, payload] = read_with_header(path);
  std::istringstream fields(header);
  std::string magic, kind_text;
  int d = 0, h = 0, k = 0;
  if (!(fields >> magic >> kind_text) || magic != "MODEL") {
    throw IoError("malformed model header in " + path.string());
  }
  ModelKind kind;
  try {
    kind = parse_model_kind(kind_text);
  } catch (const ParameterError&) {
    throw IoError("unknown model kind '" + kind_text + "' in " + path.string());
  }
  bool ok = kind == ModelKind::linear ? static_cast<bool>(fields >> d >> k)
                                      : static_cast<bool>(fields >> d >> h >> k);
  if (!ok) throw IoError("malformed model dimensions in " + path.string());
  TaskModel model(kind, d, h, k);
  auto values = decode_floats(payload, model.params().size(), path);
  auto params = model.mutable_params();
  std::copy(values.begin(), values.end(), params.begin());
  return model;
}

void save_gate(const std::filesystem::path& path, const GateParams& gate) {
  std::string out = "GATE " + std::to_string(gate.band_count()) + "\n";
  for (double v : gate.logits) io::append_f32_le(out, static_cast<float>(v));
  io::write_atomic(path, out);
}

GateParams load_gate(const std::filesystem::path& path, double temperature) {
  auto [header, payload] = read_with_header(path);
  std::istringstream fields(header);
  std::string magic;
  int bands = 0;
  if (!(fields >> magic >> bands) || magic != "GATE" || bands < 1) {
    throw IoError("malformed gate header in " + path.string());
  }
  GateParams gate;
  gate.temperature = temperature;
  gate.logits = decode_floats(payload, 2 * static_cast<std::size_t>(bands), path);
  validate(gate);
  return gate;
}

}  // namespace rda::checkpoint
