#ifndef RDA_CHECKPOINT_HPP
#define RDA_CHECKPOINT_HPP

#include <filesystem>

#include "rda/gate.hpp"
#include "rda/model.hpp"

namespace rda::checkpoint {

// Model: "MODEL linear <D> <K>\n" or "MODEL mlp <D> <H> <K>\n", then the
// flat parameter vector as little-endian float32.
void save_model(const std::filesystem::path& path, const TaskModel& model);
TaskModel load_model(const std::filesystem::path& path);

// Gate: "GATE <N>\n" then N keep/perturb logit pairs as little-endian float32.
void save_gate(const std::filesystem::path& path, const GateParams& gate);
GateParams load_gate(const std::filesystem::path& path, double temperature = 1.0);

}  // namespace rda::checkpoint

#endif  // RDA_CHECKPOINT_HPP
