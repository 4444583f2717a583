#pragma once

#include <string>

#include "moco/train/trainer.hpp"

namespace moco {

// Training/probe configuration as JSON. Parsing rejects unknown keys at every
// level; serialization writes every field explicitly so a written config
// reloads to the identical struct ("resolved" configs next to run outputs).
train::TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json_text(const train::TrainConfig& cfg);

train::TrainConfig load_train_config(const std::string& path);
void write_resolved_config(const std::string& path, const train::TrainConfig& cfg);

}  // namespace moco
