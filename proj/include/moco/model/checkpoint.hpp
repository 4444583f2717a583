#pragma once

#include <string>

#include "moco/model/policy.hpp"

namespace moco::model {

// Binary checkpoint: 8-byte magic, u64 little-endian header length, JSON
// header {problem, kappa, config, params manifest with byte offsets}, then
// little-endian f64 blobs in manifest order.
void save_checkpoint(const std::string& path, const Policy& policy);
Policy load_checkpoint(const std::string& path);

}  // namespace moco::model
