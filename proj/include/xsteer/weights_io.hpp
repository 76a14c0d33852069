#pragma once

#include <string>

#include "xsteer/model.hpp"

namespace xsteer {

// Weight container: "CLW1" magic, u32 little-endian header length, JSON
// header {config, tensors: [{name, shape, offset}]}, then row-major
// little-endian float32 tensor data. Offsets are byte positions relative to
// the start of the payload; tensor order matches generation order.
void save_model(const ModelWeights& w, const std::string& path);
ModelWeights load_model(const std::string& path);

}  // namespace xsteer
