#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "xsteer/common.hpp"

// Shared container layout for the binary artifacts: 4 magic bytes, a u32
// little-endian header length, a UTF-8 JSON header, then a raw little-endian
// float32 payload. Tensors address into the payload with byte offsets
// relative to its start.

namespace xsteer::binio {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need swapping");

void write_container(const std::string& path, const char* magic,
                     const nlohmann::json& header, const float* payload,
                     size_t count);

struct Container {
  nlohmann::json header;
  std::vector<float> payload;
};

Container read_container(const std::string& path, const char* magic);

}  // namespace xsteer::binio
