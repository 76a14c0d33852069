#include "binio.hpp"

#include <cstring>
#include <fstream>

namespace xsteer::binio {

void write_container(const std::string& path, const char* magic,
                     const nlohmann::json& header, const float* payload,
                     size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out.write(magic, 4);
  const std::string h = header.dump();
  const std::uint32_t len = static_cast<std::uint32_t>(h.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  if (count > 0)
    out.write(reinterpret_cast<const char*>(payload),
              static_cast<std::streamsize>(count * sizeof(float)));
  if (!out) throw ValidationError("short write to " + path);
}

Container read_container(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw ParseError(path + ": truncated container");
  if (std::memcmp(bytes.data(), magic, 4) != 0)
    throw ParseError(path + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  if (8 + static_cast<size_t>(len) > bytes.size())
    throw ParseError(path + ": header length exceeds file size");
  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const std::exception& e) {
    throw ParseError(path + ": header is not valid JSON: " + e.what());
  }
  const size_t payload_bytes = bytes.size() - 8 - len;
  if (payload_bytes % sizeof(float) != 0)
    throw ParseError(path + ": payload size is not a multiple of 4 bytes");
  c.payload.resize(payload_bytes / sizeof(float));
  if (payload_bytes > 0)
    std::memcpy(c.payload.data(), bytes.data() + 8 + len, payload_bytes);
  return c;
}

}  // namespace xsteer::binio
