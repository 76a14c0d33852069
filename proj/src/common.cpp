#include "xsteer/common.hpp"

#include <cstdio>

namespace xsteer {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

void matvec(const Matrix& w, std::span<const float> x, std::span<float> out) {
  if (static_cast<int>(x.size()) != w.cols || static_cast<int>(out.size()) != w.rows)
    throw ShapeError("matvec: got x[" + std::to_string(x.size()) + "], out[" +
                     std::to_string(out.size()) + "] for matrix " +
                     std::to_string(w.rows) + "x" + std::to_string(w.cols));
  for (int r = 0; r < w.rows; ++r) {
    const float* wr = w.row(r);
    float acc = 0.0f;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

}  // namespace xsteer
