#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xsteer/common.hpp"

namespace xsteer {

// Two modes:
//  - byte-level: token id i encodes byte i (0..255); ids 256.. are reserved
//    for specials like eos and are never produced by encode().
//  - vocab-file: a JSON array of strings, id = array index, encoded by greedy
//    longest-prefix match (ties broken toward the lowest id).
// Neither mode prepends a beginning-of-sequence token.
class Tokenizer {
 public:
  static Tokenizer byte_level(int vocab_size, int eos_id);
  static Tokenizer from_vocab_file(const std::string& path, int eos_id);

  std::vector<int> encode(std::string_view text) const;
  std::string decode(std::span<const int> ids) const;

  int vocab_size() const { return vocab_size_; }
  int eos_id() const { return eos_id_; }
  bool is_byte_level() const { return byte_level_; }

 private:
  Tokenizer() = default;

  bool byte_level_ = true;
  int vocab_size_ = 0;
  int eos_id_ = -1;
  std::vector<std::string> pieces_;  // vocab-file mode only
  // first byte -> candidate ids ordered by piece length desc, then id asc
  std::map<char, std::vector<int>> by_first_;
};

}  // namespace xsteer
