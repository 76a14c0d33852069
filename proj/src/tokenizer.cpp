#include "xsteer/tokenizer.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace xsteer {

Tokenizer Tokenizer::byte_level(int vocab_size, int eos_id) {
  if (vocab_size < 256)
    throw ValidationError("byte-level tokenizer needs vocab_size >= 256, got " +
                          std::to_string(vocab_size));
  if (eos_id < 0 || eos_id >= vocab_size)
    throw ValidationError("eos_id " + std::to_string(eos_id) + " outside vocab");
  if (eos_id < 256)
    throw ValidationError("byte-level eos_id must not shadow a byte value");
  Tokenizer t;
  t.byte_level_ = true;
  t.vocab_size_ = vocab_size;
  t.eos_id_ = eos_id;
  return t;
}

Tokenizer Tokenizer::from_vocab_file(const std::string& path, int eos_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open vocab file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("vocab file is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw ParseError("vocab file must be a JSON array of strings");

  Tokenizer t;
  t.byte_level_ = false;
  t.pieces_.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string())
      throw ParseError("vocab entry " + std::to_string(i) + " is not a string");
    std::string piece = j[i].get<std::string>();
    if (piece.empty())
      throw ValidationError("vocab entry " + std::to_string(i) + " is empty");
    t.pieces_.push_back(std::move(piece));
  }
  t.vocab_size_ = static_cast<int>(t.pieces_.size());
  if (eos_id < 0 || eos_id >= t.vocab_size_)
    throw ValidationError("eos_id " + std::to_string(eos_id) + " outside vocab of size " +
                          std::to_string(t.vocab_size_));
  t.eos_id_ = eos_id;

  for (int id = 0; id < t.vocab_size_; ++id)
    t.by_first_[t.pieces_[static_cast<size_t>(id)][0]].push_back(id);
  for (auto& [first, ids] : t.by_first_) {
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return t.pieces_[static_cast<size_t>(a)].size() >
             t.pieces_[static_cast<size_t>(b)].size();
    });
  }
  return t;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> out;
  if (byte_level_) {
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<int>(c));
    return out;
  }
  size_t pos = 0;
  while (pos < text.size()) {
    const auto it = by_first_.find(text[pos]);
    int match = -1;
    if (it != by_first_.end()) {
      const std::string_view rest = text.substr(pos);
      for (int id : it->second) {
        const std::string& p = pieces_[static_cast<size_t>(id)];
        if (rest.size() >= p.size() && rest.compare(0, p.size(), p) == 0) {
          match = id;
          break;
        }
      }
    }
    if (match < 0)
      throw ValidationError("no vocab entry matches input at byte offset " +
                            std::to_string(pos));
    out.push_back(match);
    pos += pieces_[static_cast<size_t>(match)].size();
  }
  return out;
}

std::string Tokenizer::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size_)
      throw ValidationError("token id " + std::to_string(id) + " outside vocab");
    if (byte_level_) {
      if (id > 255)
        throw ValidationError("token id " + std::to_string(id) +
                              " has no byte expansion");
      out.push_back(static_cast<char>(static_cast<unsigned char>(id)));
    } else {
      out += pieces_[static_cast<size_t>(id)];
    }
  }
  return out;
}

}  // namespace xsteer
