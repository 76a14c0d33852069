#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "xsteer/model.hpp"

namespace testutil {

// RAII temp directory, unique per instance, removed on destruction.
class temp_dir {
 public:
  temp_dir() {
    static std::atomic<uint64_t> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("xsteer_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  temp_dir(const temp_dir&) = delete;
  temp_dir& operator=(const temp_dir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A model whose per-layer weights are all zero: the residual stream carries the
// token embedding straight through every layer, so the final logits are fully
// determined by rmsnorm(embedding) @ unembedding. With an all-ones embedding
// the normalized vector is all ones, so logit[t] = sum(unembedding.row(t)).
inline xsteer::ModelWeights make_passthrough_model(int vocab_size, int eos_token,
                                                   int d_model = 8, int n_layers = 1,
                                                   int max_seq_len = 64) {
  xsteer::ModelConfig cfg;
  cfg.n_layers = n_layers;
  cfg.d_model = d_model;
  cfg.d_ff = d_model * 2;
  cfg.n_heads = 2;
  cfg.vocab_size = vocab_size;
  cfg.max_seq_len = max_seq_len;
  cfg.eos_token = eos_token;
  cfg.validate();

  xsteer::ModelWeights w;
  w.config = cfg;
  w.token_embedding = xsteer::Matrix(vocab_size, d_model);
  for (float& v : w.token_embedding.data) v = 1.0f;
  w.layers.resize(n_layers);
  for (auto& layer : w.layers) {
    layer.wq = xsteer::Matrix(d_model, d_model);
    layer.wk = xsteer::Matrix(d_model, d_model);
    layer.wv = xsteer::Matrix(d_model, d_model);
    layer.wo = xsteer::Matrix(d_model, d_model);
    layer.wg = xsteer::Matrix(cfg.d_ff, d_model);
    layer.wu = xsteer::Matrix(cfg.d_ff, d_model);
    layer.wd = xsteer::Matrix(d_model, cfg.d_ff);
    layer.attn_norm.assign(d_model, 1.0f);
    layer.mlp_norm.assign(d_model, 1.0f);
  }
  w.final_norm.assign(d_model, 1.0f);
  w.unembedding = xsteer::Matrix(vocab_size, d_model);
  return w;
}

// Force the passthrough model to always emit `token` as argmax.
inline void set_constant_prediction(xsteer::ModelWeights& w, int token) {
  for (float& v : w.unembedding.data) v = 0.0f;
  for (int j = 0; j < w.config.d_model; ++j) w.unembedding.at(token, j) = 1.0f;
}

}  // namespace testutil
