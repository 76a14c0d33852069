#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "xsteer/common.hpp"

namespace xsteer {

struct ModelConfig {
  int n_layers = 0;
  int d_model = 0;  // residual stream width
  int d_ff = 0;     // MLP intermediate width = neuron count per layer
  int n_heads = 0;
  int vocab_size = 0;
  int max_seq_len = 512;
  int eos_token = -1;
  float rope_base = 10000.0f;
  float norm_eps = 1e-5f;

  int head_dim() const { return n_heads > 0 ? d_model / n_heads : 0; }
  void validate() const;
};

struct LayerWeights {
  std::vector<float> attn_norm;  // d_model
  Matrix wq, wk, wv, wo;         // d_model x d_model
  std::vector<float> mlp_norm;   // d_model
  Matrix wg, wu;                 // d_ff x d_model
  Matrix wd;                     // d_model x d_ff
};

struct ModelWeights {
  ModelConfig config;
  Matrix token_embedding;  // vocab x d_model
  std::vector<LayerWeights> layers;
  std::vector<float> final_norm;  // d_model
  Matrix unembedding;             // vocab x d_model
};

// Intervention point: called once per (layer, position) with the MLP
// post-activation vector h = silu(Wg x) * (Wu x), which it may rewrite in
// place before the down-projection consumes it. The core attaches no
// semantics; hooks decide which layers to touch.
using SteerFn = std::function<void(int layer, int pos, std::span<float> h)>;

struct ForwardOptions {
  std::vector<int> capture_mlp;     // layers whose h to record (pre-hook values)
  std::vector<int> capture_hidden;  // layers whose residual output to record
  SteerFn steer;
};

struct ForwardResult {
  Matrix logits;                 // seq x vocab
  std::map<int, Matrix> mlp;     // layer -> seq x d_ff
  std::map<int, Matrix> hidden;  // layer -> seq x d_model
};

void rmsnorm(std::span<const float> x, std::span<const float> scale, float eps,
             std::span<float> out);
float silu(float x);

// The SwiGLU intermediate: h[n] = silu(<wg[n], x>) * <wu[n], x>.
void mlp_intermediate(std::span<const float> x, const Matrix& wg, const Matrix& wu,
                      std::span<float> h);
std::vector<float> mlp_intermediate(std::span<const float> x, const Matrix& wg,
                                    const Matrix& wu);

// Full-sequence forward pass. Single-threaded by design; parallelism in this
// codebase lives at the sample level. Throws LengthError for empty/too-long
// sequences, ValidationError for out-of-range token or capture-layer ids.
ForwardResult forward(const ModelWeights& w, std::span<const int> tokens,
                      const ForwardOptions& opts = {});

// Greedy continuation: re-runs forward on the growing sequence each step (no
// KV cache), appends argmax of the last position (ties -> lowest id), stops
// after appending eos_token or after max_new tokens. Returns prompt plus the
// generated ids. Throws LengthError when prompt length + max_new exceeds
// max_seq_len.
std::vector<int> greedy_decode(const ModelWeights& w, std::span<const int> prompt,
                               int max_new, const SteerFn& steer = nullptr);

// Deterministic random-weight model. Draw order and the Box-Muller sampler
// are frozen, so (config, seed) fully determines every byte of the weights.
ModelWeights gen_toy_model(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace xsteer
