#include "xsteer/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xsteer/rng.hpp"

namespace xsteer {

void ModelConfig::validate() const {
  if (n_layers <= 0 || d_model <= 0 || d_ff <= 0 || n_heads <= 0 ||
      vocab_size <= 0 || max_seq_len <= 0)
    throw ValidationError("model config: all sizes must be positive");
  if (d_model % n_heads != 0)
    throw ValidationError("model config: d_model " + std::to_string(d_model) +
                          " not divisible by n_heads " + std::to_string(n_heads));
  if (head_dim() % 2 != 0)
    throw ValidationError("model config: head dim must be even for rotary embedding");
  if (eos_token < 0 || eos_token >= vocab_size)
    throw ValidationError("model config: eos_token out of vocab range");
}

void rmsnorm(std::span<const float> x, std::span<const float> scale, float eps,
             std::span<float> out) {
  const int n = static_cast<int>(x.size());
  float ss = 0.0f;
  for (int i = 0; i < n; ++i) ss += x[i] * x[i];
  const float inv = 1.0f / std::sqrt(ss / static_cast<float>(n) + eps);
  for (int i = 0; i < n; ++i) out[i] = x[i] * inv * scale[i];
}

float silu(float x) { return x / (1.0f + std::exp(-x)); }

void mlp_intermediate(std::span<const float> x, const Matrix& wg, const Matrix& wu,
                      std::span<float> h) {
  if (wg.rows != wu.rows || wg.cols != wu.cols)
    throw ShapeError("mlp_intermediate: gate and up projections disagree on shape");
  if (static_cast<int>(x.size()) != wg.cols ||
      static_cast<int>(h.size()) != wg.rows)
    throw ShapeError("mlp_intermediate: expected x[" + std::to_string(wg.cols) +
                     "], h[" + std::to_string(wg.rows) + "]");
  for (int n = 0; n < wg.rows; ++n) {
    const float* gr = wg.row(n);
    const float* ur = wu.row(n);
    float g = 0.0f, u = 0.0f;
    for (int c = 0; c < wg.cols; ++c) {
      g += gr[c] * x[c];
      u += ur[c] * x[c];
    }
    h[n] = silu(g) * u;
  }
}

std::vector<float> mlp_intermediate(std::span<const float> x, const Matrix& wg,
                                    const Matrix& wu) {
  std::vector<float> h(static_cast<size_t>(wg.rows));
  mlp_intermediate(x, wg, wu, h);
  return h;
}

namespace {

// Rotary position embedding, adjacent-pair convention: dimensions (2i, 2i+1)
// of each head form one rotation plane with frequency base^(-2i/head_dim).
void rope_inplace(std::span<float> v, int pos, int head_dim, float base) {
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; i += 2) {
    const int pair = i % head_dim;
    const float freq =
        1.0f / std::pow(base, static_cast<float>(pair) / static_cast<float>(head_dim));
    const float val = static_cast<float>(pos) * freq;
    const float c = std::cos(val);
    const float s = std::sin(val);
    const float v0 = v[i];
    const float v1 = v[i + 1];
    v[i] = v0 * c - v1 * s;
    v[i + 1] = v0 * s + v1 * c;
  }
}

void softmax_inplace(std::span<float> x) {
  float mx = x[0];
  for (float v : x) mx = std::max(mx, v);
  float sum = 0.0f;
  for (float& v : x) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (float& v : x) v /= sum;
}

void check_capture_layers(const std::vector<int>& layers, int n_layers,
                          const char* what) {
  for (int l : layers)
    if (l < 0 || l >= n_layers)
      throw ValidationError(std::string(what) + " capture layer " +
                            std::to_string(l) + " outside [0, " +
                            std::to_string(n_layers) + ")");
}

}  // namespace

ForwardResult forward(const ModelWeights& w, std::span<const int> tokens,
                      const ForwardOptions& opts) {
  const ModelConfig& cfg = w.config;
  const int seq = static_cast<int>(tokens.size());
  if (seq == 0) throw LengthError("forward: empty token sequence");
  if (seq > cfg.max_seq_len)
    throw LengthError("forward: sequence length " + std::to_string(seq) +
                      " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
  for (int t : tokens)
    if (t < 0 || t >= cfg.vocab_size)
      throw ValidationError("forward: token id " + std::to_string(t) +
                            " outside vocab of size " + std::to_string(cfg.vocab_size));
  check_capture_layers(opts.capture_mlp, cfg.n_layers, "mlp");
  check_capture_layers(opts.capture_hidden, cfg.n_layers, "hidden");

  const int dim = cfg.d_model;
  const int hd = cfg.head_dim();
  const float att_scale = 1.0f / std::sqrt(static_cast<float>(hd));

  // Residual stream, one row per position.
  Matrix x(seq, dim);
  for (int p = 0; p < seq; ++p) {
    const float* e = w.token_embedding.row(tokens[p]);
    std::copy(e, e + dim, x.row(p));
  }

  ForwardResult res;
  for (int l : opts.capture_mlp) res.mlp.emplace(l, Matrix(seq, cfg.d_ff));
  for (int l : opts.capture_hidden) res.hidden.emplace(l, Matrix(seq, dim));

  std::vector<float> xn(dim), q(dim), att_out(dim), proj(dim);
  Matrix k(seq, dim), v(seq, dim);
  std::vector<float> scores(seq);
  std::vector<float> h(cfg.d_ff);
  std::vector<float> down(dim);

  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerWeights& lw = w.layers[l];

    // Attention: keys/values for the whole sequence first, then each query
    // attends over its causal prefix.
    for (int p = 0; p < seq; ++p) {
      rmsnorm(x.row_span(p), lw.attn_norm, cfg.norm_eps, xn);
      matvec(lw.wk, xn, k.row_span(p));
      matvec(lw.wv, xn, v.row_span(p));
      rope_inplace(k.row_span(p), p, hd, cfg.rope_base);
    }
    for (int p = 0; p < seq; ++p) {
      rmsnorm(x.row_span(p), lw.attn_norm, cfg.norm_eps, xn);
      matvec(lw.wq, xn, q);
      rope_inplace(q, p, hd, cfg.rope_base);
      std::fill(att_out.begin(), att_out.end(), 0.0f);
      for (int head = 0; head < cfg.n_heads; ++head) {
        const int off = head * hd;
        for (int t = 0; t <= p; ++t) {
          const float* kt = k.row(t) + off;
          float dot = 0.0f;
          for (int i = 0; i < hd; ++i) dot += q[off + i] * kt[i];
          scores[t] = dot * att_scale;
        }
        softmax_inplace(std::span<float>(scores.data(), static_cast<size_t>(p + 1)));
        for (int t = 0; t <= p; ++t) {
          const float* vt = v.row(t) + off;
          const float sc = scores[t];
          for (int i = 0; i < hd; ++i) att_out[off + i] += sc * vt[i];
        }
      }
      matvec(lw.wo, att_out, proj);
      float* xp = x.row(p);
      for (int i = 0; i < dim; ++i) xp[i] += proj[i];
    }

    // MLP block, with the capture/steer seam between the SwiGLU intermediate
    // and the down-projection.
    auto mlp_cap = res.mlp.find(l);
    auto hid_cap = res.hidden.find(l);
    for (int p = 0; p < seq; ++p) {
      rmsnorm(x.row_span(p), lw.mlp_norm, cfg.norm_eps, xn);
      mlp_intermediate(xn, lw.wg, lw.wu, h);
      if (mlp_cap != res.mlp.end())
        std::copy(h.begin(), h.end(), mlp_cap->second.row(p));
      if (opts.steer) opts.steer(l, p, h);
      matvec(lw.wd, h, down);
      float* xp = x.row(p);
      for (int i = 0; i < dim; ++i) xp[i] += down[i];
      if (hid_cap != res.hidden.end())
        std::copy(xp, xp + dim, hid_cap->second.row(p));
    }
  }

  res.logits = Matrix(seq, cfg.vocab_size);
  for (int p = 0; p < seq; ++p) {
    rmsnorm(x.row_span(p), w.final_norm, cfg.norm_eps, xn);
    matvec(w.unembedding, xn, res.logits.row_span(p));
  }
  return res;
}

std::vector<int> greedy_decode(const ModelWeights& w, std::span<const int> prompt,
                               int max_new, const SteerFn& steer) {
  if (max_new < 0) throw ValidationError("greedy_decode: negative max_new");
  if (static_cast<int>(prompt.size()) + max_new > w.config.max_seq_len)
    throw LengthError("greedy_decode: prompt length " +
                      std::to_string(prompt.size()) + " + max_new " +
                      std::to_string(max_new) + " exceeds max_seq_len " +
                      std::to_string(w.config.max_seq_len));
  std::vector<int> seq(prompt.begin(), prompt.end());
  ForwardOptions opts;
  opts.steer = steer;
  for (int step = 0; step < max_new; ++step) {
    ForwardResult r = forward(w, seq, opts);
    const float* logits = r.logits.row(static_cast<int>(seq.size()) - 1);
    int best = 0;
    for (int t = 1; t < w.config.vocab_size; ++t)
      if (logits[t] > logits[best]) best = t;
    seq.push_back(best);
    if (best == w.config.eos_token) break;
  }
  return seq;
}

namespace {

void fill_normal(GaussianRng& rng, std::vector<float>& v, double std_dev) {
  for (float& f : v) f = static_cast<float>(rng.normal() * std_dev);
}

}  // namespace

ModelWeights gen_toy_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelWeights w;
  w.config = cfg;
  GaussianRng rng(seed);

  const double emb_std = 0.02;
  const double proj_std = 0.02 / std::sqrt(static_cast<double>(cfg.n_layers));

  w.token_embedding = Matrix(cfg.vocab_size, cfg.d_model);
  fill_normal(rng, w.token_embedding.data, emb_std);

  w.layers.resize(static_cast<size_t>(cfg.n_layers));
  for (LayerWeights& lw : w.layers) {
    lw.attn_norm.assign(static_cast<size_t>(cfg.d_model), 1.0f);
    lw.wq = Matrix(cfg.d_model, cfg.d_model);
    fill_normal(rng, lw.wq.data, proj_std);
    lw.wk = Matrix(cfg.d_model, cfg.d_model);
    fill_normal(rng, lw.wk.data, proj_std);
    lw.wv = Matrix(cfg.d_model, cfg.d_model);
    fill_normal(rng, lw.wv.data, proj_std);
    lw.wo = Matrix(cfg.d_model, cfg.d_model);
    fill_normal(rng, lw.wo.data, proj_std);
    lw.mlp_norm.assign(static_cast<size_t>(cfg.d_model), 1.0f);
    lw.wg = Matrix(cfg.d_ff, cfg.d_model);
    fill_normal(rng, lw.wg.data, proj_std);
    lw.wu = Matrix(cfg.d_ff, cfg.d_model);
    fill_normal(rng, lw.wu.data, proj_std);
    lw.wd = Matrix(cfg.d_model, cfg.d_ff);
    fill_normal(rng, lw.wd.data, proj_std);
  }

  w.final_norm.assign(static_cast<size_t>(cfg.d_model), 1.0f);
  w.unembedding = Matrix(cfg.vocab_size, cfg.d_model);
  fill_normal(rng, w.unembedding.data, emb_std);
  return w;
}

}  // namespace xsteer
