#include "xsteer/weights_io.hpp"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "binio.hpp"

namespace xsteer {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"n_layers", c.n_layers},     {"d_model", c.d_model},
              {"d_ff", c.d_ff},             {"n_heads", c.n_heads},
              {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
              {"eos_token", c.eos_token},   {"rope_base", c.rope_base},
              {"norm_eps", c.norm_eps}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  try {
    c.n_layers = j.at("n_layers").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_seq_len = j.at("max_seq_len").get<int>();
    c.eos_token = j.at("eos_token").get<int>();
    c.rope_base = j.at("rope_base").get<float>();
    c.norm_eps = j.at("norm_eps").get<float>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("weight header config: ") + e.what());
  }
  return c;
}

struct TensorRef {
  std::string name;
  std::vector<int> shape;
  const float* data;
  size_t count() const {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
  }
};

void collect_tensors(const ModelWeights& w, std::vector<TensorRef>& out) {
  auto mat = [](const std::string& name, const Matrix& m) {
    return TensorRef{name, {m.rows, m.cols}, m.data.data()};
  };
  auto vec = [](const std::string& name, const std::vector<float>& v) {
    return TensorRef{name, {static_cast<int>(v.size())}, v.data()};
  };
  out.push_back(mat("token_embedding", w.token_embedding));
  for (size_t l = 0; l < w.layers.size(); ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    const LayerWeights& lw = w.layers[l];
    out.push_back(vec(p + "attn_norm", lw.attn_norm));
    out.push_back(mat(p + "wq", lw.wq));
    out.push_back(mat(p + "wk", lw.wk));
    out.push_back(mat(p + "wv", lw.wv));
    out.push_back(mat(p + "wo", lw.wo));
    out.push_back(vec(p + "mlp_norm", lw.mlp_norm));
    out.push_back(mat(p + "wg", lw.wg));
    out.push_back(mat(p + "wu", lw.wu));
    out.push_back(mat(p + "wd", lw.wd));
  }
  out.push_back(vec("final_norm", w.final_norm));
  out.push_back(mat("unembedding", w.unembedding));
}

// Reads one tensor out of the directory, checking shape and bounds.
class TensorReader {
 public:
  TensorReader(const json& directory, const std::vector<float>& payload)
      : payload_(payload) {
    for (const json& e : directory) {
      const std::string name = e.at("name").get<std::string>();
      entries_[name] = {e.at("shape").get<std::vector<int>>(),
                        e.at("offset").get<size_t>()};
    }
  }

  void read(const std::string& name, const std::vector<int>& shape, float* dst) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw ParseError("weight file missing tensor \"" + name + "\"");
    if (it->second.shape != shape) {
      std::string got, want;
      for (int d : it->second.shape) got += std::to_string(d) + " ";
      for (int d : shape) want += std::to_string(d) + " ";
      throw ShapeError("tensor \"" + name + "\": shape [ " + got +
                       "] does not match config [ " + want + "]");
    }
    size_t count = 1;
    for (int d : shape) count *= static_cast<size_t>(d);
    const size_t off = it->second.offset;
    if (off % sizeof(float) != 0 ||
        off / sizeof(float) + count > payload_.size())
      throw ParseError("tensor \"" + name + "\": offset/size outside payload");
    std::memcpy(dst, payload_.data() + off / sizeof(float), count * sizeof(float));
    for (size_t i = 0; i < count; ++i)
      if (!std::isfinite(dst[i]))
        throw ValidationError("tensor \"" + name + "\" contains a non-finite value");
  }

 private:
  struct Entry {
    std::vector<int> shape;
    size_t offset;
  };
  std::map<std::string, Entry> entries_;
  const std::vector<float>& payload_;
};

}  // namespace

void save_model(const ModelWeights& w, const std::string& path) {
  std::vector<TensorRef> tensors;
  collect_tensors(w, tensors);

  json dir = json::array();
  std::vector<float> payload;
  size_t offset = 0;
  for (const TensorRef& t : tensors) {
    dir.push_back(json{{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    payload.insert(payload.end(), t.data, t.data + t.count());
    offset += t.count() * sizeof(float);
  }
  json header{{"config", config_to_json(w.config)}, {"tensors", dir}};
  binio::write_container(path, "CLW1", header, payload.data(), payload.size());
}

ModelWeights load_model(const std::string& path) {
  binio::Container c = binio::read_container(path, "CLW1");
  if (!c.header.contains("config") || !c.header.contains("tensors"))
    throw ParseError(path + ": header lacks config/tensors");

  ModelWeights w;
  w.config = config_from_json(c.header.at("config"));
  w.config.validate();
  const ModelConfig& cfg = w.config;

  TensorReader rd(c.header.at("tensors"), c.payload);
  w.token_embedding = Matrix(cfg.vocab_size, cfg.d_model);
  rd.read("token_embedding", {cfg.vocab_size, cfg.d_model},
          w.token_embedding.data.data());
  w.layers.resize(static_cast<size_t>(cfg.n_layers));
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    LayerWeights& lw = w.layers[static_cast<size_t>(l)];
    lw.attn_norm.resize(static_cast<size_t>(cfg.d_model));
    rd.read(p + "attn_norm", {cfg.d_model}, lw.attn_norm.data());
    lw.wq = Matrix(cfg.d_model, cfg.d_model);
    rd.read(p + "wq", {cfg.d_model, cfg.d_model}, lw.wq.data.data());
    lw.wk = Matrix(cfg.d_model, cfg.d_model);
    rd.read(p + "wk", {cfg.d_model, cfg.d_model}, lw.wk.data.data());
    lw.wv = Matrix(cfg.d_model, cfg.d_model);
    rd.read(p + "wv", {cfg.d_model, cfg.d_model}, lw.wv.data.data());
    lw.wo = Matrix(cfg.d_model, cfg.d_model);
    rd.read(p + "wo", {cfg.d_model, cfg.d_model}, lw.wo.data.data());
    lw.mlp_norm.resize(static_cast<size_t>(cfg.d_model));
    rd.read(p + "mlp_norm", {cfg.d_model}, lw.mlp_norm.data());
    lw.wg = Matrix(cfg.d_ff, cfg.d_model);
    rd.read(p + "wg", {cfg.d_ff, cfg.d_model}, lw.wg.data.data());
    lw.wu = Matrix(cfg.d_ff, cfg.d_model);
    rd.read(p + "wu", {cfg.d_ff, cfg.d_model}, lw.wu.data.data());
    lw.wd = Matrix(cfg.d_model, cfg.d_ff);
    rd.read(p + "wd", {cfg.d_model, cfg.d_ff}, lw.wd.data.data());
  }
  w.final_norm.resize(static_cast<size_t>(cfg.d_model));
  rd.read("final_norm", {cfg.d_model}, w.final_norm.data());
  w.unembedding = Matrix(cfg.vocab_size, cfg.d_model);
  rd.read("unembedding", {cfg.vocab_size, cfg.d_model}, w.unembedding.data.data());
  return w;
}

}  // namespace xsteer
