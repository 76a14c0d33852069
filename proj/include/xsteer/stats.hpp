#pragma once

#include <string>
#include <vector>

#include "xsteer/common.hpp"
#include "xsteer/corpus.hpp"
#include "xsteer/model.hpp"
#include "xsteer/tokenizer.hpp"

namespace xsteer {

// Dataset-level mean activation per (layer, neuron, language). "abs" mode
// averages |h| (the default: SwiGLU intermediates are signed and a signed
// mean would cancel oscillating neurons); "signed" mode averages raw h.
struct ActivationStats {
  std::vector<std::string> languages;
  int n_layers = 0;
  int d_ff = 0;
  std::vector<float> mean_act;  // [layer][neuron][language], row-major
  int sample_count = 0;
  std::string mode = "abs";
  std::string corpus_digest;               // hex digest of the source file
  std::vector<std::string> sample_ids;     // order of accumulation
  std::vector<std::vector<int>> position_counts;  // [sample][language]

  int n_languages() const { return static_cast<int>(languages.size()); }
  size_t index(int layer, int neuron, int lang) const {
    return (static_cast<size_t>(layer) * d_ff + neuron) * languages.size() + lang;
  }
  float at(int layer, int neuron, int lang) const {
    return mean_act[index(layer, neuron, lang)];
  }
  float& at(int layer, int neuron, int lang) {
    return mean_act[index(layer, neuron, lang)];
  }
};

// Runs every (sample, language) text through the model capturing all MLP
// intermediates; the per-sample mean over token positions is taken first,
// then averaged over samples with equal weight regardless of length.
// Samples may fan out over `workers` threads; accumulation happens serially
// in sample order afterwards, so results are bit-identical for any worker
// count. Throws DegenerateInputError on an empty corpus and ValidationError
// naming (layer, neuron) if an activation is non-finite.
ActivationStats collect_stats(const ModelWeights& model, const Tokenizer& tok,
                              const ParallelCorpus& corpus,
                              const std::string& mode = "abs", int workers = 1,
                              const std::string& corpus_digest = "");

// Container: "CLS1" magic, u32 header length, JSON header (languages, dims,
// t_act left null, corpus digest, mode, sample bookkeeping), then the
// little-endian float32 mean tensor.
void save_stats(const ActivationStats& stats, const std::string& path);
ActivationStats load_stats(const std::string& path);

}  // namespace xsteer
