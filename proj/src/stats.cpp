#include "xsteer/stats.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "binio.hpp"
#include "xsteer/parallel.hpp"

namespace xsteer {

using nlohmann::json;

ActivationStats collect_stats(const ModelWeights& model, const Tokenizer& tok,
                              const ParallelCorpus& corpus,
                              const std::string& mode, int workers,
                              const std::string& corpus_digest) {
  if (corpus.samples.empty())
    throw DegenerateInputError("collect_stats: empty corpus");
  if (mode != "abs" && mode != "signed")
    throw ValidationError("collect_stats: mode must be \"abs\" or \"signed\"");

  const ModelConfig& cfg = model.config;
  const int n_samples = static_cast<int>(corpus.samples.size());
  const int n_langs = static_cast<int>(corpus.languages.size());
  const size_t tensor_size =
      static_cast<size_t>(cfg.n_layers) * cfg.d_ff * n_langs;

  std::vector<int> all_layers(static_cast<size_t>(cfg.n_layers));
  std::iota(all_layers.begin(), all_layers.end(), 0);

  // Slot per sample: that sample's per-position mean tensor plus its token
  // counts. Workers only touch their own slot.
  std::vector<std::vector<float>> slot(static_cast<size_t>(n_samples));
  std::vector<std::vector<int>> slot_positions(static_cast<size_t>(n_samples));

  parallel_for_index(n_samples, workers, [&](int i) {
    const ParallelSample& sample = corpus.samples[static_cast<size_t>(i)];
    std::vector<float>& acc = slot[static_cast<size_t>(i)];
    acc.assign(tensor_size, 0.0f);
    std::vector<int>& positions = slot_positions[static_cast<size_t>(i)];
    positions.assign(static_cast<size_t>(n_langs), 0);

    for (int li = 0; li < n_langs; ++li) {
      const std::string& lang = corpus.languages[static_cast<size_t>(li)];
      const std::vector<int> tokens = tok.encode(sample.texts.at(lang));
      ForwardOptions opts;
      opts.capture_mlp = all_layers;
      ForwardResult r = forward(model, tokens, opts);
      const int seq = static_cast<int>(tokens.size());
      positions[static_cast<size_t>(li)] = seq;

      for (int l = 0; l < cfg.n_layers; ++l) {
        const Matrix& h = r.mlp.at(l);
        for (int n = 0; n < cfg.d_ff; ++n) {
          float sum = 0.0f;
          for (int p = 0; p < seq; ++p) {
            const float v = h.at(p, n);
            if (!std::isfinite(v))
              throw ValidationError(
                  "non-finite activation at layer " + std::to_string(l) +
                  ", neuron " + std::to_string(n) + " (sample \"" + sample.id +
                  "\", lang " + lang + ")");
            sum += mode[0] == 'a' ? std::fabs(v) : v;
          }
          acc[(static_cast<size_t>(l) * cfg.d_ff + n) * n_langs + li] =
              sum / static_cast<float>(seq);
        }
      }
    }
  });

  ActivationStats stats;
  stats.languages = corpus.languages;
  stats.n_layers = cfg.n_layers;
  stats.d_ff = cfg.d_ff;
  stats.sample_count = n_samples;
  stats.mode = mode;
  stats.corpus_digest = corpus_digest;
  stats.mean_act.assign(tensor_size, 0.0f);
  for (int i = 0; i < n_samples; ++i) {
    const std::vector<float>& acc = slot[static_cast<size_t>(i)];
    for (size_t k = 0; k < tensor_size; ++k) stats.mean_act[k] += acc[k];
    stats.sample_ids.push_back(corpus.samples[static_cast<size_t>(i)].id);
    stats.position_counts.push_back(slot_positions[static_cast<size_t>(i)]);
  }
  for (float& v : stats.mean_act) v /= static_cast<float>(n_samples);
  return stats;
}

void save_stats(const ActivationStats& stats, const std::string& path) {
  json header{{"languages", stats.languages},
              {"dims", {stats.n_layers, stats.d_ff, stats.n_languages()}},
              {"t_act", nullptr},
              {"corpus_digest", stats.corpus_digest},
              {"mode", stats.mode},
              {"sample_count", stats.sample_count},
              {"sample_ids", stats.sample_ids},
              {"position_counts", stats.position_counts}};
  binio::write_container(path, "CLS1", header, stats.mean_act.data(),
                         stats.mean_act.size());
}

ActivationStats load_stats(const std::string& path) {
  binio::Container c = binio::read_container(path, "CLS1");
  ActivationStats s;
  try {
    s.languages = c.header.at("languages").get<std::vector<std::string>>();
    const auto dims = c.header.at("dims").get<std::vector<int>>();
    if (dims.size() != 3) throw ParseError(path + ": dims must have 3 entries");
    s.n_layers = dims[0];
    s.d_ff = dims[1];
    if (dims[2] != static_cast<int>(s.languages.size()))
      throw ParseError(path + ": language dim disagrees with language list");
    s.corpus_digest = c.header.at("corpus_digest").get<std::string>();
    s.mode = c.header.at("mode").get<std::string>();
    s.sample_count = c.header.at("sample_count").get<int>();
    s.sample_ids = c.header.at("sample_ids").get<std::vector<std::string>>();
    s.position_counts =
        c.header.at("position_counts").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": header: " + e.what());
  }
  const size_t expect =
      static_cast<size_t>(s.n_layers) * s.d_ff * s.languages.size();
  if (c.payload.size() != expect)
    throw ShapeError(path + ": payload holds " + std::to_string(c.payload.size()) +
                     " floats, header promises " + std::to_string(expect));
  if (s.mode == "abs")
    for (float v : c.payload)
      if (!(v >= 0.0f))
        throw ValidationError(path + ": negative mean magnitude in abs-mode file");
  s.mean_act = std::move(c.payload);
  return s;
}

}  // namespace xsteer
