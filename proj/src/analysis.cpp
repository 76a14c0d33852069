#include "xsteer/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "xsteer/parallel.hpp"

namespace xsteer {

std::vector<float> embed_text(const ModelWeights& model, const Tokenizer& tok,
                              const std::string& text, int layer,
                              const SteerFn& steer, bool final_position) {
  ForwardOptions opts;
  opts.capture_hidden = {layer};
  opts.steer = steer;
  const std::vector<int> tokens = tok.encode(text);
  ForwardResult r = forward(model, tokens, opts);
  const Matrix& hidden = r.hidden.at(layer);
  if (final_position) {
    const float* row = hidden.row(hidden.rows - 1);
    return std::vector<float>(row, row + hidden.cols);
  }
  std::vector<float> out(static_cast<size_t>(hidden.cols), 0.0f);
  for (int p = 0; p < hidden.rows; ++p) {
    const float* row = hidden.row(p);
    for (int i = 0; i < hidden.cols; ++i) out[static_cast<size_t>(i)] += row[i];
  }
  for (float& v : out) v /= static_cast<float>(hidden.rows);
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw ShapeError("cosine: vectors of width " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("cosine: zero-norm vector");
  return dot / std::sqrt(na * nb);
}

double mean_cosine_to_anchor(
    const std::map<std::string, std::vector<float>>& lang_embeddings,
    const std::map<std::string, std::vector<float>>& anchor_embeddings) {
  if (lang_embeddings.empty())
    throw DegenerateInputError("mean_cosine_to_anchor: no embeddings");
  if (lang_embeddings.size() != anchor_embeddings.size())
    throw ValidationError("mean_cosine_to_anchor: sample sets differ in size");
  double sum = 0.0;
  for (const auto& [id, emb] : lang_embeddings) {
    const auto it = anchor_embeddings.find(id);
    if (it == anchor_embeddings.end())
      throw ValidationError("mean_cosine_to_anchor: sample \"" + id +
                            "\" has no anchor counterpart");
    sum += cosine(emb, it->second);
  }
  return sum / static_cast<double>(lang_embeddings.size());
}

AlignmentReport alignment_to_anchor(const ModelWeights& model, const Tokenizer& tok,
                                    const ParallelCorpus& corpus,
                                    const SteeringContext& steer,
                                    const std::vector<int>& layers, int workers) {
  if (corpus.samples.empty())
    throw DegenerateInputError("alignment_to_anchor: empty corpus");
  if (layers.empty())
    throw ValidationError("alignment_to_anchor: no layers requested");
  const std::string& anchor = steer.config().anchor;
  if (std::find(corpus.languages.begin(), corpus.languages.end(), anchor) ==
      corpus.languages.end())
    throw ValidationError("alignment_to_anchor: corpus lacks the anchor language");

  const int n_samples = static_cast<int>(corpus.samples.size());
  const int n_langs = static_cast<int>(corpus.languages.size());
  const int n_layers = static_cast<int>(layers.size());

  // Slot per sample: embeddings[lang][layer] under baseline and steered
  // hooks. The anchor's steered run is skipped: the bypass makes it equal to
  // the baseline.
  struct SampleEmbeddings {
    std::vector<std::vector<float>> base;     // [lang*n_layers + layer_idx]
    std::vector<std::vector<float>> steered;  // same indexing
  };
  std::vector<SampleEmbeddings> slot(static_cast<size_t>(n_samples));

  std::vector<SteerFn> hooks(static_cast<size_t>(n_langs));
  for (int li = 0; li < n_langs; ++li)
    hooks[static_cast<size_t>(li)] =
        steer.hook_for(corpus.languages[static_cast<size_t>(li)]);

  parallel_for_index(n_samples, workers, [&](int i) {
    const ParallelSample& sample = corpus.samples[static_cast<size_t>(i)];
    SampleEmbeddings& se = slot[static_cast<size_t>(i)];
    se.base.resize(static_cast<size_t>(n_langs) * n_layers);
    se.steered.resize(static_cast<size_t>(n_langs) * n_layers);
    for (int li = 0; li < n_langs; ++li) {
      const std::string& lang = corpus.languages[static_cast<size_t>(li)];
      const std::vector<int> tokens = tok.encode(sample.texts.at(lang));
      auto extract = [&](const SteerFn& hook,
                         std::vector<std::vector<float>>& dst) {
        ForwardOptions opts;
        opts.capture_hidden = layers;
        opts.steer = hook;
        ForwardResult r = forward(model, tokens, opts);
        for (int k = 0; k < n_layers; ++k) {
          const Matrix& hid = r.hidden.at(layers[static_cast<size_t>(k)]);
          std::vector<float> emb(static_cast<size_t>(hid.cols), 0.0f);
          for (int p = 0; p < hid.rows; ++p)
            for (int c = 0; c < hid.cols; ++c)
              emb[static_cast<size_t>(c)] += hid.at(p, c);
          for (float& v : emb) v /= static_cast<float>(hid.rows);
          dst[static_cast<size_t>(li) * n_layers + k] = std::move(emb);
        }
      };
      extract(SteerFn{}, se.base);
      if (hooks[static_cast<size_t>(li)]) {
        extract(hooks[static_cast<size_t>(li)], se.steered);
      } else {
        for (int k = 0; k < n_layers; ++k)
          se.steered[static_cast<size_t>(li) * n_layers + k] =
              se.base[static_cast<size_t>(li) * n_layers + k];
      }
    }
  });

  int anchor_idx = 0;
  for (int li = 0; li < n_langs; ++li)
    if (corpus.languages[static_cast<size_t>(li)] == anchor) anchor_idx = li;

  AlignmentReport report;
  for (int li = 0; li < n_langs; ++li) {
    if (li == anchor_idx) continue;
    double before = 0.0, after = 0.0;
    for (int k = 0; k < n_layers; ++k) {
      double b = 0.0, a = 0.0;
      for (int i = 0; i < n_samples; ++i) {
        const SampleEmbeddings& se = slot[static_cast<size_t>(i)];
        const size_t lidx = static_cast<size_t>(li) * n_layers + k;
        const size_t aidx = static_cast<size_t>(anchor_idx) * n_layers + k;
        b += cosine(se.base[lidx], se.base[aidx]);
        a += cosine(se.steered[lidx], se.steered[aidx]);
      }
      before += b / n_samples;
      after += a / n_samples;
    }
    AlignmentRow row;
    row.lang = corpus.languages[static_cast<size_t>(li)];
    row.before = before / n_layers;
    row.after = after / n_layers;
    row.delta = row.after - row.before;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<float> centroid(const std::vector<std::vector<float>>& points) {
  if (points.empty()) throw DegenerateInputError("centroid: empty point set");
  const size_t dim = points.front().size();
  std::vector<double> acc(dim, 0.0);
  for (const std::vector<float>& p : points) {
    if (p.size() != dim) throw ShapeError("centroid: ragged point set");
    for (size_t i = 0; i < dim; ++i) acc[i] += p[i];
  }
  std::vector<float> out(dim);
  for (size_t i = 0; i < dim; ++i)
    out[i] = static_cast<float>(acc[i] / static_cast<double>(points.size()));
  return out;
}

std::array<double, 2> centroid2d(const std::vector<std::array<double, 2>>& points) {
  if (points.empty()) throw DegenerateInputError("centroid: empty point set");
  std::array<double, 2> acc{0.0, 0.0};
  for (const std::array<double, 2>& p : points) {
    acc[0] += p[0];
    acc[1] += p[1];
  }
  acc[0] /= static_cast<double>(points.size());
  acc[1] /= static_cast<double>(points.size());
  return acc;
}

GainScatter alignment_vs_gain(const AlignmentReport& alignment,
                              const std::map<std::string, double>& metric_delta) {
  GainScatter out;
  std::vector<double> xs, ys;
  for (const AlignmentRow& row : alignment.rows) {
    const auto it = metric_delta.find(row.lang);
    if (it == metric_delta.end())
      throw ValidationError("alignment_vs_gain: no metric delta for language \"" +
                            row.lang + "\"");
    out.points.push_back({row.lang, row.delta, it->second});
    xs.push_back(row.delta);
    ys.push_back(it->second);
  }
  out.fit = linear_fit(xs, ys);
  return out;
}

}  // namespace xsteer
