#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "xsteer/corpus.hpp"
#include "xsteer/eval.hpp"
#include "xsteer/mathstats.hpp"
#include "xsteer/model.hpp"
#include "xsteer/tokenizer.hpp"

namespace xsteer {

// Sentence embedding from the residual stream after `layer`: mean over token
// positions by default, or the final position when `final_position` is set.
// The conventional extraction point is the penultimate layer (n_layers - 2).
std::vector<float> embed_text(const ModelWeights& model, const Tokenizer& tok,
                              const std::string& text, int layer,
                              const SteerFn& steer = nullptr,
                              bool final_position = false);

// Plain cosine; throws DegenerateInputError when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

// Mean over paired samples (keyed by sample id) of the cosine between a
// language's embedding and the anchor's. Key mismatch -> ValidationError.
double mean_cosine_to_anchor(
    const std::map<std::string, std::vector<float>>& lang_embeddings,
    const std::map<std::string, std::vector<float>>& anchor_embeddings);

struct AlignmentRow {
  std::string lang;
  double before = 0.0;  // baseline cosine to anchor
  double after = 0.0;   // steered cosine to anchor
  double delta = 0.0;   // after - before
};

struct AlignmentReport {
  std::vector<AlignmentRow> rows;  // non-anchor languages, corpus order
};

// Cosine-to-anchor per non-anchor language, averaged over samples and then
// over the given layers (typically the bridge layers), computed under the
// baseline and under the steering context. Anchor embeddings are shared
// between the two runs (the bypass makes them identical by construction).
AlignmentReport alignment_to_anchor(const ModelWeights& model, const Tokenizer& tok,
                                    const ParallelCorpus& corpus,
                                    const SteeringContext& steer,
                                    const std::vector<int>& layers,
                                    int workers = 1);

// Arithmetic mean of a non-empty point set.
std::vector<float> centroid(const std::vector<std::vector<float>>& points);
std::array<double, 2> centroid2d(const std::vector<std::array<double, 2>>& points);

struct ScatterPoint {
  std::string lang;
  double x = 0.0;  // alignment delta
  double y = 0.0;  // metric delta
};

struct GainScatter {
  std::vector<ScatterPoint> points;
  LinearFit fit;
};

// Regression of per-language metric change against alignment change (the
// anchor never appears: AlignmentReport only covers non-anchor languages).
// Languages missing a metric delta raise ValidationError.
GainScatter alignment_vs_gain(const AlignmentReport& alignment,
                              const std::map<std::string, double>& metric_delta);

}  // namespace xsteer
