#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "xsteer/corpus.hpp"
#include "xsteer/model.hpp"
#include "xsteer/steering.hpp"
#include "xsteer/tokenizer.hpp"

namespace xsteer {

// Ordered label token ids for constrained classification ("0", "1", "2" by
// default). Each label string must encode to exactly one token.
struct LabelSet {
  std::vector<int> token_ids;
  static LabelSet from_labels(const std::vector<std::string>& labels,
                              const Tokenizer& tok);
};

struct LanguageMetrics {
  std::string lang;
  int n = 0;
  double accuracy = 0.0;  // classification
  double macro_f1 = 0.0;  // classification, macro over the label set
  double token_f1 = 0.0;  // span
};

struct EvalReport {
  std::string task;  // "classify" | "span"
  bool steered = false;
  std::string config_digest = "baseline";
  std::vector<LanguageMetrics> per_language;

  // Primary metric (accuracy or token F1) averaged over languages.
  double mean_metric() const;
  const LanguageMetrics& for_lang(const std::string& lang) const;
};

// Owns the per-language hooks for one steering configuration: prebuilds the
// union mask once, or one mask set per language under per-language scope.
class SteeringContext {
 public:
  SteeringContext(SteeringConfig config, const CategoryTable& table);
  const SteeringConfig& config() const { return config_; }
  // Empty function for the anchor (full bypass).
  SteerFn hook_for(const std::string& lang) const;

 private:
  SteeringConfig config_;
  SteeringMasks union_masks_;
  std::map<std::string, SteeringMasks> per_lang_masks_;
};

// Constrained classification: per sample, the prompt is scored once and the
// prediction is the argmax over the label tokens' final-position logits
// (ties -> lowest label index). Reports accuracy and macro-F1 per language.
// `steer` may be null for the baseline. Samples for languages outside
// `languages` are ignored; a requested language with no samples raises
// ValidationError. Parallelizes over samples with a deterministic merge.
EvalReport eval_classify(const ModelWeights& model, const Tokenizer& tok,
                         const std::vector<ClassifySample>& samples,
                         const LabelSet& labels, const std::string& tmpl,
                         const std::vector<std::string>& languages,
                         const SteeringContext* steer = nullptr, int workers = 1);

// Span generation: greedy decode up to max_new tokens, score the decoded
// continuation against the gold answer with token-level F1.
EvalReport eval_span(const ModelWeights& model, const Tokenizer& tok,
                     const std::vector<SpanSample>& samples, const std::string& tmpl,
                     const std::vector<std::string>& languages,
                     const SteeringContext* steer = nullptr, int max_new = 32,
                     int workers = 1);

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path);
void write_reports_json(const std::vector<EvalReport>& reports,
                        const std::string& path);
std::vector<EvalReport> load_reports_json(const std::string& path);

struct GridCell {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double metric = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;  // beta-major, then gamma, then alpha
  GridCell baseline;            // alpha = 0, always evaluated
  GridCell best;                // ties -> smaller |alpha|, then beta, then gamma
};

// Evaluates eval_cell(alpha, beta, gamma) over the full grid plus the
// (0,0,0) baseline; alpha == 0 cells reuse the baseline value since the
// blend is then the identity. The baseline competes in the argmax, so
// best.metric >= baseline.metric by construction.
GridSearchResult grid_search(
    const std::vector<double>& alphas, const std::vector<double>& betas,
    const std::vector<double>& gammas,
    const std::function<double(double alpha, double beta, double gamma)>& eval_cell);

// CSV matrix: one row per (beta, gamma), one column per alpha (0 included).
void write_grid_csv(const GridSearchResult& r, const std::string& path);
void write_grid_json(const GridSearchResult& r, const std::string& path);

// Dev/test split by file order: the dev slice is the first `dev_per_lang`
// samples of each language; the rest is everything after them.
template <typename Sample>
std::vector<Sample> take_dev_slice(const std::vector<Sample>& samples,
                                   int dev_per_lang) {
  std::map<std::string, int> taken;
  std::vector<Sample> out;
  for (const Sample& s : samples)
    if (taken[s.lang]++ < dev_per_lang) out.push_back(s);
  return out;
}

template <typename Sample>
std::vector<Sample> drop_dev_slice(const std::vector<Sample>& samples,
                                   int dev_per_lang) {
  std::map<std::string, int> taken;
  std::vector<Sample> out;
  for (const Sample& s : samples)
    if (taken[s.lang]++ >= dev_per_lang) out.push_back(s);
  return out;
}

}  // namespace xsteer
