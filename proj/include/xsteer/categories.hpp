#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xsteer/stats.hpp"

namespace xsteer {

enum class CategoryKind : std::uint8_t {
  Dead = 0,
  LanguageSpecific = 1,
  PartialShared = 2,
  AllShared = 3,
};

struct NeuronCategory {
  CategoryKind kind = CategoryKind::Dead;
  int lang = -1;  // language index, meaningful only for LanguageSpecific

  bool operator==(const NeuronCategory&) const = default;
};

struct CategoryTable {
  std::vector<std::string> languages;
  int n_layers = 0;
  int d_ff = 0;
  float t_act = 0.0f;
  std::string mode;
  std::string corpus_digest;
  std::vector<NeuronCategory> cats;  // [layer * d_ff + neuron]

  const NeuronCategory& at(int layer, int neuron) const {
    return cats[static_cast<size_t>(layer) * d_ff + neuron];
  }
  NeuronCategory& at(int layer, int neuron) {
    return cats[static_cast<size_t>(layer) * d_ff + neuron];
  }
};

// A neuron is active for a language iff its mean activation strictly exceeds
// t_act. Active-language count 0 -> Dead, 1 -> LanguageSpecific(that
// language), all languages -> AllShared, anything in between ->
// PartialShared. Deterministic: same stats in, same table out.
CategoryTable categorize(const ActivationStats& stats, float t_act);

// Per-layer category fractions ordered (dead, language_specific,
// partial_shared, all_shared); language-specific pools all languages.
struct LayerCategoryDistribution {
  std::vector<std::array<double, 4>> fractions;  // one entry per layer
  int n_layers() const { return static_cast<int>(fractions.size()); }
};

LayerCategoryDistribution layer_distribution(const CategoryTable& table);

// Picks the contiguous `window` of layers maximizing the summed score
// (partial_shared - dead - language_specific), searching starts in
// [min_layer, n_layers - exclude_tail - window]. min_layer < 0 means the
// upper half of the network (n_layers / 2). Ties go to deeper layers.
// Throws ValidationError when no start is feasible.
std::vector<int> select_bridge_layers(const LayerCategoryDistribution& dist,
                                      int window, int exclude_tail = 2,
                                      int min_layer = -1);

// JSON file: run-length-encoded category codes per layer plus a provenance
// block (t_act, mode, languages, corpus digest). Codes: 0 dead,
// 1 partial-shared, 2 all-shared, 3+i language-specific for languages[i].
void save_categories(const CategoryTable& table, const std::string& path);
CategoryTable load_categories(const std::string& path);

}  // namespace xsteer
