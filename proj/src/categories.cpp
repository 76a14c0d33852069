#include "xsteer/categories.hpp"

#include <fstream>

#include <json.hpp>

namespace xsteer {

using nlohmann::json;

CategoryTable categorize(const ActivationStats& stats, float t_act) {
  if (t_act < 0.0f) throw ValidationError("categorize: t_act must be >= 0");
  if (stats.languages.empty())
    throw ValidationError("categorize: stats carry no languages");

  CategoryTable table;
  table.languages = stats.languages;
  table.n_layers = stats.n_layers;
  table.d_ff = stats.d_ff;
  table.t_act = t_act;
  table.mode = stats.mode;
  table.corpus_digest = stats.corpus_digest;
  table.cats.resize(static_cast<size_t>(stats.n_layers) * stats.d_ff);

  const int n_langs = stats.n_languages();
  for (int l = 0; l < stats.n_layers; ++l) {
    for (int n = 0; n < stats.d_ff; ++n) {
      int active = 0;
      int only = -1;
      for (int li = 0; li < n_langs; ++li) {
        if (stats.at(l, n, li) > t_act) {
          ++active;
          only = li;
        }
      }
      NeuronCategory& cat = table.at(l, n);
      if (active == 0) {
        cat = {CategoryKind::Dead, -1};
      } else if (active == 1) {
        cat = {CategoryKind::LanguageSpecific, only};
      } else if (active == n_langs) {
        cat = {CategoryKind::AllShared, -1};
      } else {
        cat = {CategoryKind::PartialShared, -1};
      }
    }
  }
  return table;
}

LayerCategoryDistribution layer_distribution(const CategoryTable& table) {
  LayerCategoryDistribution dist;
  dist.fractions.resize(static_cast<size_t>(table.n_layers));
  for (int l = 0; l < table.n_layers; ++l) {
    std::array<int, 4> counts{0, 0, 0, 0};
    for (int n = 0; n < table.d_ff; ++n) {
      switch (table.at(l, n).kind) {
        case CategoryKind::Dead: ++counts[0]; break;
        case CategoryKind::LanguageSpecific: ++counts[1]; break;
        case CategoryKind::PartialShared: ++counts[2]; break;
        case CategoryKind::AllShared: ++counts[3]; break;
      }
    }
    for (int k = 0; k < 4; ++k)
      dist.fractions[static_cast<size_t>(l)][static_cast<size_t>(k)] =
          static_cast<double>(counts[static_cast<size_t>(k)]) / table.d_ff;
  }
  return dist;
}

std::vector<int> select_bridge_layers(const LayerCategoryDistribution& dist,
                                      int window, int exclude_tail,
                                      int min_layer) {
  const int n_layers = dist.n_layers();
  if (window < 1) throw ValidationError("bridge selection: window must be >= 1");
  if (exclude_tail < 0)
    throw ValidationError("bridge selection: exclude_tail must be >= 0");
  if (min_layer < 0) min_layer = n_layers / 2;

  const int last_start = n_layers - exclude_tail - window;
  if (last_start < min_layer)
    throw ValidationError("bridge selection: no feasible window of size " +
                          std::to_string(window) + " in layers [" +
                          std::to_string(min_layer) + ", " +
                          std::to_string(n_layers - exclude_tail) + ")");

  auto score_at = [&](int l) {
    const std::array<double, 4>& f = dist.fractions[static_cast<size_t>(l)];
    return f[2] - f[0] - f[1];  // partial_shared - dead - language_specific
  };

  int best_start = min_layer;
  double best_score = 0.0;
  for (int s = min_layer; s <= last_start; ++s) {
    double sc = 0.0;
    for (int l = s; l < s + window; ++l) sc += score_at(l);
    // >= so equal scores prefer the deeper window
    if (s == min_layer || sc >= best_score) {
      best_score = sc;
      best_start = s;
    }
  }

  std::vector<int> out(static_cast<size_t>(window));
  for (int i = 0; i < window; ++i) out[static_cast<size_t>(i)] = best_start + i;
  return out;
}

namespace {

int code_of(const NeuronCategory& c) {
  switch (c.kind) {
    case CategoryKind::Dead: return 0;
    case CategoryKind::PartialShared: return 1;
    case CategoryKind::AllShared: return 2;
    case CategoryKind::LanguageSpecific: return 3 + c.lang;
  }
  return 0;
}

NeuronCategory category_of(int code, int n_langs, const std::string& path) {
  if (code == 0) return {CategoryKind::Dead, -1};
  if (code == 1) return {CategoryKind::PartialShared, -1};
  if (code == 2) return {CategoryKind::AllShared, -1};
  const int lang = code - 3;
  if (lang < 0 || lang >= n_langs)
    throw ParseError(path + ": category code " + std::to_string(code) +
                     " outside the documented range");
  return {CategoryKind::LanguageSpecific, lang};
}

}  // namespace

void save_categories(const CategoryTable& table, const std::string& path) {
  json layers = json::array();
  for (int l = 0; l < table.n_layers; ++l) {
    json runs = json::array();
    int run_code = code_of(table.at(l, 0));
    int run_len = 1;
    for (int n = 1; n < table.d_ff; ++n) {
      const int code = code_of(table.at(l, n));
      if (code == run_code) {
        ++run_len;
      } else {
        runs.push_back({run_code, run_len});
        run_code = code;
        run_len = 1;
      }
    }
    runs.push_back({run_code, run_len});
    layers.push_back(std::move(runs));
  }

  json doc{{"n_layers", table.n_layers},
           {"d_ff", table.d_ff},
           {"codes", "0=dead, 1=partial_shared, 2=all_shared, 3+i=specific(languages[i])"},
           {"layers", layers},
           {"provenance",
            {{"t_act", table.t_act},
             {"mode", table.mode},
             {"languages", table.languages},
             {"corpus_digest", table.corpus_digest}}}};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw ValidationError("short write to " + path);
}

CategoryTable load_categories(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ParseError(path + ": not valid JSON: " + e.what());
  }

  CategoryTable table;
  try {
    table.n_layers = doc.at("n_layers").get<int>();
    table.d_ff = doc.at("d_ff").get<int>();
    const json& prov = doc.at("provenance");
    table.t_act = prov.at("t_act").get<float>();
    table.mode = prov.at("mode").get<std::string>();
    table.languages = prov.at("languages").get<std::vector<std::string>>();
    table.corpus_digest = prov.at("corpus_digest").get<std::string>();

    const json& layers = doc.at("layers");
    if (static_cast<int>(layers.size()) != table.n_layers)
      throw ParseError(path + ": layer count disagrees with n_layers");
    const int n_langs = static_cast<int>(table.languages.size());
    table.cats.reserve(static_cast<size_t>(table.n_layers) * table.d_ff);
    for (const json& runs : layers) {
      int total = 0;
      for (const json& run : runs) {
        const int code = run.at(0).get<int>();
        const int len = run.at(1).get<int>();
        if (len <= 0) throw ParseError(path + ": non-positive run length");
        const NeuronCategory cat = category_of(code, n_langs, path);
        for (int i = 0; i < len; ++i) table.cats.push_back(cat);
        total += len;
      }
      if (total != table.d_ff)
        throw ParseError(path + ": layer runs sum to " + std::to_string(total) +
                         ", expected d_ff = " + std::to_string(table.d_ff));
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return table;
}

}  // namespace xsteer
