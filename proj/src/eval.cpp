#include "xsteer/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <json.hpp>

#include "xsteer/mathstats.hpp"
#include "xsteer/parallel.hpp"
#include "xsteer/text.hpp"

namespace xsteer {

using nlohmann::json;

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

LabelSet LabelSet::from_labels(const std::vector<std::string>& labels,
                               const Tokenizer& tok) {
  if (labels.empty()) throw ValidationError("label set: no labels");
  LabelSet out;
  for (const std::string& label : labels) {
    const std::vector<int> ids = tok.encode(label);
    if (ids.size() != 1)
      throw ValidationError("label \"" + label + "\" does not encode to a single "
                            "token (got " + std::to_string(ids.size()) + ")");
    if (std::find(out.token_ids.begin(), out.token_ids.end(), ids[0]) !=
        out.token_ids.end())
      throw ValidationError("label \"" + label + "\" duplicates another label's token");
    out.token_ids.push_back(ids[0]);
  }
  return out;
}

double EvalReport::mean_metric() const {
  if (per_language.empty()) return 0.0;
  double sum = 0.0;
  for (const LanguageMetrics& m : per_language)
    sum += task == "classify" ? m.accuracy : m.token_f1;
  return sum / static_cast<double>(per_language.size());
}

const LanguageMetrics& EvalReport::for_lang(const std::string& lang) const {
  for (const LanguageMetrics& m : per_language)
    if (m.lang == lang) return m;
  throw ValidationError("report has no entry for language \"" + lang + "\"");
}

SteeringContext::SteeringContext(SteeringConfig config, const CategoryTable& table)
    : config_(std::move(config)) {
  config_.validate();
  config_.validate_layers(table.n_layers);
  if (config_.spec_scope == "union") {
    union_masks_ = build_masks(table, config_);
  } else {
    for (const std::string& lang : config_.languages)
      if (lang != config_.anchor)
        per_lang_masks_.emplace(lang, build_masks(table, config_, lang));
  }
}

SteerFn SteeringContext::hook_for(const std::string& lang) const {
  if (std::find(config_.languages.begin(), config_.languages.end(), lang) ==
      config_.languages.end())
    throw ValidationError("steering context: language \"" + lang +
                          "\" not in the configured set");
  if (lang == config_.anchor) return SteerFn{};
  if (config_.spec_scope == "union")
    return make_steering_hook(config_, union_masks_, lang);
  return make_steering_hook(config_, per_lang_masks_.at(lang), lang);
}

namespace {

// Macro-F1 over the whole label set; a class absent from both gold and
// predictions contributes zero.
double macro_f1(const std::vector<int>& gold, const std::vector<int>& pred,
                int n_classes) {
  double sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == c && gold[i] == c) ++tp;
      else if (pred[i] == c) ++fp;
      else if (gold[i] == c) ++fn;
    }
    const int denom = 2 * tp + fp + fn;
    sum += denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
  }
  return sum / static_cast<double>(n_classes);
}

template <typename Sample>
struct Item {
  const Sample* s;
  int lang_idx;
};

template <typename Sample>
std::vector<Item<Sample>> group_items(const std::vector<Sample>& samples,
                                      const std::vector<std::string>& languages) {
  if (languages.empty()) throw ValidationError("eval: no languages requested");
  std::vector<Item<Sample>> items;
  for (size_t li = 0; li < languages.size(); ++li) {
    size_t before = items.size();
    for (const Sample& s : samples)
      if (s.lang == languages[li])
        items.push_back({&s, static_cast<int>(li)});
    if (items.size() == before)
      throw ValidationError("eval: no samples for language \"" + languages[li] +
                            "\"");
  }
  return items;
}

std::vector<SteerFn> hooks_per_language(const std::vector<std::string>& languages,
                                        const SteeringContext* steer) {
  std::vector<SteerFn> hooks(languages.size());
  if (steer)
    for (size_t li = 0; li < languages.size(); ++li)
      hooks[li] = steer->hook_for(languages[li]);
  return hooks;
}

}  // namespace

EvalReport eval_classify(const ModelWeights& model, const Tokenizer& tok,
                         const std::vector<ClassifySample>& samples,
                         const LabelSet& labels, const std::string& tmpl,
                         const std::vector<std::string>& languages,
                         const SteeringContext* steer, int workers) {
  const int n_classes = static_cast<int>(labels.token_ids.size());
  for (int id : labels.token_ids)
    if (id < 0 || id >= model.config.vocab_size)
      throw ValidationError("label token id " + std::to_string(id) +
                            " outside model vocab");

  const auto items = group_items(samples, languages);
  for (const auto& it : items)
    if (it.s->label >= n_classes)
      throw ValidationError("sample \"" + it.s->id + "\" has gold label " +
                            std::to_string(it.s->label) + " but only " +
                            std::to_string(n_classes) + " labels are configured");

  const std::vector<SteerFn> hooks = hooks_per_language(languages, steer);

  std::vector<int> predicted(items.size(), -1);
  parallel_for_index(static_cast<int>(items.size()), workers, [&](int i) {
    const auto& it = items[static_cast<size_t>(i)];
    const std::vector<int> tokens = tok.encode(build_prompt(*it.s, tmpl));
    ForwardOptions opts;
    opts.steer = hooks[static_cast<size_t>(it.lang_idx)];
    ForwardResult r = forward(model, tokens, opts);
    const float* logits = r.logits.row(static_cast<int>(tokens.size()) - 1);
    int best = 0;  // ties resolve to the lowest label index
    for (int c = 1; c < n_classes; ++c)
      if (logits[labels.token_ids[static_cast<size_t>(c)]] >
          logits[labels.token_ids[static_cast<size_t>(best)]])
        best = c;
    predicted[static_cast<size_t>(i)] = best;
  });

  EvalReport rep;
  rep.task = "classify";
  rep.steered = steer != nullptr;
  rep.config_digest = steer ? steering_config_digest(steer->config()) : "baseline";
  for (size_t li = 0; li < languages.size(); ++li) {
    std::vector<int> gold, pred;
    for (size_t i = 0; i < items.size(); ++i) {
      if (items[i].lang_idx != static_cast<int>(li)) continue;
      gold.push_back(items[i].s->label);
      pred.push_back(predicted[i]);
    }
    int correct = 0;
    for (size_t i = 0; i < gold.size(); ++i)
      if (gold[i] == pred[i]) ++correct;
    LanguageMetrics m;
    m.lang = languages[li];
    m.n = static_cast<int>(gold.size());
    m.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
    m.macro_f1 = macro_f1(gold, pred, n_classes);
    rep.per_language.push_back(std::move(m));
  }
  return rep;
}

EvalReport eval_span(const ModelWeights& model, const Tokenizer& tok,
                     const std::vector<SpanSample>& samples, const std::string& tmpl,
                     const std::vector<std::string>& languages,
                     const SteeringContext* steer, int max_new, int workers) {
  const auto items = group_items(samples, languages);
  const std::vector<SteerFn> hooks = hooks_per_language(languages, steer);

  std::vector<double> scores(items.size(), 0.0);
  parallel_for_index(static_cast<int>(items.size()), workers, [&](int i) {
    const auto& it = items[static_cast<size_t>(i)];
    const std::vector<int> prompt = tok.encode(build_prompt(*it.s, tmpl));
    const std::vector<int> full = greedy_decode(
        model, prompt, max_new, hooks[static_cast<size_t>(it.lang_idx)]);
    std::vector<int> gen(full.begin() + static_cast<std::ptrdiff_t>(prompt.size()),
                         full.end());
    if (!gen.empty() && gen.back() == model.config.eos_token) gen.pop_back();
    scores[static_cast<size_t>(i)] = token_f1(tok.decode(gen), it.s->answer);
  });

  EvalReport rep;
  rep.task = "span";
  rep.steered = steer != nullptr;
  rep.config_digest = steer ? steering_config_digest(steer->config()) : "baseline";
  for (size_t li = 0; li < languages.size(); ++li) {
    double sum = 0.0;
    int n = 0;
    for (size_t i = 0; i < items.size(); ++i) {
      if (items[i].lang_idx != static_cast<int>(li)) continue;
      sum += scores[i];
      ++n;
    }
    LanguageMetrics m;
    m.lang = languages[li];
    m.n = n;
    m.token_f1 = sum / static_cast<double>(n);
    rep.per_language.push_back(std::move(m));
  }
  return rep;
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "language,metric,value,n,config\n";
  for (const EvalReport& r : reports) {
    for (const LanguageMetrics& m : r.per_language) {
      if (r.task == "classify") {
        out << m.lang << ",accuracy," << fmt9(m.accuracy) << "," << m.n << ","
            << r.config_digest << "\n";
        out << m.lang << ",macro_f1," << fmt9(m.macro_f1) << "," << m.n << ","
            << r.config_digest << "\n";
      } else {
        out << m.lang << ",token_f1," << fmt9(m.token_f1) << "," << m.n << ","
            << r.config_digest << "\n";
      }
    }
  }
  if (!out) throw ValidationError("short write to " + path);
}

namespace {

json report_to_json(const EvalReport& r) {
  json langs = json::array();
  for (const LanguageMetrics& m : r.per_language) {
    json e{{"lang", m.lang}, {"n", m.n}};
    if (r.task == "classify") {
      e["accuracy"] = m.accuracy;
      e["macro_f1"] = m.macro_f1;
    } else {
      e["token_f1"] = m.token_f1;
    }
    langs.push_back(std::move(e));
  }
  return json{{"task", r.task},
              {"steered", r.steered},
              {"config_digest", r.config_digest},
              {"mean_metric", r.mean_metric()},
              {"per_language", langs}};
}

}  // namespace

void write_reports_json(const std::vector<EvalReport>& reports,
                        const std::string& path) {
  json arr = json::array();
  for (const EvalReport& r : reports) arr.push_back(report_to_json(r));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << arr.dump(2) << "\n";
  if (!out) throw ValidationError("short write to " + path);
}

std::vector<EvalReport> load_reports_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  json arr;
  try {
    in >> arr;
  } catch (const std::exception& e) {
    throw ParseError(path + ": not valid JSON: " + e.what());
  }
  if (!arr.is_array()) throw ParseError(path + ": expected a JSON array of reports");
  std::vector<EvalReport> out;
  try {
    for (const json& j : arr) {
      EvalReport r;
      r.task = j.at("task").get<std::string>();
      r.steered = j.at("steered").get<bool>();
      r.config_digest = j.at("config_digest").get<std::string>();
      for (const json& e : j.at("per_language")) {
        LanguageMetrics m;
        m.lang = e.at("lang").get<std::string>();
        m.n = e.at("n").get<int>();
        if (r.task == "classify") {
          m.accuracy = e.at("accuracy").get<double>();
          m.macro_f1 = e.at("macro_f1").get<double>();
        } else {
          m.token_f1 = e.at("token_f1").get<double>();
        }
        r.per_language.push_back(std::move(m));
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

GridSearchResult grid_search(
    const std::vector<double>& alphas, const std::vector<double>& betas,
    const std::vector<double>& gammas,
    const std::function<double(double alpha, double beta, double gamma)>& eval_cell) {
  if (alphas.empty() || betas.empty() || gammas.empty())
    throw ValidationError("grid search: all three grids must be non-empty");

  GridSearchResult res;
  res.baseline = {0.0, 0.0, 0.0, eval_cell(0.0, 0.0, 0.0)};
  res.best = res.baseline;

  auto tie_key = [](const GridCell& c) {
    return std::make_tuple(std::fabs(c.alpha), c.beta, c.gamma);
  };
  auto consider = [&](const GridCell& c) {
    if (c.metric > res.best.metric ||
        (c.metric == res.best.metric && tie_key(c) < tie_key(res.best)))
      res.best = c;
  };

  for (double b : betas) {
    for (double g : gammas) {
      for (double a : alphas) {
        GridCell cell{a, b, g, 0.0};
        // alpha = 0 is the identity regardless of beta/gamma: reuse the
        // baseline instead of re-evaluating.
        cell.metric = a == 0.0 ? res.baseline.metric : eval_cell(a, b, g);
        consider(cell);
        res.cells.push_back(cell);
      }
    }
  }
  return res;
}

void write_grid_csv(const GridSearchResult& r, const std::string& path) {
  std::vector<double> alphas{0.0};
  for (const GridCell& c : r.cells)
    if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end())
      alphas.push_back(c.alpha);
  std::sort(alphas.begin(), alphas.end());

  std::vector<std::pair<double, double>> rows;
  std::map<std::pair<double, double>, std::map<double, double>> table;
  for (const GridCell& c : r.cells) {
    const std::pair<double, double> key{c.beta, c.gamma};
    if (!table.count(key)) rows.push_back(key);
    table[key][c.alpha] = c.metric;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "beta,gamma";
  for (double a : alphas) out << ",alpha=" << fmt9(a);
  out << "\n";
  for (const std::pair<double, double>& bg : rows) {
    out << fmt9(bg.first) << "," << fmt9(bg.second);
    const auto& by_alpha = table.at(bg);
    for (double a : alphas) {
      const auto it = by_alpha.find(a);
      out << ",";
      out << fmt9(it != by_alpha.end() ? it->second : r.baseline.metric);
    }
    out << "\n";
  }
  if (!out) throw ValidationError("short write to " + path);
}

namespace {

json cell_to_json(const GridCell& c) {
  return json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"metric", c.metric}};
}

}  // namespace

void write_grid_json(const GridSearchResult& r, const std::string& path) {
  json cells = json::array();
  for (const GridCell& c : r.cells) cells.push_back(cell_to_json(c));
  json doc{{"baseline", cell_to_json(r.baseline)},
           {"best", cell_to_json(r.best)},
           {"cells", cells}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw ValidationError("short write to " + path);
}

}  // namespace xsteer
