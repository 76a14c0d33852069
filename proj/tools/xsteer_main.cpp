// xsteer: command-line front end for the cross-lingual activation steering
// laboratory. Subcommands cover the whole pipeline: gen-toy -> stats ->
// categorize -> bridge -> eval/grid -> analyze. Every command stages its
// outputs and renames them into place on success, and writes a manifest
// (inputs, digests, resolved config, version) next to its artifacts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xsteer/analysis.hpp"
#include "xsteer/categories.hpp"
#include "xsteer/common.hpp"
#include "xsteer/corpus.hpp"
#include "xsteer/eval.hpp"
#include "xsteer/mathstats.hpp"
#include "xsteer/model.hpp"
#include "xsteer/parallel.hpp"
#include "xsteer/staging.hpp"
#include "xsteer/stats.hpp"
#include "xsteer/steering.hpp"
#include "xsteer/svg.hpp"
#include "xsteer/tokenizer.hpp"
#include "xsteer/tsne.hpp"
#include "xsteer/weights_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xsteer;

namespace {

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string default_out_dir() {
  const char* env = std::getenv("XSTEER_OUT_DIR");
  return (env && *env) ? std::string(env) : std::string("out");
}

fs::path resolve_artifact(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return fs::path(flag);
  return fs::path(default_out_dir()) / fallback;
}

fs::path artifact_dir(const fs::path& artifact) {
  const fs::path parent = artifact.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

fs::path resolve_out_dir(const std::string& flag) {
  return flag.empty() ? fs::path(default_out_dir()) : fs::path(flag);
}

std::string basename_of(const std::string& path) {
  return fs::path(path).filename().string();
}

Tokenizer make_tokenizer(const ModelWeights& model, const std::string& vocab_file) {
  if (!vocab_file.empty())
    return Tokenizer::from_vocab_file(vocab_file, model.config.eos_token);
  return Tokenizer::byte_level(model.config.vocab_size, model.config.eos_token);
}

double primary_metric(const EvalReport& r, const std::string& lang) {
  const LanguageMetrics& m = r.for_lang(lang);
  return r.task == "classify" ? m.accuracy : m.token_f1;
}

std::string default_template(const std::string& task) {
  return task == "classify" ? "P:{premise} H:{hypothesis} A:"
                            : "C:{context} Q:{question} A:";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw ValidationError("short write to " + path.string());
}

// ---------------------------------------------------------------- gen-toy --

struct GenToyOpts {
  std::uint64_t seed = 0;
  int layers = 8, dim = 32, ff = 64, heads = 4, vocab = 257, eos = -1,
      max_seq = 512;
  std::string out;
};

void run_gen_toy(const GenToyOpts& o) {
  ModelConfig cfg;
  cfg.n_layers = o.layers;
  cfg.d_model = o.dim;
  cfg.d_ff = o.ff;
  cfg.n_heads = o.heads;
  cfg.vocab_size = o.vocab;
  cfg.max_seq_len = o.max_seq;
  cfg.eos_token = o.eos < 0 ? o.vocab - 1 : o.eos;
  const ModelWeights w = gen_toy_model(cfg, o.seed);

  const fs::path out = resolve_artifact(o.out, "model.clw");
  OutputStager st(artifact_dir(out));
  const std::string name = out.filename().string();
  save_model(w, st.stage(name).string());
  const json conf{{"seed", o.seed},     {"layers", o.layers},
                  {"dim", o.dim},       {"ff", o.ff},
                  {"heads", o.heads},   {"vocab", o.vocab},
                  {"eos", cfg.eos_token}, {"max_seq", o.max_seq}};
  st.write_manifest("gen-toy", {}, conf.dump(), name + ".manifest.json");
  st.commit();
  std::printf("wrote %s\n", (st.final_dir() / name).string().c_str());
}

// ------------------------------------------------------------------ stats --

struct StatsOpts {
  std::string model, corpus, mode = "abs", vocab_file, out;
  std::vector<std::string> languages;
  int samples = 100, workers = 1;
};

void run_stats(const StatsOpts& o) {
  const ModelWeights model = load_model(o.model);
  const Tokenizer tok = make_tokenizer(model, o.vocab_file);
  CorpusLoadResult loaded = load_parallel_corpus(o.corpus, o.languages);
  if (!loaded.rejected.empty())
    std::fprintf(stderr, "note: %zu corpus samples rejected (missing or empty texts)\n",
                 loaded.rejected.size());
  const ParallelCorpus corpus =
      o.samples > 0 ? first_complete(loaded.corpus, o.samples) : loaded.corpus;
  const ActivationStats stats =
      collect_stats(model, tok, corpus, o.mode, o.workers, file_digest_hex(o.corpus));

  const fs::path out = resolve_artifact(o.out, "stats.cls");
  OutputStager st(artifact_dir(out));
  const std::string name = out.filename().string();
  save_stats(stats, st.stage(name).string());
  const json conf{{"model", basename_of(o.model)},
                  {"corpus", basename_of(o.corpus)},
                  {"languages", o.languages},
                  {"samples", o.samples},
                  {"mode", o.mode},
                  {"tokenizer", o.vocab_file.empty() ? "byte-level"
                                                     : basename_of(o.vocab_file)}};
  st.write_manifest("stats", {o.model, o.corpus}, conf.dump(),
                    name + ".manifest.json");
  st.commit();
  std::printf("collected stats over %d samples x %zu languages\n",
              stats.sample_count, stats.languages.size());
}

// ------------------------------------------------------------- categorize --

struct CategorizeOpts {
  std::string stats, out;
  float t_act = 0.0f;
};

void run_categorize(const CategorizeOpts& o) {
  const ActivationStats stats = load_stats(o.stats);
  const CategoryTable table = categorize(stats, o.t_act);

  const fs::path out = resolve_artifact(o.out, "categories.json");
  OutputStager st(artifact_dir(out));
  const std::string name = out.filename().string();
  save_categories(table, st.stage(name).string());
  const json conf{{"stats", basename_of(o.stats)}, {"t_act", o.t_act}};
  st.write_manifest("categorize", {o.stats}, conf.dump(), name + ".manifest.json");
  st.commit();

  const LayerCategoryDistribution dist = layer_distribution(table);
  double dead = 0.0, spec = 0.0, partial = 0.0, all = 0.0;
  for (const auto& f : dist.fractions) {
    dead += f[0];
    spec += f[1];
    partial += f[2];
    all += f[3];
  }
  const double n = static_cast<double>(dist.n_layers());
  std::printf("category fractions: dead %.3f specific %.3f partial %.3f shared %.3f\n",
              dead / n, spec / n, partial / n, all / n);
}

// ----------------------------------------------------------------- bridge --

struct BridgeOpts {
  std::string categories, out;
  int window = 2, exclude_tail = 2, min_layer = -1;
};

void run_bridge(const BridgeOpts& o) {
  const CategoryTable table = load_categories(o.categories);
  const LayerCategoryDistribution dist = layer_distribution(table);
  const std::vector<int> layers =
      select_bridge_layers(dist, o.window, o.exclude_tail, o.min_layer);

  std::vector<double> per_layer;
  per_layer.reserve(dist.fractions.size());
  for (const auto& f : dist.fractions) per_layer.push_back(f[2] - f[0] - f[1]);
  double score = 0.0;
  for (int l : layers) per_layer.at(static_cast<size_t>(l)), score += per_layer[static_cast<size_t>(l)];

  const json art{{"layers", layers},
                 {"window", o.window},
                 {"exclude_tail", o.exclude_tail},
                 {"min_layer", o.min_layer < 0 ? dist.n_layers() / 2 : o.min_layer},
                 {"score", score},
                 {"per_layer_score", per_layer}};

  const fs::path out = resolve_artifact(o.out, "bridge.json");
  OutputStager st(artifact_dir(out));
  const std::string name = out.filename().string();
  write_text(st.stage(name), art.dump(2) + "\n");
  const json conf{{"categories", basename_of(o.categories)},
                  {"window", o.window},
                  {"exclude_tail", o.exclude_tail},
                  {"min_layer", o.min_layer}};
  st.write_manifest("bridge", {o.categories}, conf.dump(), name + ".manifest.json");
  st.commit();
  std::string desc;
  for (int l : layers) desc += (desc.empty() ? "" : ",") + std::to_string(l);
  std::printf("bridge layers: %s\n", desc.c_str());
}

// ------------------------------------------------------------------- eval --

struct EvalOpts {
  std::string model, task = "classify", data, tmpl, steering = "off", categories,
              vocab_file, out_dir;
  std::vector<std::string> languages;
  std::vector<std::string> labels{"0", "1", "2"};
  int max_new = 32, skip = 0, limit = 0, workers = 1;
};

json significance_json(const std::string& task, const std::string& anchor,
                       const std::vector<std::string>& languages,
                       const EvalReport& base, const EvalReport& steered) {
  std::vector<std::string> langs;
  std::vector<double> b, s;
  for (const std::string& l : languages) {
    if (l == anchor) continue;
    langs.push_back(l);
    b.push_back(primary_metric(base, l));
    s.push_back(primary_metric(steered, l));
  }
  json delta = json::array();
  for (size_t i = 0; i < b.size(); ++i) delta.push_back(s[i] - b[i]);
  json out{{"task", task},
           {"metric", task == "classify" ? "accuracy" : "token_f1"},
           {"anchor", anchor},
           {"languages", langs},
           {"baseline", b},
           {"steered", s},
           {"delta", delta}};
  try {
    // Paired over languages, steered minus baseline; the anchor never enters
    // (its pair is identical by construction and would only dilute).
    const TTestResult t = paired_ttest(s, b);
    out["degenerate"] = false;
    out["t"] = t.t;
    out["p"] = t.p;
    out["df"] = t.df;
    out["mean_diff"] = t.mean_diff;
  } catch (const Error& e) {
    out["degenerate"] = true;
    out["reason"] = e.what();
  }
  return out;
}

void run_eval(const EvalOpts& o) {
  const ModelWeights model = load_model(o.model);
  const Tokenizer tok = make_tokenizer(model, o.vocab_file);

  const bool steered = !o.steering.empty() && o.steering != "off";
  SteeringConfig scfg;
  std::optional<SteeringContext> ctx;
  if (steered) {
    if (o.categories.empty())
      throw ValidationError("--categories is required when --steering names a config");
    scfg = load_steering_config(o.steering);
    ctx.emplace(scfg, load_categories(o.categories));
  }
  const std::string tmpl = o.tmpl.empty() ? default_template(o.task) : o.tmpl;

  std::vector<EvalReport> reports;
  if (o.task == "classify") {
    auto samples = load_classify_samples(o.data);
    if (o.skip > 0) samples = drop_dev_slice(samples, o.skip);
    if (o.limit > 0) samples = take_dev_slice(samples, o.limit);
    const LabelSet labels = LabelSet::from_labels(o.labels, tok);
    reports.push_back(eval_classify(model, tok, samples, labels, tmpl, o.languages,
                                    nullptr, o.workers));
    if (ctx)
      reports.push_back(eval_classify(model, tok, samples, labels, tmpl,
                                      o.languages, &*ctx, o.workers));
  } else {
    auto samples = load_span_samples(o.data);
    if (o.skip > 0) samples = drop_dev_slice(samples, o.skip);
    if (o.limit > 0) samples = take_dev_slice(samples, o.limit);
    reports.push_back(eval_span(model, tok, samples, tmpl, o.languages, nullptr,
                                o.max_new, o.workers));
    if (ctx)
      reports.push_back(eval_span(model, tok, samples, tmpl, o.languages, &*ctx,
                                  o.max_new, o.workers));
  }

  OutputStager st(resolve_out_dir(o.out_dir));
  write_reports_csv(reports, st.stage("eval_" + o.task + ".csv").string());
  write_reports_json(reports, st.stage("eval_" + o.task + ".json").string());
  if (ctx) {
    const json sig =
        significance_json(o.task, scfg.anchor, o.languages, reports[0], reports[1]);
    write_text(st.stage("significance_" + o.task + ".json"), sig.dump(2) + "\n");
  }

  json conf{{"model", basename_of(o.model)},
            {"task", o.task},
            {"data", basename_of(o.data)},
            {"languages", o.languages},
            {"template", tmpl},
            {"skip", o.skip},
            {"limit", o.limit},
            {"steering", steered ? basename_of(o.steering) : "off"}};
  if (o.task == "classify") conf["labels"] = o.labels;
  else conf["max_new"] = o.max_new;
  std::vector<std::string> inputs{o.model, o.data};
  if (steered) {
    conf["categories"] = basename_of(o.categories);
    inputs.push_back(o.steering);
    inputs.push_back(o.categories);
  }
  st.write_manifest("eval", inputs, conf.dump(), "eval_" + o.task + ".manifest.json");
  st.commit();
  for (const EvalReport& r : reports)
    std::printf("%s %-8s mean metric %.6f\n", r.task.c_str(),
                r.steered ? "steered" : "baseline", r.mean_metric());
}

// ------------------------------------------------------------------- grid --

struct GridOpts {
  std::string model, task = "classify", data, tmpl, categories, anchor,
              bridge_file, spec_scope = "union", vocab_file, out_dir;
  std::vector<std::string> languages;
  std::vector<std::string> labels{"0", "1", "2"};
  std::vector<int> bridge;
  std::vector<double> alphas{-1.0, -0.5, 0.5, 1.0};
  std::vector<double> betas{0.2, 0.4, 0.6};
  std::vector<double> gammas{0.1, 0.2, 0.4};
  int dev = 200, max_new = 32, workers = 1;
};

void write_grid_svg(const GridSearchResult& r, const std::string& path) {
  // One polyline per (beta, gamma) row: metric as a function of alpha, with
  // the baseline as a flat grey reference line.
  std::vector<std::pair<double, double>> rows;
  std::map<std::pair<double, double>, std::vector<const GridCell*>> by_row;
  for (const GridCell& c : r.cells) {
    const std::pair<double, double> key{c.beta, c.gamma};
    if (!by_row.count(key)) rows.push_back(key);
    by_row[key].push_back(&c);
  }

  double xmin = 0.0, xmax = 0.0;
  double ymin = r.baseline.metric, ymax = r.baseline.metric;
  for (const GridCell& c : r.cells) {
    xmin = std::min(xmin, c.alpha);
    xmax = std::max(xmax, c.alpha);
    ymin = std::min(ymin, c.metric);
    ymax = std::max(ymax, c.metric);
  }
  const double ypad = std::max(1e-6, (ymax - ymin) * 0.08);
  const double xpad = std::max(1e-6, (xmax - xmin) * 0.04);

  SvgPlot plot(640, 420, "grid search");
  plot.set_axes(xmin - xpad, xmax + xpad, ymin - ypad, ymax + ypad, "alpha",
                "mean metric");
  plot.add_line(xmin, r.baseline.metric, xmax, r.baseline.metric, "#888888", 1.0);
  plot.add_legend("baseline", "#888888");
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string& color = SvgPlot::color(i);
    std::vector<const GridCell*> cells = by_row[rows[i]];
    std::sort(cells.begin(), cells.end(),
              [](const GridCell* a, const GridCell* b) { return a->alpha < b->alpha; });
    for (size_t k = 0; k + 1 < cells.size(); ++k)
      plot.add_line(cells[k]->alpha, cells[k]->metric, cells[k + 1]->alpha,
                    cells[k + 1]->metric, color, 1.5);
    for (const GridCell* c : cells) plot.add_point(c->alpha, c->metric, color, 3.0);
    plot.add_legend("beta=" + fmtg(rows[i].first) + " gamma=" + fmtg(rows[i].second),
                    color);
  }
  plot.write(path);
}

void run_grid(const GridOpts& o) {
  const ModelWeights model = load_model(o.model);
  const Tokenizer tok = make_tokenizer(model, o.vocab_file);
  const CategoryTable table = load_categories(o.categories);

  std::vector<int> bridge = o.bridge;
  if (!o.bridge_file.empty()) {
    std::ifstream in(o.bridge_file, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + o.bridge_file);
    json j;
    try {
      in >> j;
      bridge = j.at("layers").get<std::vector<int>>();
    } catch (const std::exception& e) {
      throw ParseError(o.bridge_file + ": " + e.what());
    }
  }
  if (bridge.empty())
    throw ValidationError("grid: provide bridge layers via --bridge or --bridge-file");

  auto make_cfg = [&](double a, double b, double g) {
    SteeringConfig c;
    c.languages = o.languages;
    c.anchor = o.anchor;
    c.bridge_layers = bridge;
    c.t_act = table.t_act;
    c.beta = static_cast<float>(b);
    c.gamma = static_cast<float>(g);
    c.alpha = static_cast<float>(a);
    c.spec_scope = o.spec_scope;
    return c;
  };

  std::vector<ClassifySample> csamples;
  std::vector<SpanSample> ssamples;
  std::optional<LabelSet> labels;
  if (o.task == "classify") {
    csamples = load_classify_samples(o.data);
    if (o.dev > 0) csamples = take_dev_slice(csamples, o.dev);
    labels = LabelSet::from_labels(o.labels, tok);
  } else {
    ssamples = load_span_samples(o.data);
    if (o.dev > 0) ssamples = take_dev_slice(ssamples, o.dev);
  }

  auto eval_cell = [&](double a, double b, double g) -> double {
    std::optional<SteeringContext> ctx;
    if (!(a == 0.0 && b == 0.0 && g == 0.0))
      ctx.emplace(make_cfg(a, b, g), table);
    const SteeringContext* steer = ctx ? &*ctx : nullptr;
    const EvalReport rep =
        o.task == "classify"
            ? eval_classify(model, tok, csamples, *labels,
                            o.tmpl.empty() ? default_template(o.task) : o.tmpl,
                            o.languages, steer, o.workers)
            : eval_span(model, tok, ssamples,
                        o.tmpl.empty() ? default_template(o.task) : o.tmpl,
                        o.languages, steer, o.max_new, o.workers);
    return rep.mean_metric();
  };

  const GridSearchResult res = grid_search(o.alphas, o.betas, o.gammas, eval_cell);

  OutputStager st(resolve_out_dir(o.out_dir));
  write_grid_csv(res, st.stage("grid.csv").string());
  write_grid_json(res, st.stage("grid.json").string());
  write_grid_svg(res, st.stage("grid.svg").string());
  save_steering_config(make_cfg(res.best.alpha, res.best.beta, res.best.gamma),
                       st.stage("best_config.json").string());

  json conf{{"model", basename_of(o.model)},
            {"task", o.task},
            {"data", basename_of(o.data)},
            {"languages", o.languages},
            {"anchor", o.anchor},
            {"bridge_layers", bridge},
            {"alphas", o.alphas},
            {"betas", o.betas},
            {"gammas", o.gammas},
            {"spec_scope", o.spec_scope},
            {"dev", o.dev},
            {"t_act", table.t_act},
            {"categories", basename_of(o.categories)}};
  std::vector<std::string> inputs{o.model, o.data, o.categories};
  if (!o.bridge_file.empty()) inputs.push_back(o.bridge_file);
  st.write_manifest("grid", inputs, conf.dump(), "grid.manifest.json");
  st.commit();
  std::printf("best cell: alpha %g beta %g gamma %g -> %.6f (baseline %.6f)\n",
              res.best.alpha, res.best.beta, res.best.gamma, res.best.metric,
              res.baseline.metric);
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeOpts {
  std::string model, corpus, steering, categories, report, vocab_file, out_dir,
              run_id = "run", embed_pos = "mean";
  std::vector<std::string> languages;
  int max_samples = 60, embed_layer = -1, tsne_iters = 500, workers = 1;
  double tsne_perplexity = 12.0;
  std::uint64_t tsne_seed = 0;
};

void write_alignment_svg(const AlignmentReport& align, const std::string& path) {
  const int n = static_cast<int>(align.rows.size());
  double ymin = 0.0, ymax = 0.0;
  for (const AlignmentRow& r : align.rows) {
    ymin = std::min({ymin, r.before, r.after});
    ymax = std::max({ymax, r.before, r.after});
  }
  const double ypad = std::max(1e-6, (ymax - ymin) * 0.1);
  SvgPlot plot(560, 380, "cosine to anchor (bridge layers)");
  plot.set_axes(-0.6, n - 0.4, ymin - ypad, ymax + ypad,
                "language (csv row order)", "mean cosine");
  for (int i = 0; i < n; ++i) {
    plot.add_bar(i - 0.19, 0.34, align.rows[static_cast<size_t>(i)].before,
                 SvgPlot::color(0));
    plot.add_bar(i + 0.19, 0.34, align.rows[static_cast<size_t>(i)].after,
                 SvgPlot::color(1));
  }
  plot.add_legend("baseline", SvgPlot::color(0));
  plot.add_legend("steered", SvgPlot::color(1));
  plot.write(path);
}

void write_tsne_svg(const std::vector<std::string>& languages,
                    const std::vector<std::pair<int, std::string>>& labels,
                    const std::vector<std::array<double, 2>>& coords,
                    const std::string& title, const std::string& path) {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (const auto& c : coords) {
    xmin = std::min(xmin, c[0]);
    xmax = std::max(xmax, c[0]);
    ymin = std::min(ymin, c[1]);
    ymax = std::max(ymax, c[1]);
  }
  const double xpad = std::max(1e-6, (xmax - xmin) * 0.06);
  const double ypad = std::max(1e-6, (ymax - ymin) * 0.06);
  SvgPlot plot(560, 560, title);
  plot.set_axes(xmin - xpad, xmax + xpad, ymin - ypad, ymax + ypad, "tsne-1",
                "tsne-2");
  for (size_t li = 0; li < languages.size(); ++li) {
    std::vector<std::array<double, 2>> pts;
    for (size_t i = 0; i < coords.size(); ++i)
      if (labels[i].first == static_cast<int>(li)) pts.push_back(coords[i]);
    const std::string& color = SvgPlot::color(li);
    for (const auto& p : pts) plot.add_point(p[0], p[1], color, 2.5);
    if (!pts.empty()) {
      const std::array<double, 2> c = centroid2d(pts);
      plot.add_cross(c[0], c[1], color, 7.0);
    }
    plot.add_legend(languages[li], color);
  }
  plot.write(path);
}

void run_analyze(const AnalyzeOpts& o) {
  const ModelWeights model = load_model(o.model);
  const Tokenizer tok = make_tokenizer(model, o.vocab_file);
  const SteeringConfig cfg = load_steering_config(o.steering);
  const CategoryTable table = load_categories(o.categories);
  const SteeringContext ctx(cfg, table);

  const std::vector<std::string> languages =
      o.languages.empty() ? cfg.languages : o.languages;
  CorpusLoadResult loaded = load_parallel_corpus(o.corpus, languages);
  const ParallelCorpus corpus = o.max_samples > 0
                                    ? first_complete(loaded.corpus, o.max_samples)
                                    : loaded.corpus;
  if (corpus.samples.empty())
    throw DegenerateInputError("analyze: no usable corpus samples");

  const int embed_layer =
      o.embed_layer >= 0 ? o.embed_layer : model.config.n_layers - 2;
  const bool final_pos = o.embed_pos == "final";

  OutputStager st(resolve_out_dir(o.out_dir));
  auto name = [&](const std::string& suffix) { return o.run_id + "_" + suffix; };

  // Alignment: cosine to anchor before/after, averaged over the bridge layers.
  const AlignmentReport align =
      alignment_to_anchor(model, tok, corpus, ctx, cfg.bridge_layers, o.workers);
  {
    std::string csv = "lang,before,after,delta\n";
    for (const AlignmentRow& r : align.rows)
      csv += r.lang + "," + fmt9(r.before) + "," + fmt9(r.after) + "," +
             fmt9(r.delta) + "\n";
    write_text(st.stage(name("alignment.csv")), csv);
    write_alignment_svg(align, st.stage(name("alignment.svg")).string());
  }

  // Sentence embeddings for the map plots, baseline and steered.
  const int n_langs = static_cast<int>(languages.size());
  const int n_samples = static_cast<int>(corpus.samples.size());
  std::vector<SteerFn> hooks(static_cast<size_t>(n_langs));
  for (int li = 0; li < n_langs; ++li)
    hooks[static_cast<size_t>(li)] = ctx.hook_for(languages[static_cast<size_t>(li)]);

  std::vector<std::vector<float>> base(
      static_cast<size_t>(n_langs) * static_cast<size_t>(n_samples));
  std::vector<std::vector<float>> steered(base.size());
  parallel_for_index(n_samples, o.workers, [&](int si) {
    const ParallelSample& sample = corpus.samples[static_cast<size_t>(si)];
    for (int li = 0; li < n_langs; ++li) {
      const std::string& text = sample.texts.at(languages[static_cast<size_t>(li)]);
      const size_t idx =
          static_cast<size_t>(li) * static_cast<size_t>(n_samples) + si;
      base[idx] = embed_text(model, tok, text, embed_layer, SteerFn{}, final_pos);
      steered[idx] = hooks[static_cast<size_t>(li)]
                         ? embed_text(model, tok, text, embed_layer,
                                      hooks[static_cast<size_t>(li)], final_pos)
                         : base[idx];
    }
  });

  std::vector<std::pair<int, std::string>> labels;  // (lang index, sample id)
  labels.reserve(base.size());
  for (int li = 0; li < n_langs; ++li)
    for (int si = 0; si < n_samples; ++si)
      labels.emplace_back(li, corpus.samples[static_cast<size_t>(si)].id);

  TsneOptions topt;
  topt.perplexity = o.tsne_perplexity;
  topt.iterations = o.tsne_iters;
  topt.exaggeration_iters = std::min(250, o.tsne_iters / 2);
  topt.seed = o.tsne_seed;
  auto run_tsne = [&](const std::vector<std::vector<float>>& embs) {
    std::vector<std::vector<double>> pts;
    pts.reserve(embs.size());
    for (const auto& e : embs) pts.emplace_back(e.begin(), e.end());
    return tsne_2d(pts, topt);
  };
  const TsneResult t_base = run_tsne(base);
  const TsneResult t_steer = run_tsne(steered);

  auto tsne_csv = [&](const TsneResult& t) {
    std::string csv = "lang,id,x,y\n";
    for (size_t i = 0; i < t.coords.size(); ++i)
      csv += languages[static_cast<size_t>(labels[i].first)] + "," +
             labels[i].second + "," + fmt9(t.coords[i][0]) + "," +
             fmt9(t.coords[i][1]) + "\n";
    return csv;
  };
  write_text(st.stage(name("tsne_baseline.csv")), tsne_csv(t_base));
  write_text(st.stage(name("tsne_steered.csv")), tsne_csv(t_steer));
  write_tsne_svg(languages, labels, t_base.coords, "embedding map (baseline)",
                 st.stage(name("tsne_baseline.svg")).string());
  write_tsne_svg(languages, labels, t_steer.coords, "embedding map (steered)",
                 st.stage(name("tsne_steered.svg")).string());

  // Per-language centroids in map space, with distance to the anchor centroid.
  {
    auto centroids_of = [&](const TsneResult& t) {
      std::vector<std::array<double, 2>> cents(static_cast<size_t>(n_langs));
      for (int li = 0; li < n_langs; ++li) {
        std::vector<std::array<double, 2>> pts;
        for (size_t i = 0; i < t.coords.size(); ++i)
          if (labels[i].first == li) pts.push_back(t.coords[i]);
        cents[static_cast<size_t>(li)] = centroid2d(pts);
      }
      return cents;
    };
    int anchor_idx = 0;
    for (int li = 0; li < n_langs; ++li)
      if (languages[static_cast<size_t>(li)] == cfg.anchor) anchor_idx = li;
    std::string csv = "condition,lang,x,y,dist_to_anchor\n";
    const std::vector<std::vector<std::array<double, 2>>> both{
        centroids_of(t_base), centroids_of(t_steer)};
    const char* cond_name[2] = {"baseline", "steered"};
    for (int c = 0; c < 2; ++c) {
      const auto& cents = both[static_cast<size_t>(c)];
      const auto& a = cents[static_cast<size_t>(anchor_idx)];
      for (int li = 0; li < n_langs; ++li) {
        const auto& p = cents[static_cast<size_t>(li)];
        csv += std::string(cond_name[c]) + "," + languages[static_cast<size_t>(li)] +
               "," + fmt9(p[0]) + "," + fmt9(p[1]) + "," +
               fmt9(std::hypot(p[0] - a[0], p[1] - a[1])) + "\n";
      }
    }
    write_text(st.stage(name("centroids.csv")), csv);
  }

  // Alignment change vs metric change, when an eval report pair is supplied.
  if (!o.report.empty()) {
    const std::vector<EvalReport> reports = load_reports_json(o.report);
    const EvalReport* rb = nullptr;
    const EvalReport* rs = nullptr;
    for (const EvalReport& r : reports) {
      if (!r.steered && !rb) rb = &r;
      if (r.steered && !rs) rs = &r;
    }
    if (!rb || !rs)
      throw ValidationError(
          "analyze: --report must contain a baseline and a steered report");
    std::map<std::string, double> delta;
    for (const std::string& l : languages)
      if (l != cfg.anchor)
        delta[l] = primary_metric(*rs, l) - primary_metric(*rb, l);
    const GainScatter gain = alignment_vs_gain(align, delta);

    std::string csv = "lang,alignment_delta,metric_delta\n";
    for (const ScatterPoint& p : gain.points)
      csv += p.lang + "," + fmt9(p.x) + "," + fmt9(p.y) + "\n";
    write_text(st.stage(name("gain.csv")), csv);
    const json fit{{"slope", gain.fit.slope},
                   {"intercept", gain.fit.intercept},
                   {"r", gain.fit.r}};
    write_text(st.stage(name("gain_fit.json")), fit.dump(2) + "\n");

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    for (const ScatterPoint& p : gain.points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const double xpad = std::max(1e-6, (xmax - xmin) * 0.1);
    const double ypad = std::max(1e-6, (ymax - ymin) * 0.1);
    SvgPlot plot(560, 420, "alignment change vs metric change");
    plot.set_axes(xmin - xpad, xmax + xpad, ymin - ypad, ymax + ypad,
                  "cosine-to-anchor delta", "metric delta");
    plot.add_line(xmin, gain.fit.slope * xmin + gain.fit.intercept, xmax,
                  gain.fit.slope * xmax + gain.fit.intercept, "#555555", 1.2);
    for (size_t i = 0; i < gain.points.size(); ++i) {
      plot.add_point(gain.points[i].x, gain.points[i].y, SvgPlot::color(i), 4.0);
      plot.add_legend(gain.points[i].lang, SvgPlot::color(i));
    }
    plot.write(st.stage(name("gain.svg")).string());
  }

  json conf{{"model", basename_of(o.model)},
            {"corpus", basename_of(o.corpus)},
            {"steering", basename_of(o.steering)},
            {"categories", basename_of(o.categories)},
            {"languages", languages},
            {"max_samples", o.max_samples},
            {"embed_layer", embed_layer},
            {"embed_pos", o.embed_pos},
            {"tsne_perplexity", o.tsne_perplexity},
            {"tsne_iters", o.tsne_iters},
            {"tsne_seed", o.tsne_seed},
            {"run_id", o.run_id}};
  std::vector<std::string> inputs{o.model, o.corpus, o.steering, o.categories};
  if (!o.report.empty()) {
    conf["report"] = basename_of(o.report);
    inputs.push_back(o.report);
  }
  st.write_manifest("analyze", inputs, conf.dump(), o.run_id + ".manifest.json");
  st.commit();
  std::printf("tsne kl: baseline %.6f -> %.6f, steered %.6f -> %.6f\n",
              t_base.kl_initial, t_base.kl_final, t_steer.kl_initial,
              t_steer.kl_final);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-lingual activation steering laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read option defaults from an INI/TOML file");

  auto gt = std::make_shared<GenToyOpts>();
  CLI::App* c = app.add_subcommand("gen-toy", "generate a deterministic toy model");
  c->add_option("--seed", gt->seed, "RNG seed")->required();
  c->add_option("--layers", gt->layers, "decoder layers");
  c->add_option("--dim", gt->dim, "residual width");
  c->add_option("--ff", gt->ff, "MLP intermediate width");
  c->add_option("--heads", gt->heads, "attention heads");
  c->add_option("--vocab", gt->vocab, "vocab size (>= 257 for byte-level + eos)");
  c->add_option("--eos", gt->eos, "eos token id (default: vocab - 1)");
  c->add_option("--max-seq", gt->max_seq, "max sequence length");
  c->add_option("--out", gt->out, "output weight file (default <out-dir>/model.clw)");
  c->callback([gt] { run_gen_toy(*gt); });

  auto so = std::make_shared<StatsOpts>();
  c = app.add_subcommand("stats", "collect per-language mean MLP activations");
  c->add_option("--model", so->model, "weight file")->required();
  c->add_option("--corpus", so->corpus, "parallel corpus JSONL")->required();
  c->add_option("--languages", so->languages, "language codes")
      ->required()
      ->delimiter(',');
  c->add_option("--samples", so->samples, "first-k sample cap (0 = all)");
  c->add_option("--mode", so->mode, "abs (default) or signed")
      ->check(CLI::IsMember({"abs", "signed"}));
  c->add_option("--workers", so->workers, "sample-level worker threads");
  c->add_option("--vocab-file", so->vocab_file, "JSON vocab (default byte-level)");
  c->add_option("--out", so->out, "output stats file (default <out-dir>/stats.cls)");
  c->callback([so] { run_stats(*so); });

  auto co = std::make_shared<CategorizeOpts>();
  c = app.add_subcommand("categorize", "classify neurons by language activity");
  c->add_option("--stats", co->stats, "stats file")->required();
  c->add_option("--t-act", co->t_act, "activity threshold")->required();
  c->add_option("--out", co->out,
                "output category file (default <out-dir>/categories.json)");
  c->callback([co] { run_categorize(*co); });

  auto bo = std::make_shared<BridgeOpts>();
  c = app.add_subcommand("bridge", "select the bridge layer window");
  c->add_option("--categories", bo->categories, "category file")->required();
  c->add_option("--window", bo->window, "window length");
  c->add_option("--exclude-tail", bo->exclude_tail, "final layers to exclude");
  c->add_option("--min-layer", bo->min_layer,
                "earliest window start (default: n_layers / 2)");
  c->add_option("--out", bo->out, "output file (default <out-dir>/bridge.json)");
  c->callback([bo] { run_bridge(*bo); });

  auto eo = std::make_shared<EvalOpts>();
  c = app.add_subcommand("eval", "evaluate baseline and optionally steered runs");
  c->add_option("--model", eo->model, "weight file")->required();
  c->add_option("--task", eo->task, "classify (default) or span")
      ->check(CLI::IsMember({"classify", "span"}));
  c->add_option("--data", eo->data, "task JSONL")->required();
  c->add_option("--languages", eo->languages, "language codes")
      ->required()
      ->delimiter(',');
  c->add_option("--template", eo->tmpl, "prompt template");
  c->add_option("--labels", eo->labels, "label strings (classify)")->delimiter(',');
  c->add_option("--max-new", eo->max_new, "generation budget (span)");
  c->add_option("--steering", eo->steering, "steering config JSON, or 'off'");
  c->add_option("--categories", eo->categories, "category file (with --steering)");
  c->add_option("--skip", eo->skip, "skip the first N samples per language");
  c->add_option("--limit", eo->limit, "cap samples per language (0 = all)");
  c->add_option("--workers", eo->workers, "sample-level worker threads");
  c->add_option("--vocab-file", eo->vocab_file, "JSON vocab (default byte-level)");
  c->add_option("--out-dir", eo->out_dir, "artifact directory");
  c->callback([eo] { run_eval(*eo); });

  auto go = std::make_shared<GridOpts>();
  c = app.add_subcommand("grid", "sweep (alpha, beta, gamma) on a dev slice");
  c->add_option("--model", go->model, "weight file")->required();
  c->add_option("--task", go->task, "classify (default) or span")
      ->check(CLI::IsMember({"classify", "span"}));
  c->add_option("--data", go->data, "task JSONL")->required();
  c->add_option("--languages", go->languages, "language codes")
      ->required()
      ->delimiter(',');
  c->add_option("--anchor", go->anchor, "anchor language")->required();
  c->add_option("--categories", go->categories, "category file")->required();
  CLI::Option* ob = c->add_option("--bridge", go->bridge, "bridge layers")
                        ->delimiter(',');
  c->add_option("--bridge-file", go->bridge_file, "bridge.json from the bridge step")
      ->excludes(ob);
  c->add_option("--alphas", go->alphas, "blend grid")->delimiter(',');
  c->add_option("--betas", go->betas, "boost grid")->delimiter(',');
  c->add_option("--gammas", go->gammas, "suppression grid")->delimiter(',');
  c->add_option("--spec-scope", go->spec_scope, "union or per-language")
      ->check(CLI::IsMember({"union", "per-language"}));
  c->add_option("--dev", go->dev, "dev samples per language (0 = all)");
  c->add_option("--template", go->tmpl, "prompt template");
  c->add_option("--labels", go->labels, "label strings (classify)")->delimiter(',');
  c->add_option("--max-new", go->max_new, "generation budget (span)");
  c->add_option("--workers", go->workers, "sample-level worker threads");
  c->add_option("--vocab-file", go->vocab_file, "JSON vocab (default byte-level)");
  c->add_option("--out-dir", go->out_dir, "artifact directory");
  c->callback([go] { run_grid(*go); });

  auto ao = std::make_shared<AnalyzeOpts>();
  c = app.add_subcommand("analyze", "geometry: alignment, embedding maps, gains");
  c->add_option("--model", ao->model, "weight file")->required();
  c->add_option("--corpus", ao->corpus, "parallel corpus JSONL")->required();
  c->add_option("--steering", ao->steering, "steering config JSON")->required();
  c->add_option("--categories", ao->categories, "category file")->required();
  c->add_option("--report", ao->report, "eval report JSON (enables gain scatter)");
  c->add_option("--languages", ao->languages,
                "language codes (default: steering config set)")
      ->delimiter(',');
  c->add_option("--max-samples", ao->max_samples, "corpus sample cap (0 = all)");
  c->add_option("--embed-layer", ao->embed_layer,
                "embedding layer (default: penultimate)");
  c->add_option("--embed-pos", ao->embed_pos, "mean (default) or final")
      ->check(CLI::IsMember({"mean", "final"}));
  c->add_option("--tsne-iters", ao->tsne_iters, "t-SNE iterations");
  c->add_option("--tsne-perplexity", ao->tsne_perplexity, "t-SNE perplexity");
  c->add_option("--tsne-seed", ao->tsne_seed, "t-SNE init seed");
  c->add_option("--workers", ao->workers, "sample-level worker threads");
  c->add_option("--run-id", ao->run_id, "artifact name prefix");
  c->add_option("--vocab-file", ao->vocab_file, "JSON vocab (default byte-level)");
  c->add_option("--out-dir", ao->out_dir, "artifact directory");
  c->callback([ao] { run_analyze(*ao); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
