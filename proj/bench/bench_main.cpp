// Benchmarks the sample-parallel kernels against their serial reference path.
//
// Every parallel loop in this codebase goes through parallel_for_index, whose
// workers <= 1 branch is a plain serial loop kept as the reference
// implementation. This target times both paths on the same inputs and checks
// that the outputs are bit-identical, which the deterministic slot-merge is
// supposed to guarantee for any worker count. Exit status is nonzero if any
// equality check fails, so the bench doubles as a regression gate.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xsteer/corpus.hpp"
#include "xsteer/eval.hpp"
#include "xsteer/model.hpp"
#include "xsteer/parallel.hpp"
#include "xsteer/stats.hpp"
#include "xsteer/tokenizer.hpp"

using namespace xsteer;

namespace {

std::string random_text(std::mt19937_64& rng, int min_words, int max_words) {
  std::uniform_int_distribution<int> n_words(min_words, max_words);
  std::uniform_int_distribution<int> word_len(2, 9);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string out;
  const int n = n_words(rng);
  for (int w = 0; w < n; ++w) {
    if (w) out += ' ';
    const int len = word_len(rng);
    for (int i = 0; i < len; ++i) out += static_cast<char>(letter(rng));
  }
  return out;
}

template <typename Fn>
double best_seconds(int reps, Fn&& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

bool reports_equal(const EvalReport& a, const EvalReport& b) {
  if (a.per_language.size() != b.per_language.size()) return false;
  for (size_t i = 0; i < a.per_language.size(); ++i) {
    const LanguageMetrics& x = a.per_language[i];
    const LanguageMetrics& y = b.per_language[i];
    if (x.lang != y.lang || x.n != y.n) return false;
    // Exact comparison on purpose: identical arithmetic must give identical bits.
    if (std::memcmp(&x.accuracy, &y.accuracy, sizeof x.accuracy) != 0) return false;
    if (std::memcmp(&x.macro_f1, &y.macro_f1, sizeof x.macro_f1) != 0) return false;
    if (std::memcmp(&x.token_f1, &y.token_f1, sizeof x.token_f1) != 0) return false;
  }
  return true;
}

struct Row {
  const char* kernel;
  double serial_s;
  double parallel_s;
  bool identical;
};

void print_row(const Row& r, int workers) {
  std::printf("%-16s %10.3fs %10.3fs %8.2fx %8d   %s\n", r.kernel, r.serial_s,
              r.parallel_s, r.serial_s / r.parallel_s, workers,
              r.identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial-vs-parallel kernel benchmark"};
  int samples = 48;
  int span_samples = 8;
  int reps = 3;
  int workers = 0;  // 0 = full hardware team
  std::uint64_t seed = 99;
  app.add_option("--samples", samples, "parallel-corpus samples per language");
  app.add_option("--span-samples", span_samples,
                 "span-eval samples per language (decode is the slow path)");
  app.add_option("--reps", reps, "timed repetitions; best-of is reported");
  app.add_option("--workers", workers, "parallel worker count (0 = hardware)");
  app.add_option("--seed", seed, "rng seed for weights and synthetic text");
  CLI11_PARSE(app, argc, argv);

  if (workers <= 0) workers = hardware_workers();
  if (workers < 2)
    std::printf("note: only one hardware thread; speedups will be ~1.0\n");

  ModelConfig cfg;
  cfg.n_layers = 8;
  cfg.d_model = 64;
  cfg.d_ff = 128;
  cfg.n_heads = 4;
  cfg.vocab_size = 257;
  cfg.max_seq_len = 512;
  cfg.eos_token = 256;
  const ModelWeights model = gen_toy_model(cfg, seed);
  const Tokenizer tok = Tokenizer::byte_level(cfg.vocab_size, cfg.eos_token);
  const std::vector<std::string> langs = {"en", "de", "fr"};

  std::mt19937_64 rng(seed);
  ParallelCorpus corpus;
  corpus.languages = langs;
  for (int i = 0; i < samples; ++i) {
    ParallelSample s;
    s.id = "s" + std::to_string(i);
    for (const std::string& lang : langs)
      s.texts[lang] = lang + " " + random_text(rng, 20, 40);
    corpus.samples.push_back(std::move(s));
  }

  std::vector<ClassifySample> cls;
  for (int i = 0; i < samples; ++i)
    for (const std::string& lang : langs)
      cls.push_back({"c" + std::to_string(i), lang, random_text(rng, 12, 24),
                     random_text(rng, 6, 12), i % 3});

  std::vector<SpanSample> spans;
  for (int i = 0; i < span_samples; ++i)
    for (const std::string& lang : langs) {
      std::string ctx = random_text(rng, 12, 24);
      spans.push_back({"q" + std::to_string(i), lang, ctx,
                       random_text(rng, 4, 8), ctx.substr(0, ctx.find(' '))});
    }

  const LabelSet labels = LabelSet::from_labels({"0", "1", "2"}, tok);
  const std::string cls_tmpl = "P:{premise} H:{hypothesis} A:";
  const std::string span_tmpl = "C:{context} Q:{question} A:";

  std::printf("model: %d layers, d_model %d, d_ff %d | corpus: %d x %zu langs, "
              "%zu classify, %zu span | best of %d reps\n\n",
              cfg.n_layers, cfg.d_model, cfg.d_ff, samples, langs.size(),
              cls.size(), spans.size(), reps);
  std::printf("%-16s %11s %11s %9s %8s   %s\n", "kernel", "serial", "parallel",
              "speedup", "workers", "identical");

  bool all_ok = true;

  {
    ActivationStats ref, par;
    const double ts = best_seconds(
        reps, [&] { ref = collect_stats(model, tok, corpus, "abs", 1, "bench"); });
    const double tp = best_seconds(reps, [&] {
      par = collect_stats(model, tok, corpus, "abs", workers, "bench");
    });
    const bool same =
        ref.mean_act.size() == par.mean_act.size() &&
        std::memcmp(ref.mean_act.data(), par.mean_act.data(),
                    ref.mean_act.size() * sizeof(float)) == 0 &&
        ref.sample_ids == par.sample_ids &&
        ref.position_counts == par.position_counts;
    all_ok = all_ok && same;
    print_row({"collect_stats", ts, tp, same}, workers);
  }

  {
    EvalReport ref, par;
    const double ts = best_seconds(reps, [&] {
      ref = eval_classify(model, tok, cls, labels, cls_tmpl, langs, nullptr, 1);
    });
    const double tp = best_seconds(reps, [&] {
      par = eval_classify(model, tok, cls, labels, cls_tmpl, langs, nullptr,
                          workers);
    });
    const bool same = reports_equal(ref, par);
    all_ok = all_ok && same;
    print_row({"eval_classify", ts, tp, same}, workers);
  }

  {
    EvalReport ref, par;
    const double ts = best_seconds(reps, [&] {
      ref = eval_span(model, tok, spans, span_tmpl, langs, nullptr, 16, 1);
    });
    const double tp = best_seconds(reps, [&] {
      par = eval_span(model, tok, spans, span_tmpl, langs, nullptr, 16, workers);
    });
    const bool same = reports_equal(ref, par);
    all_ok = all_ok && same;
    print_row({"eval_span", ts, tp, same}, workers);
  }

  if (!all_ok) {
    std::printf("\nFAIL: parallel output diverged from the serial reference\n");
    return 1;
  }
  std::printf("\nall outputs bit-identical across worker counts\n");
  return 0;
}
