#pragma once

#include <map>
#include <string>
#include <vector>

#include "xsteer/common.hpp"

namespace xsteer {

// One aligned multilingual sample: the same content keyed by language code.
struct ParallelSample {
  std::string id;
  std::map<std::string, std::string> texts;  // lang -> text
};

// A sample excluded from the corpus because some requested languages were
// missing or empty; kept so callers can report instead of silently dropping.
struct RejectedSample {
  std::string id;
  int line = 0;  // 1-based line in the source file
  std::vector<std::string> missing;
};

struct ParallelCorpus {
  std::vector<std::string> languages;
  std::vector<ParallelSample> samples;  // complete over languages, file order
};

struct CorpusLoadResult {
  ParallelCorpus corpus;
  std::vector<RejectedSample> rejected;
};

struct ClassifySample {
  std::string id, lang, premise, hypothesis;
  int label = -1;  // 0, 1 or 2
};

struct SpanSample {
  std::string id, lang, context, question, answer;
};

// JSONL, one object per line: {"id": ..., "texts": {lang: text, ...}}.
// Samples missing any requested language (or carrying an empty text for one)
// land in the rejection list; texts for unrequested languages are dropped so
// every kept sample covers exactly `languages`. Malformed lines raise
// ParseError with the line number; duplicate ids raise ValidationError.
CorpusLoadResult load_parallel_corpus(const std::string& path,
                                      const std::vector<std::string>& languages);

void save_parallel_corpus(const ParallelCorpus& corpus, const std::string& path);
void save_rejections(const std::vector<RejectedSample>& rejected,
                     const std::string& path);

// JSONL, one object per (sample, language):
//   {"id","lang","premise","hypothesis","label"} with label in {0,1,2}
//   {"id","lang","context","question","answer"}
std::vector<ClassifySample> load_classify_samples(const std::string& path);
std::vector<SpanSample> load_span_samples(const std::string& path);

// First k samples in file order (the statistics subset); k >= corpus size
// returns everything.
ParallelCorpus first_complete(const ParallelCorpus& corpus, int k);

// Replaces {name} placeholders from the field map. Unknown or unterminated
// placeholders raise TemplateError. No escape syntax; templates are
// configuration, not user content.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& fields);
std::string build_prompt(const ClassifySample& s, const std::string& tmpl);
std::string build_prompt(const SpanSample& s, const std::string& tmpl);

// Digest of a file's raw bytes (FNV-1a 64, hex); recorded in provenance
// blocks so downstream stages can refuse mismatched inputs.
std::string file_digest_hex(const std::string& path);

}  // namespace xsteer
