#include "xsteer/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace xsteer {

using nlohmann::json;

namespace {

void check_language_code(const std::string& code) {
  if (code.empty()) throw ValidationError("empty language code");
  for (char c : code)
    if (c >= 'A' && c <= 'Z')
      throw ValidationError("language code \"" + code + "\" must be lowercase");
}

// Calls fn(line_number, parsed_json) for every non-empty line.
template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(path + ": " + e.what(), lineno);
    }
    fn(lineno, j);
  }
}

std::string get_string(const json& j, const char* key, int lineno) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ParseError("missing or non-string field \"" + std::string(key) + "\"",
                     lineno);
  return j.at(key).get<std::string>();
}

}  // namespace

CorpusLoadResult load_parallel_corpus(const std::string& path,
                                      const std::vector<std::string>& languages) {
  if (languages.empty())
    throw ValidationError("load_parallel_corpus: no languages requested");
  for (const std::string& l : languages) check_language_code(l);
  {
    std::set<std::string> uniq(languages.begin(), languages.end());
    if (uniq.size() != languages.size())
      throw ValidationError("load_parallel_corpus: duplicate language in request");
  }

  CorpusLoadResult res;
  res.corpus.languages = languages;
  std::set<std::string> seen_ids;

  for_each_jsonl(path, [&](int lineno, const json& j) {
    const std::string id = get_string(j, "id", lineno);
    if (!j.contains("texts") || !j.at("texts").is_object())
      throw ParseError("missing or non-object field \"texts\"", lineno);
    if (!seen_ids.insert(id).second)
      throw ValidationError(path + ": duplicate sample id \"" + id + "\" at line " +
                            std::to_string(lineno));

    const json& texts = j.at("texts");
    ParallelSample sample;
    sample.id = id;
    std::vector<std::string> missing;
    for (const std::string& lang : languages) {
      if (!texts.contains(lang) || !texts.at(lang).is_string() ||
          texts.at(lang).get<std::string>().empty()) {
        missing.push_back(lang);
        continue;
      }
      sample.texts[lang] = texts.at(lang).get<std::string>();
    }
    if (missing.empty())
      res.corpus.samples.push_back(std::move(sample));
    else
      res.rejected.push_back({id, lineno, std::move(missing)});
  });
  return res;
}

void save_parallel_corpus(const ParallelCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (const ParallelSample& s : corpus.samples) {
    json texts = json::object();
    for (const auto& [lang, text] : s.texts) texts[lang] = text;
    out << json{{"id", s.id}, {"texts", texts}}.dump() << "\n";
  }
  if (!out) throw ValidationError("short write to " + path);
}

void save_rejections(const std::vector<RejectedSample>& rejected,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  for (const RejectedSample& r : rejected)
    out << json{{"id", r.id}, {"line", r.line}, {"missing", r.missing}}.dump()
        << "\n";
  if (!out) throw ValidationError("short write to " + path);
}

std::vector<ClassifySample> load_classify_samples(const std::string& path) {
  std::vector<ClassifySample> out;
  for_each_jsonl(path, [&](int lineno, const json& j) {
    ClassifySample s;
    s.id = get_string(j, "id", lineno);
    s.lang = get_string(j, "lang", lineno);
    check_language_code(s.lang);
    s.premise = get_string(j, "premise", lineno);
    s.hypothesis = get_string(j, "hypothesis", lineno);
    if (!j.contains("label") || !j.at("label").is_number_integer())
      throw ParseError("missing or non-integer field \"label\"", lineno);
    s.label = j.at("label").get<int>();
    if (s.label < 0 || s.label > 2)
      throw ValidationError(path + ": label " + std::to_string(s.label) +
                            " outside {0,1,2} at line " + std::to_string(lineno));
    if (s.premise.empty() || s.hypothesis.empty())
      throw ValidationError(path + ": empty premise/hypothesis at line " +
                            std::to_string(lineno));
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<SpanSample> load_span_samples(const std::string& path) {
  std::vector<SpanSample> out;
  for_each_jsonl(path, [&](int lineno, const json& j) {
    SpanSample s;
    s.id = get_string(j, "id", lineno);
    s.lang = get_string(j, "lang", lineno);
    check_language_code(s.lang);
    s.context = get_string(j, "context", lineno);
    s.question = get_string(j, "question", lineno);
    s.answer = get_string(j, "answer", lineno);
    if (s.context.empty() || s.question.empty() || s.answer.empty())
      throw ValidationError(path + ": empty context/question/answer at line " +
                            std::to_string(lineno));
    out.push_back(std::move(s));
  });
  return out;
}

ParallelCorpus first_complete(const ParallelCorpus& corpus, int k) {
  if (k < 0) throw ValidationError("first_complete: negative subset size");
  ParallelCorpus out;
  out.languages = corpus.languages;
  const size_t n = std::min(static_cast<size_t>(k), corpus.samples.size());
  out.samples.assign(corpus.samples.begin(),
                     corpus.samples.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& fields) {
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    const size_t close = tmpl.find('}', i + 1);
    if (close == std::string::npos)
      throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
    const std::string key = tmpl.substr(i + 1, close - i - 1);
    const auto it = fields.find(key);
    if (it == fields.end())
      throw TemplateError("unknown placeholder {" + key + "}");
    out += it->second;
    i = close + 1;
  }
  return out;
}

std::string build_prompt(const ClassifySample& s, const std::string& tmpl) {
  return render_template(tmpl, {{"id", s.id},
                                {"lang", s.lang},
                                {"premise", s.premise},
                                {"hypothesis", s.hypothesis}});
}

std::string build_prompt(const SpanSample& s, const std::string& tmpl) {
  return render_template(tmpl, {{"id", s.id},
                                {"lang", s.lang},
                                {"context", s.context},
                                {"question", s.question}});
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

}  // namespace xsteer
