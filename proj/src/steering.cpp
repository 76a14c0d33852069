#include "xsteer/steering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace xsteer {

using nlohmann::json;

void SteeringConfig::validate() const {
  if (languages.empty()) throw ValidationError("steering config: no languages");
  std::set<std::string> uniq;
  for (const std::string& l : languages) {
    if (l.empty()) throw ValidationError("steering config: empty language code");
    if (!uniq.insert(l).second)
      throw ValidationError("steering config: duplicate language \"" + l + "\"");
  }
  if (!uniq.count(anchor))
    throw ValidationError("steering config: anchor \"" + anchor +
                          "\" not in the language set");
  if (!std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(alpha) ||
      !std::isfinite(t_act))
    throw ValidationError("steering config: coefficients must be finite");
  if (beta < 0.0f) throw ValidationError("steering config: beta must be >= 0");
  if (gamma < 0.0f || gamma > 1.0f)
    throw ValidationError("steering config: gamma must lie in [0,1]");
  if (t_act < 0.0f) throw ValidationError("steering config: t_act must be >= 0");
  if (spec_scope != "union" && spec_scope != "per-language")
    throw ValidationError("steering config: spec_scope must be \"union\" or "
                          "\"per-language\"");
  if (bridge_layers.empty())
    throw ValidationError("steering config: no bridge layers");
  std::set<int> seen;
  for (int b : bridge_layers) {
    if (b < 0) throw ValidationError("steering config: negative bridge layer");
    if (!seen.insert(b).second)
      throw ValidationError("steering config: duplicate bridge layer " +
                            std::to_string(b));
  }
}

void SteeringConfig::validate_layers(int n_layers) const {
  for (int b : bridge_layers)
    if (b >= n_layers - 2)
      throw ValidationError("steering config: bridge layer " + std::to_string(b) +
                            " is within the excluded final two layers of a " +
                            std::to_string(n_layers) + "-layer model");
}

namespace {

json config_to_json(const SteeringConfig& c) {
  return json{{"languages", c.languages},
              {"anchor", c.anchor},
              {"bridge_layers", c.bridge_layers},
              {"t_act", c.t_act},
              {"beta", c.beta},
              {"gamma", c.gamma},
              {"alpha", c.alpha},
              {"spec_scope", c.spec_scope}};
}

}  // namespace

SteeringConfig load_steering_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path + ": not valid JSON: " + e.what());
  }
  SteeringConfig c;
  try {
    c.languages = j.at("languages").get<std::vector<std::string>>();
    c.anchor = j.at("anchor").get<std::string>();
    c.bridge_layers = j.at("bridge_layers").get<std::vector<int>>();
    c.t_act = j.at("t_act").get<float>();
    c.beta = j.at("beta").get<float>();
    c.gamma = j.at("gamma").get<float>();
    c.alpha = j.at("alpha").get<float>();
    c.spec_scope = j.value("spec_scope", std::string("union"));
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  // The suppression factor 1 - gamma must stay non-negative.
  c.gamma = std::clamp(c.gamma, 0.0f, 1.0f);
  c.validate();
  return c;
}

void save_steering_config(const SteeringConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << config_to_json(config).dump(2) << "\n";
  if (!out) throw ValidationError("short write to " + path);
}

std::string steering_config_digest(const SteeringConfig& config) {
  return fnv1a64_hex(config_to_json(config).dump());
}

SteeringMasks build_masks(const CategoryTable& table, const SteeringConfig& config,
                          const std::optional<std::string>& per_language) {
  config.validate();
  config.validate_layers(table.n_layers);

  const std::set<std::string> table_langs(table.languages.begin(),
                                          table.languages.end());
  const std::set<std::string> config_langs(config.languages.begin(),
                                           config.languages.end());
  if (table_langs != config_langs)
    throw ValidationError("build_masks: category table was computed for a "
                          "different language set than the steering config");
  if (table.t_act != config.t_act)
    throw ValidationError("build_masks: category table used t_act " +
                          std::to_string(table.t_act) + ", config expects " +
                          std::to_string(config.t_act));

  const int n_langs = static_cast<int>(table.languages.size());
  int anchor_idx = -1;
  int target_idx = -1;
  for (int i = 0; i < n_langs; ++i) {
    if (table.languages[static_cast<size_t>(i)] == config.anchor) anchor_idx = i;
    if (per_language && table.languages[static_cast<size_t>(i)] == *per_language)
      target_idx = i;
  }
  if (per_language && target_idx < 0)
    throw ValidationError("build_masks: unknown language \"" + *per_language + "\"");

  SteeringMasks masks;
  masks.d_ff = table.d_ff;
  for (int layer : config.bridge_layers) {
    LayerMasks lm;
    lm.m_shared.assign(static_cast<size_t>(table.d_ff), 0);
    lm.m_spec.assign(static_cast<size_t>(table.d_ff), 0);
    for (int n = 0; n < table.d_ff; ++n) {
      const NeuronCategory& cat = table.at(layer, n);
      if (cat.kind == CategoryKind::PartialShared) {
        lm.m_shared[static_cast<size_t>(n)] = 1;
      } else if (cat.kind == CategoryKind::LanguageSpecific &&
                 cat.lang != anchor_idx) {
        const bool suppress =
            per_language ? (cat.lang == target_idx) : true;
        if (suppress) lm.m_spec[static_cast<size_t>(n)] = 1;
      }
    }
    masks.layers.emplace(layer, std::move(lm));
  }
  return masks;
}

namespace {

void check_widths(size_t h, const LayerMasks& m) {
  if (m.m_shared.size() != m.m_spec.size())
    throw ShapeError("steer: mask widths disagree (" +
                     std::to_string(m.m_shared.size()) + " vs " +
                     std::to_string(m.m_spec.size()) + ")");
  if (h != m.m_shared.size())
    throw ShapeError("steer: h has width " + std::to_string(h) + ", masks " +
                     std::to_string(m.m_shared.size()));
}

}  // namespace

void steer_inplace(std::span<float> h, const LayerMasks& m, float beta,
                   float gamma, float alpha) {
  check_widths(h.size(), m);
  if (alpha == 0.0f) return;                  // blend keeps the original
  if (beta == 0.0f && gamma == 0.0f) return;  // both stages are identity

  const float one_minus_alpha = 1.0f - alpha;
  const float f_shared = one_minus_alpha + alpha * (1.0f + beta);
  const float f_spec = one_minus_alpha + alpha * (1.0f - gamma);
  // Masks are disjoint by construction; the combined branch only fires on
  // hand-built inputs and keeps the formula honest there too.
  const float f_both = one_minus_alpha + alpha * ((1.0f + beta) * (1.0f - gamma));

  const size_t n = h.size();
  for (size_t i = 0; i < n; ++i) {
    const bool sh = m.m_shared[i] != 0;
    const bool sp = m.m_spec[i] != 0;
    if (sh && sp)
      h[i] *= f_both;
    else if (sh)
      h[i] *= f_shared;
    else if (sp)
      h[i] *= f_spec;
    // neurons outside both masks are untouched, bit for bit
  }
}

std::vector<float> steer(std::span<const float> h, const LayerMasks& m,
                         float beta, float gamma, float alpha) {
  std::vector<float> out(h.begin(), h.end());
  steer_inplace(out, m, beta, gamma, alpha);
  return out;
}

std::vector<float> steer_staged(std::span<const float> h, const LayerMasks& m,
                                float beta, float gamma, float alpha) {
  check_widths(h.size(), m);
  std::vector<float> out(h.begin(), h.end());
  if (alpha == 0.0f) return out;
  if (beta == 0.0f && gamma == 0.0f) return out;

  const size_t n = h.size();
  for (size_t i = 0; i < n; ++i) {
    const float msh = m.m_shared[i] ? 1.0f : 0.0f;
    const float msp = m.m_spec[i] ? 1.0f : 0.0f;
    if (msh == 0.0f && msp == 0.0f) continue;
    const float boost = 1.0f + beta * msh;     // h1 = h ⊙ boost
    const float suppress = 1.0f - gamma * msp;  // h2 = h1 ⊙ suppress
    const float f2 = boost * suppress;
    const float f = (1.0f - alpha) + alpha * f2;  // blend of original and h2
    out[i] = h[i] * f;
  }
  return out;
}

SteerFn make_steering_hook(const SteeringConfig& config, const SteeringMasks& masks,
                           const std::string& input_lang) {
  config.validate();
  if (std::find(config.languages.begin(), config.languages.end(), input_lang) ==
      config.languages.end())
    throw ValidationError("steering hook: language \"" + input_lang +
                          "\" not in the configured set");
  // Anchor bypass: the reference language is never modified.
  if (input_lang == config.anchor) return SteerFn{};

  const float beta = config.beta;
  const float gamma = config.gamma;
  const float alpha = config.alpha;
  return [beta, gamma, alpha, masks](int layer, int, std::span<float> h) {
    const auto it = masks.layers.find(layer);
    if (it == masks.layers.end()) return;  // not a bridge layer
    steer_inplace(h, it->second, beta, gamma, alpha);
  };
}

}  // namespace xsteer
