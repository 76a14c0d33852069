#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xsteer/categories.hpp"
#include "xsteer/model.hpp"

namespace xsteer {

// The full steering configuration: language set, anchor, bridge layers,
// activity threshold and the three coefficients.
struct SteeringConfig {
  std::vector<std::string> languages;
  std::string anchor;
  std::vector<int> bridge_layers;
  float t_act = 0.0f;
  float beta = 0.0f;   // shared-neuron boost, >= 0
  float gamma = 0.0f;  // specific-neuron suppression, in [0,1]
  float alpha = 0.0f;  // blend coefficient, may be negative
  std::string spec_scope = "union";  // "union" | "per-language"

  void validate() const;
  // Bridge layers must exist and must avoid the final two layers.
  void validate_layers(int n_layers) const;
};

SteeringConfig load_steering_config(const std::string& path);
void save_steering_config(const SteeringConfig& config, const std::string& path);
// Digest of the canonical JSON serialization; stamped into reports.
std::string steering_config_digest(const SteeringConfig& config);

// Binary masks over one layer's d_ff neurons. Disjoint by construction:
// categories are mutually exclusive.
struct LayerMasks {
  std::vector<std::uint8_t> m_shared;  // 1 on partial-shared neurons
  std::vector<std::uint8_t> m_spec;    // 1 on suppressed language-specific neurons
};

struct SteeringMasks {
  int d_ff = 0;
  std::map<int, LayerMasks> layers;  // bridge layer -> masks
};

// Derives masks from a category table. m_shared marks partial-shared
// neurons. m_spec marks language-specific neurons: all non-anchor languages
// under union scope, or exactly `per_language` under per-language scope.
// Anchor-specific neurons are never suppressed. Refuses tables whose
// provenance (language set, t_act) disagrees with the config.
SteeringMasks build_masks(const CategoryTable& table, const SteeringConfig& config,
                          const std::optional<std::string>& per_language = std::nullopt);

// Rescale-suppress-blend, closed form: h[n] *= f with
//   f = (1-alpha) + alpha * (1 + beta*m_shared[n]) * (1 - gamma*m_spec[n]).
// Structured so the algebraic identities hold exactly in float arithmetic:
// alpha == 0, beta == gamma == 0, or a neuron outside both masks leaves h
// bit-identical (no multiply by a rounded 1.0 ever happens).
void steer_inplace(std::span<float> h, const LayerMasks& m, float beta,
                   float gamma, float alpha);
std::vector<float> steer(std::span<const float> h, const LayerMasks& m,
                         float beta, float gamma, float alpha);

// Reference path kept for testing: materializes the two stage factors
// (boost, suppress) per neuron and blends them, mirroring h -> h1 -> h2 ->
// blend over the multiplicative structure. Must agree with steer() to the
// last bit; the factored form is what makes that achievable, since scaling
// h through the stages and re-blending against the original h would round
// differently than any single-factor application.
std::vector<float> steer_staged(std::span<const float> h, const LayerMasks& m,
                                float beta, float gamma, float alpha);

// Hook for forward/greedy_decode. Anchor-language inputs get an empty hook
// (the bypass: no modification at all); other languages get steer_inplace at
// every position of every bridge layer and identity elsewhere. Throws
// ValidationError for a language outside the config.
SteerFn make_steering_hook(const SteeringConfig& config, const SteeringMasks& masks,
                           const std::string& input_lang);

}  // namespace xsteer
