#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace xsteer {

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;  // seeds the principal-component start vectors
};

struct TsneResult {
  std::vector<std::array<double, 2>> coords;
  // All three KL(P||Q) values use the true (unexaggerated) P.
  double kl_initial = 0.0;
  double kl_post_exaggeration = 0.0;
  double kl_final = 0.0;
};

// Exact O(N^2) t-SNE in double precision: per-point Gaussian bandwidths
// solved by bisection to hit the target perplexity, symmetrized P summing to
// one, Student-t Q, gradient descent with momentum, adaptive gains and early
// exaggeration, initialized from the top two principal components (power
// iteration seeded from `seed`). Deterministic. Limits: N <= 2000 and
// perplexity < N/3, else ValidationError.
TsneResult tsne_2d(const std::vector<std::vector<double>>& points,
                   const TsneOptions& opts = {});

// The P-matrix construction alone, exposed for verification: returns the
// symmetrized N*N matrix (row-major) and each point's achieved perplexity
// before symmetrization.
void compute_gaussian_p(const std::vector<std::vector<double>>& points,
                        double perplexity, std::vector<double>& p_out,
                        std::vector<double>& achieved_perplexity);

}  // namespace xsteer
