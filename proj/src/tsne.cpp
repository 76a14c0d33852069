#include "xsteer/tsne.hpp"

#include <cmath>
#include <string>

#include "xsteer/common.hpp"
#include "xsteer/rng.hpp"

namespace xsteer {

namespace {

std::vector<double> pairwise_sq(const std::vector<std::vector<double>>& x) {
  const size_t n = x.size();
  std::vector<double> d(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < x[i].size(); ++k) {
        const double diff = x[i][k] - x[j][k];
        s += diff * diff;
      }
      d[i * n + j] = s;
      d[j * n + i] = s;
    }
  }
  return d;
}

void validate_input(const std::vector<std::vector<double>>& points,
                    double perplexity) {
  const size_t n = points.size();
  if (n < 4) throw ValidationError("t-sne: need at least 4 points");
  if (n > 2000)
    throw ValidationError("t-sne: exact O(N^2) variant is capped at N = 2000");
  if (!(perplexity > 0.0))
    throw ValidationError("t-sne: perplexity must be positive");
  if (perplexity >= static_cast<double>(n) / 3.0)
    throw ValidationError("t-sne: perplexity " + std::to_string(perplexity) +
                          " infeasible for N = " + std::to_string(n) +
                          " (requires perplexity < N/3)");
  const size_t dim = points.front().size();
  if (dim == 0) throw ValidationError("t-sne: zero-dimensional points");
  for (const std::vector<double>& p : points)
    if (p.size() != dim) throw ShapeError("t-sne: ragged input");
}

}  // namespace

void compute_gaussian_p(const std::vector<std::vector<double>>& points,
                        double perplexity, std::vector<double>& p_out,
                        std::vector<double>& achieved_perplexity) {
  validate_input(points, perplexity);
  const size_t n = points.size();
  const std::vector<double> d = pairwise_sq(points);
  const double target_h = std::log(perplexity);

  // Conditional distributions p_{j|i}, one bandwidth per row found by
  // bisection on beta = 1/(2 sigma^2).
  std::vector<double> cond(n * n, 0.0);
  achieved_perplexity.assign(n, 0.0);
  std::vector<double> row(n);

  for (size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_min = -1.0, beta_max = -1.0;  // <0 means unbounded
    double h = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0, dsum = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        row[j] = std::exp(-beta * d[i * n + j]);
        sum += row[j];
        dsum += d[i * n + j] * row[j];
      }
      h = std::log(sum) + beta * dsum / sum;
      const double diff = h - target_h;
      if (std::fabs(diff) < 1e-10) break;
      if (diff > 0.0) {
        beta_min = beta;
        beta = beta_max < 0.0 ? beta * 2.0 : (beta + beta_max) / 2.0;
      } else {
        beta_max = beta;
        beta = beta_min < 0.0 ? beta / 2.0 : (beta + beta_min) / 2.0;
      }
    }
    double sum = 0.0;
    for (size_t j = 0; j < n; ++j) sum += row[j];
    for (size_t j = 0; j < n; ++j) cond[i * n + j] = row[j] / sum;
    achieved_perplexity[i] = std::exp(h);
  }

  p_out.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      p_out[i * n + j] =
          (cond[i * n + j] + cond[j * n + i]) / (2.0 * static_cast<double>(n));
}

namespace {

// KL(P||Q) for the current layout; Q gets the usual tiny clamp so empty
// cells cannot produce log(0).
double kl_divergence(const std::vector<double>& p,
                     const std::vector<std::array<double, 2>>& y) {
  const size_t n = y.size();
  double sum_num = 0.0;
  std::vector<double> num(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double dx = y[i][0] - y[j][0];
      const double dy = y[i][1] - y[j][1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = v;
      num[j * n + i] = v;
      sum_num += 2.0 * v;
    }
  }
  double kl = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j || p[i * n + j] <= 0.0) continue;
      const double q = std::max(num[i * n + j] / sum_num, 1e-12);
      kl += p[i * n + j] * std::log(p[i * n + j] / q);
    }
  }
  return kl;
}

// Top-2 principal components by power iteration with deflation; start
// vectors come from the seeded generator, iteration count is fixed, so the
// result is a pure function of (points, seed).
std::vector<std::array<double, 2>> pca_init(
    const std::vector<std::vector<double>>& points, std::uint64_t seed) {
  const size_t n = points.size();
  const size_t dim = points.front().size();

  std::vector<double> mean(dim, 0.0);
  for (const std::vector<double>& p : points)
    for (size_t k = 0; k < dim; ++k) mean[k] += p[k];
  for (double& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(dim * dim, 0.0);
  for (const std::vector<double>& p : points)
    for (size_t a = 0; a < dim; ++a)
      for (size_t b = 0; b < dim; ++b)
        cov[a * dim + b] += (p[a] - mean[a]) * (p[b] - mean[b]);

  GaussianRng rng(seed);
  auto power_vector = [&](const std::vector<double>& m) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (int it = 0; it < 200; ++it) {
      std::vector<double> w(dim, 0.0);
      for (size_t a = 0; a < dim; ++a)
        for (size_t b = 0; b < dim; ++b) w[a] += m[a * dim + b] * v[b];
      double norm = 0.0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;  // degenerate data; keep whatever we have
      for (size_t a = 0; a < dim; ++a) v[a] = w[a] / norm;
    }
    return v;
  };

  const std::vector<double> v1 = power_vector(cov);
  double lambda1 = 0.0;
  {
    std::vector<double> w(dim, 0.0);
    for (size_t a = 0; a < dim; ++a)
      for (size_t b = 0; b < dim; ++b) w[a] += cov[a * dim + b] * v1[b];
    for (size_t a = 0; a < dim; ++a) lambda1 += v1[a] * w[a];
  }
  std::vector<double> deflated = cov;
  for (size_t a = 0; a < dim; ++a)
    for (size_t b = 0; b < dim; ++b) deflated[a * dim + b] -= lambda1 * v1[a] * v1[b];
  const std::vector<double> v2 = power_vector(deflated);

  std::vector<std::array<double, 2>> y(n, {0.0, 0.0});
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < dim; ++k) {
      const double c = points[i][k] - mean[k];
      y[i][0] += c * v1[k];
      y[i][1] += c * v2[k];
    }
  }

  // Rescale so the first coordinate has the conventional tiny spread.
  double m0 = 0.0;
  for (const std::array<double, 2>& p : y) m0 += p[0];
  m0 /= static_cast<double>(n);
  double var0 = 0.0;
  for (const std::array<double, 2>& p : y) var0 += (p[0] - m0) * (p[0] - m0);
  var0 /= static_cast<double>(n);
  if (var0 > 0.0) {
    const double scale = 1e-4 / std::sqrt(var0);
    for (std::array<double, 2>& p : y) {
      p[0] *= scale;
      p[1] *= scale;
    }
  } else {
    for (std::array<double, 2>& p : y) {
      p[0] = rng.normal() * 1e-4;
      p[1] = rng.normal() * 1e-4;
    }
  }
  return y;
}

}  // namespace

TsneResult tsne_2d(const std::vector<std::vector<double>>& points,
                   const TsneOptions& opts) {
  validate_input(points, opts.perplexity);
  if (opts.iterations < 1) throw ValidationError("t-sne: iterations must be >= 1");
  const size_t n = points.size();

  std::vector<double> p;
  std::vector<double> achieved;
  compute_gaussian_p(points, opts.perplexity, p, achieved);

  TsneResult res;
  res.coords = pca_init(points, opts.seed);
  res.kl_initial = kl_divergence(p, res.coords);

  std::vector<std::array<double, 2>> inc(n, {0.0, 0.0});
  std::vector<std::array<double, 2>> gain(n, {1.0, 1.0});
  std::vector<double> num(n * n, 0.0);
  bool recorded_post_exaggeration = false;

  for (int t = 0; t < opts.iterations; ++t) {
    const bool exaggerating = t < opts.exaggeration_iters;
    const double exag = exaggerating ? opts.early_exaggeration : 1.0;
    const double momentum = exaggerating ? 0.5 : 0.8;

    double sum_num = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        const double dx = res.coords[i][0] - res.coords[j][0];
        const double dy = res.coords[i][1] - res.coords[j][1];
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = v;
        num[j * n + i] = v;
        sum_num += 2.0 * v;
      }
    }

    for (size_t i = 0; i < n; ++i) {
      std::array<double, 2> grad{0.0, 0.0};
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = num[i * n + j] / sum_num;
        const double mult = (exag * p[i * n + j] - q) * num[i * n + j];
        grad[0] += 4.0 * mult * (res.coords[i][0] - res.coords[j][0]);
        grad[1] += 4.0 * mult * (res.coords[i][1] - res.coords[j][1]);
      }
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad[k] > 0.0) == (inc[i][k] > 0.0);
        gain[i][k] = same_sign ? gain[i][k] * 0.8 : gain[i][k] + 0.2;
        if (gain[i][k] < 0.01) gain[i][k] = 0.01;
        inc[i][k] = momentum * inc[i][k] - opts.learning_rate * gain[i][k] * grad[k];
      }
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
      res.coords[i][0] += inc[i][0];
      res.coords[i][1] += inc[i][1];
      mx += res.coords[i][0];
      my += res.coords[i][1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      res.coords[i][0] -= mx;
      res.coords[i][1] -= my;
    }

    if (!recorded_post_exaggeration && t + 1 >= opts.exaggeration_iters) {
      res.kl_post_exaggeration = kl_divergence(p, res.coords);
      recorded_post_exaggeration = true;
    }
  }

  res.kl_final = kl_divergence(p, res.coords);
  if (!recorded_post_exaggeration) res.kl_post_exaggeration = res.kl_final;
  return res;
}

}  // namespace xsteer
