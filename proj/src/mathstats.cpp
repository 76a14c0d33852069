#include "xsteer/mathstats.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "xsteer/common.hpp"

namespace xsteer {

namespace {

// Continued fraction for the incomplete beta function, modified Lentz scheme.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw ValidationError("incomplete beta: continued fraction failed to converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ValidationError("incomplete beta: parameters must be positive");
  if (x < 0.0 || x > 1.0)
    throw ValidationError("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df < 1) throw ValidationError("student t: df must be >= 1");
  const double nu = static_cast<double>(df);
  const double x = nu / (nu + t * t);
  return regularized_incomplete_beta(nu / 2.0, 0.5, x);
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw LengthError("paired t-test: value lists differ in length");
  const int n = static_cast<int>(a.size());
  if (n < 2) throw LengthError("paired t-test: need at least 2 pairs");

  std::vector<double> d(static_cast<size_t>(n));
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    d[static_cast<size_t>(i)] = a[static_cast<size_t>(i)] - b[static_cast<size_t>(i)];
    mean += d[static_cast<size_t>(i)];
  }
  mean /= n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dev = d[static_cast<size_t>(i)] - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / (n - 1));
  if (sd == 0.0)
    throw DegenerateInputError(
        "paired t-test: zero variance of differences, t undefined");

  TTestResult r;
  r.df = n - 1;
  r.mean_diff = mean;
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw LengthError("linear fit: value lists differ in length");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw LengthError("linear fit: need at least 2 points");

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[static_cast<size_t>(i)];
    my += y[static_cast<size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = x[static_cast<size_t>(i)] - mx;
    const double dy = y[static_cast<size_t>(i)] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) throw DegenerateInputError("linear fit: x is constant");

  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r = syy == 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
  return f;
}

}  // namespace xsteer
