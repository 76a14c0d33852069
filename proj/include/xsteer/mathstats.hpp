#pragma once

#include <span>

namespace xsteer {

struct TTestResult {
  double t = 0.0;
  double p = 0.0;  // two-sided
  int df = 0;
  double mean_diff = 0.0;
};

// Paired Student t-test on matched value lists. Throws LengthError for
// mismatched or short (< 2) inputs and DegenerateInputError when the paired
// differences have zero variance (t undefined).
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;  // Pearson correlation; 0 when y is constant
};

// Ordinary least squares y = slope*x + intercept. Throws LengthError for
// < 2 points and DegenerateInputError when x is constant.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Two-sided tail probability of Student's t with df degrees of freedom,
// via the regularized incomplete beta function.
double student_t_two_sided_p(double t, int df);

// I_x(a, b), continued-fraction evaluation; exposed so tests can pin it
// against an independent quadrature.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace xsteer
