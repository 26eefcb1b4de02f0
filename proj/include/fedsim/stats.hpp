#pragma once

#include <vector>

namespace fedsim {

double mean_of(const std::vector<double>& values);

// Sample standard deviation (n-1 denominator). Zero for a single value.
double sample_std(const std::vector<double>& values);

// Regularized incomplete beta I_x(a, b), evaluated with Lentz's continued
// fraction. Accurate to ~1e-12 over the parameter ranges used here.
double regularized_incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unequal-variance t-test. Each sample needs >= 2 values. When both
// variances are zero: equal means give p = 1 by convention, unequal means
// are a degenerate-variance error.
WelchResult welch_t_test(const std::vector<double>& a,
                         const std::vector<double>& b);

}  // namespace fedsim
