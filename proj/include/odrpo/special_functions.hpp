#pragma once

namespace odrpo {

double log_choose(int n, int k);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// Series branch for x < a + 1, continued fraction otherwise.
double regularized_gamma_q(double a, double x);

// Upper-tail probability of a chi-square variate with dof degrees of freedom.
double chi_square_upper_tail(double x, int dof);

}  // namespace odrpo
