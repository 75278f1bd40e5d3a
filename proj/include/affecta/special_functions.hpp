#pragma once

namespace affecta::special {

/// Regularized incomplete beta I_x(a, b), evaluated by Lentz's continued
/// fraction on whichever side of the mean converges fastest. Absolute error
/// below 1e-13 for a, b in [0.5, 500].
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df`
/// degrees of freedom (df > 0, not necessarily integer).
double student_t_two_sided_p(double t, double df);

/// Standard normal CDF.
double normal_cdf(double z);

/// Upper tail 1 - normal_cdf(z), without cancellation for large z.
double normal_upper_tail(double z);

/// Inverse standard normal CDF (Wichura's AS 241, PPND16); p in (0, 1).
double normal_quantile(double p);

}  // namespace affecta::special
