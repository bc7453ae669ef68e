#pragma once

namespace t3star {

/// I_x(a, b), evaluated with Lentz's continued fraction on whichever of x or
/// 1 - x converges faster.
double regularized_incomplete_beta(double a, double b, double x);

/// P(F > f) for a central F distribution with (df1, df2) degrees of freedom.
double f_upper_tail(double f, double df1, double df2);

}  // namespace t3star
