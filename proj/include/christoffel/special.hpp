#pragma once

namespace christoffel {

/// Standard normal CDF.
double normal_cdf(double x);

/// Quantile function of the standard normal distribution, q(p) =
/// sqrt(2) erfinv(2p - 1). Accurate to ~1e-14 relative on (0, 1); returns
/// -inf / +inf at 0 / 1 and NaN outside [0, 1].
double normal_quantile(double p);

/// Graph function of the Christoffel-Darboux example:
/// f_eps(x) = (q(eps) - q((1 - 2 eps) x + eps)) / (2 q(eps)), mapping [0,1]
/// onto [0,1] with f(0) = 0, f(1/2) = 1/2, f(1) = 1.
double graph_function(double epsilon, double x);

/// (2k - 1)!! with (-1)!! = 1.
double double_factorial_odd(int k);

}  // namespace christoffel
