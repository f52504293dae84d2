#pragma once
// Standard normal density, distribution and quantile functions.

#include <cmath>
#include <limits>
#include <numbers>

#include "falsikit/errors.hpp"

namespace falsikit::gaussian {

inline constexpr double half_log_2pi = 0.91893853320467274178; // ln(2*pi)/2

inline double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double log_pdf(double x) { return -half_log_2pi - 0.5 * x * x; }

/// P(Z <= x)
inline double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(Z >= x), accurate far into the upper tail.
inline double upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Two-sided p-value of a standardized residual: 2 min(P(Z<=u), P(Z>=u)).
inline double two_sided_p(double u) { return std::erfc(std::fabs(u) / std::numbers::sqrt2); }

namespace detail {

// Acklam's rational approximation, relative error below 1.15e-9.
inline double acklam_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

} // namespace detail

/// Lower-tail quantile: x with P(Z <= x) = p, for p in (0, 1).
/// Acklam's approximation refined by one Newton step on erfc; absolute
/// error stays below 1e-10 down to p ~ 1e-305.
inline double quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("gaussian quantile needs p in (0, 1)");
    // Work in the tail that holds p exactly; 1 - p loses digits for tiny p.
    if (p > 0.5) return -quantile(1.0 - p);
    double x = detail::acklam_quantile(p);
    const double dens = pdf(x);
    if (dens > 0.0) x -= (cdf(x) - p) / dens;
    return x;
}

/// x with P(Z >= x) = tail, for tail in (0, 1); no 1 - tail round-off.
inline double upper_quantile(double tail) { return -quantile(tail); }

} // namespace falsikit::gaussian
