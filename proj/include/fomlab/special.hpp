#pragma once

#include <cmath>
#include <limits>

#include "fomlab/core.hpp"

namespace fomlab {

/// Inverse of erf on (-1, 1): rational initial guess refined with two
/// Newton steps, giving erfinv(erf(x)) = x to ~1e-15 on [-6, 6].
inline double erf_inverse(double p) {
    if (!(p > -1.0 && p < 1.0)) throw DomainError("erf_inverse: p must lie in (-1, 1)");
    if (p == 0.0) return 0.0;

    constexpr double kTwoOverSqrtPi = 1.1283791670955126;
    const double ap = std::fabs(p);
    if (1.0 - ap < 1e-7) {
        // beyond the fitted range of the rational guess: asymptotic
        // erfc(x) ~ exp(-x^2)/(x sqrt(pi)) start, Newton against erfc
        const double tail = 1.0 - ap;
        const double v = -std::log(tail) - 0.5723649429247001;  // ln(sqrt(pi))
        double x = std::sqrt(v);
        x = std::sqrt(std::max(v - std::log(x), 1.0));
        for (int it = 0; it < 4; ++it) {
            const double err = std::erfc(x) - tail;
            x += err / (kTwoOverSqrtPi * std::exp(-x * x));
        }
        return p > 0.0 ? x : -x;
    }

    // Initial guess (Giles 2010, "Approximating the erfinv function").
    double w = -std::log((1.0 - p) * (1.0 + p));
    double x;
    if (w < 5.0) {
        w -= 2.5;
        x = 2.81022636e-08;
        x = 3.43273939e-07 + x * w;
        x = -3.5233877e-06 + x * w;
        x = -4.39150654e-06 + x * w;
        x = 0.00021858087 + x * w;
        x = -0.00125372503 + x * w;
        x = -0.00417768164 + x * w;
        x = 0.246640727 + x * w;
        x = 1.50140941 + x * w;
        x *= p;
    } else {
        w = std::sqrt(w) - 3.0;
        x = -0.000200214257;
        x = 0.000100950558 + x * w;
        x = 0.00134934322 + x * w;
        x = -0.00367342844 + x * w;
        x = 0.00573950773 + x * w;
        x = -0.0076224613 + x * w;
        x = 0.00943887047 + x * w;
        x = 1.00167406 + x * w;
        x = 2.83297682 + x * w;
        x *= p;
    }

    // Newton refinement: f(x) = erf(x) - p, f'(x) = 2/sqrt(pi) exp(-x^2).
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    for (int it = 0; it < 2; ++it) {
        const double err = std::erf(x) - p;
        x -= err / (two_over_sqrt_pi * std::exp(-x * x));
    }
    return x;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z * M_SQRT1_2); }
inline double normal_logpdf(double z) { return -0.5 * z * z - 0.9189385332046727; }

inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
    return M_SQRT2 * erf_inverse(2.0 * p - 1.0);
}

/// z > 0 with upper-tail mass Q(z) = tail, stable for tails far below the
/// resolution of 1 - tail in double precision. Deep tails start from the
/// asymptotic erfc(x) ~ exp(-x^2)/(x sqrt(pi)) and polish with Newton.
inline double normal_tail_quantile(double tail) {
    if (!(tail > 0.0 && tail < 0.5)) throw DomainError("normal_tail_quantile: tail must lie in (0, 0.5)");
    if (tail > 1e-8) return normal_quantile(1.0 - tail);
    const double v = -std::log(2.0 * tail) - 0.5723649429247001;  // ln(sqrt(pi))
    double x = std::sqrt(v);
    x = std::sqrt(std::max(v - std::log(x), 1.0));
    constexpr double two_over_sqrt_pi = 1.1283791670955126;
    for (int it = 0; it < 4; ++it) {
        const double err = std::erfc(x) - 2.0 * tail;
        x += err / (two_over_sqrt_pi * std::exp(-x * x));
    }
    return M_SQRT2 * x;
}

/// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
    if (x > 36.0) return x + std::exp(-x);
    if (x < -36.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

/// log(e^a + e^b).
inline double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return (a > b) ? a + log1pexp(b - a) : b + log1pexp(a - b);
}

}  // namespace fomlab
