#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fomlab/core.hpp"

namespace fomlab {

namespace detail {

/// Neville polynomial extrapolation of (x_k, v_k) to x = 0.
/// Returns the diagonal sequence (entry k uses points 0..k).
inline std::vector<double> neville_diagonal(const std::vector<double>& xs,
                                            const std::vector<double>& vs) {
    const std::size_t n = xs.size();
    std::vector<double> t = vs;
    std::vector<double> diag;
    diag.reserve(n);
    diag.push_back(t[0]);
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t j = k; j-- > 0;) {
            const double denom = xs[j] - xs[k];
            t[j] = (xs[j] * t[j + 1] - xs[k] * t[j]) / denom;
        }
        diag.push_back(t[0]);
    }
    return diag;
}

}  // namespace detail

/// Richardson-extrapolate central second-difference quotients D(h) to
/// h -> 0. `quotients` holds (h, D(h)) with h strictly decreasing.
///
/// The value is the deepest extrapolant and std_error the spread of the
/// two finest ones. If extrapolation disagrees with itself worse than the
/// raw quotients do, the finest raw quotient is reported with a widened
/// std_error instead of silently picking one of the extrapolants.
inline Estimate richardson_second_derivative(std::span<const std::pair<double, double>> quotients) {
    const std::size_t n = quotients.size();
    if (n < 2) throw ConfigError("h_ladder", "richardson: need at least 2 step sizes");
    std::vector<double> xs(n), vs(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(quotients[i].first > 0.0)) throw DomainError("richardson: step sizes must be positive");
        if (i > 0 && !(quotients[i].first < quotients[i - 1].first))
            throw DomainError("richardson: ladder must be strictly decreasing");
        if (!std::isfinite(quotients[i].second)) throw DataError("richardson: non-finite difference quotient");
        xs[i] = quotients[i].first * quotients[i].first;  // error series is in h^2
        vs[i] = quotients[i].second;
    }
    const auto diag = detail::neville_diagonal(xs, vs);
    double value = diag[n - 1];
    double spread = std::fabs(diag[n - 1] - diag[n - 2]);
    const double raw_spread = std::fabs(vs[n - 1] - vs[n - 2]);
    if (spread > raw_spread && raw_spread > 0.0) {
        value = vs[n - 1];
        spread = std::max(spread, raw_spread);
    }
    return Estimate{value, spread, Method::quadrature, static_cast<std::uint64_t>(n), std::nullopt};
}

/// Second derivative of f at 0 from central differences over a step
/// ladder, Richardson-extrapolated.
template <class F>
inline Estimate curvature_at_zero(F&& f, std::span<const double> ladder) {
    if (ladder.size() < 3) throw ConfigError("h_ladder", "curvature_at_zero: ladder needs >= 3 entries");
    const double f0 = f(0.0);
    if (!std::isfinite(f0)) throw DataError("curvature_at_zero: f(0) not finite");
    std::vector<std::pair<double, double>> quot;
    quot.reserve(ladder.size());
    for (const double h : ladder) {
        const double fp = f(h);
        const double fm = f(-h);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw DataError("curvature_at_zero: f(+-h) not finite at h=" + std::to_string(h));
        quot.emplace_back(h, (fp - 2.0 * f0 + fm) / (h * h));
    }
    return richardson_second_derivative(quot);
}

/// Central first-difference (f(h) - f(-h)) / 2h.
template <class F>
inline double central_first_difference(F&& f, double h) {
    return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace fomlab
