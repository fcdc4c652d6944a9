#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fomlab/core.hpp"

namespace fomlab {

namespace detail {

// Gauss-Kronrod 7-15 node/weight pairs on [-1, 1]; column 0 abscissa,
// column 1 Gauss-7 weight (0 for Kronrod-only nodes), column 2 K15 weight.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class F>
inline double gk15_panel(F&& f, double a, double b, double& err, std::uint64_t& evals) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double y0 = f(mid);
    double g7 = kGk15[0][1] * y0;
    double k15 = kGk15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGk15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += kGk15[i][1] * yi;
        k15 += kGk15[i][2] * yi;
    }
    evals += 15;
    g7 *= half;
    k15 *= half;
    err = std::fabs(k15 - g7);
    return k15;
}

struct QuadPanel {
    double a = 0.0, b = 0.0, value = 0.0, err = 0.0;
    bool operator<(const QuadPanel& o) const { return err < o.err; }  // max-heap on error
};

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [lo, hi] to absolute
/// tolerance tol: globally adaptive, always bisecting the panel with the
/// largest error estimate. The interval is pre-split into 8 panels so a
/// feature hiding at the midpoint of a symmetric integrand cannot be
/// missed. The final sum runs left to right for a deterministic result.
template <class F>
inline Estimate integrate_1d(F&& f, double lo, double hi, double tol,
                             std::uint64_t max_evals = 20'000'000) {
    if (!(tol > 0.0)) throw DomainError("integrate_1d: tol must be positive");
    if (!(hi > lo)) {
        if (hi == lo) return Estimate{0.0, tol, Method::quadrature, 0, std::nullopt};
        throw DomainError("integrate_1d: hi < lo");
    }
    std::uint64_t evals = 0;
    std::vector<detail::QuadPanel> heap;
    heap.reserve(256);
    double err_total = 0.0;
    auto push_panel = [&](double a, double b) {
        detail::QuadPanel p;
        p.a = a;
        p.b = b;
        p.value = detail::gk15_panel(f, a, b, p.err, evals);
        err_total += p.err;
        heap.push_back(p);
        std::push_heap(heap.begin(), heap.end());
    };
    const double step = (hi - lo) / 8.0;
    for (int i = 0; i < 8; ++i) push_panel(lo + i * step, (i == 7) ? hi : lo + (i + 1) * step);

    while (err_total > tol) {
        if (evals >= max_evals || heap.size() >= 400'000 ||
            heap.front().b - heap.front().a < 1e-15 * (hi - lo)) {
            double best = 0.0;
            for (const auto& p : heap) best += p.value;
            throw ConvergenceError("integrate_1d: tolerance " + std::to_string(tol) +
                                       " not reached (error estimate " + std::to_string(err_total) +
                                       ")",
                                   best);
        }
        std::pop_heap(heap.begin(), heap.end());
        const detail::QuadPanel worst = heap.back();
        heap.pop_back();
        err_total -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        push_panel(worst.a, mid);
        push_panel(mid, worst.b);
    }

    std::sort(heap.begin(), heap.end(),
              [](const detail::QuadPanel& x, const detail::QuadPanel& y) { return x.a < y.a; });
    double total = 0.0;
    for (const auto& p : heap) total += p.value;
    return Estimate{total, tol, Method::quadrature, evals, std::nullopt};
}

/// Integral over [lo, inf) via the map x = lo + t/(1-t), t in [0,1).
template <class F>
inline Estimate integrate_semi_infinite(F&& f, double lo, double tol,
                                        std::uint64_t max_evals = 20'000'000) {
    auto mapped = [&](double t) {
        const double one_m = 1.0 - t;
        const double x = lo + t / one_m;
        return f(x) / (one_m * one_m);
    };
    return integrate_1d(mapped, 0.0, 1.0, tol, max_evals);
}

/// Gauss-Legendre nodes and weights on [a, b] (Newton on P_n roots).
inline void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                           std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        nodes[i] = xm - xl * z;
        nodes[n - 1 - i] = xm + xl * z;
        weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

}  // namespace fomlab
