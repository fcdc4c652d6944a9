#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/model.hpp"
#include "fomlab/prior.hpp"
#include "fomlab/quadrature.hpp"
#include "fomlab/rng.hpp"
#include "fomlab/special.hpp"

namespace fomlab {

/// Ordered hypothesis pair: H0 draws from pr(g|theta0), H1 from
/// pr(g|theta1); y is the prior odds pr(theta0)/pr(theta1) and doubles as
/// the likelihood-ratio threshold that minimizes the error probability.
struct DetectionTask {
    double theta0 = 0.0;
    double theta1 = 0.0;
    double y = 1.0;
    double log_y = 0.0;
    double pr0 = 0.5;
    double pr1 = 0.5;

    static DetectionTask equal_odds(double t0, double t1) {
        DetectionTask t;
        t.theta0 = t0;
        t.theta1 = t1;
        return t;
    }
    static DetectionTask with_prior(const Prior& prior, double t0, double t1) {
        const PriorOdds o = prior.odds(t0, t1);
        DetectionTask t;
        t.theta0 = t0;
        t.theta1 = t1;
        t.y = o.y;
        t.log_y = o.log_y;
        t.pr0 = o.pr0;
        t.pr1 = o.pr1;
        return t;
    }
    static DetectionTask with_odds(double t0, double t1, double y) {
        if (!(y > 0.0)) throw DomainError("DetectionTask: odds must be positive");
        DetectionTask t;
        t.theta0 = t0;
        t.theta1 = t1;
        t.y = y;
        t.log_y = std::log(y);
        t.pr1 = 1.0 / (1.0 + y);
        t.pr0 = 1.0 - t.pr1;
        return t;
    }
    static DetectionTask with_log_odds(double t0, double t1, double log_y) {
        DetectionTask t;
        t.theta0 = t0;
        t.theta1 = t1;
        t.log_y = log_y;
        t.y = std::exp(log_y);
        if (log_y >= 0.0) {
            t.pr1 = 1.0 / (1.0 + t.y);
            t.pr0 = 1.0 - t.pr1;
        } else {
            t.pr0 = 1.0 / (1.0 + std::exp(-log_y));
            t.pr1 = 1.0 - t.pr0;
        }
        return t;
    }
};

/// ln pr(g|theta1) - ln pr(g|theta0). A zero density on one side only is
/// reported as +-inf rather than an exception.
inline double log_lr(const Model& model, double g, const DetectionTask& task) {
    return model.log_pdf(g, task.theta1) - model.log_pdf(g, task.theta0);
}

inline double log_lr_vec(const Model& model, std::span<const double> g,
                         std::span<const double> theta0, std::span<const double> theta1) {
    return model.log_pdf_vec(g, theta1) - model.log_pdf_vec(g, theta0);
}

namespace detail {

/// P(log LR > c) under g|theta_h, in closed form per family.
inline double lr_tail(const Model& model, const DetectionTask& task, double theta_h, double c) {
    switch (model.family()) {
        case ModelFamily::gaussian_location: {
            const double s = model.sigma();
            const double a = (task.theta1 - task.theta0) / (s * s);
            if (a == 0.0) return c < 0.0 ? 1.0 : 0.0;
            const double t = c / a + 0.5 * (task.theta0 + task.theta1);
            return a > 0.0 ? normal_sf((t - theta_h) / s) : normal_cdf((t - theta_h) / s);
        }
        case ModelFamily::gaussian_scale: {
            const double t0 = task.theta0, t1 = task.theta1;
            const double alpha = 0.5 / (t0 * t0) - 0.5 / (t1 * t1);
            const double beta = std::log(t0 / t1);
            if (alpha == 0.0) return c < beta ? 1.0 : 0.0;
            const double u = (c - beta) / alpha;  // g^2 vs u
            if (alpha > 0.0) {
                if (u <= 0.0) return 1.0;
                return std::erfc(std::sqrt(u) / (theta_h * M_SQRT2));
            }
            if (u <= 0.0) return 0.0;
            return std::erf(std::sqrt(u) / (theta_h * M_SQRT2));
        }
        case ModelFamily::poisson_rate: {
            const double r = std::log(task.theta1 / task.theta0);
            const double shift = task.theta1 - task.theta0;
            if (r == 0.0) return c < -shift ? 1.0 : 0.0;
            const double t = (c + shift) / r;  // count threshold
            if (r > 0.0) return poisson_sf(static_cast<long>(std::floor(t)), theta_h);
            return poisson_cdf(static_cast<long>(std::ceil(t)) - 1, theta_h);
        }
        default:
            throw PreconditionError("lr_tail: vector family tasks reduce to scalar ones first");
    }
}

/// Quantile of log LR at level q under g|theta_h (used to size grids).
inline double lr_quantile(const Model& model, const DetectionTask& task, double theta_h, double q) {
    switch (model.family()) {
        case ModelFamily::gaussian_location: {
            const double s = model.sigma();
            const double a = (task.theta1 - task.theta0) / (s * s);
            const double m = 0.5 * (task.theta0 + task.theta1);
            const double gq = theta_h + s * normal_quantile(a > 0.0 ? q : 1.0 - q);
            return a * (gq - m);
        }
        case ModelFamily::gaussian_scale: {
            const double t0 = task.theta0, t1 = task.theta1;
            const double alpha = 0.5 / (t0 * t0) - 0.5 / (t1 * t1);
            const double beta = std::log(t0 / t1);
            const double qq = alpha > 0.0 ? q : 1.0 - q;
            const double z = normal_quantile(0.5 * (1.0 + qq));  // chi1 quantile sqrt
            return beta + alpha * z * z * theta_h * theta_h;
        }
        case ModelFamily::poisson_rate: {
            const double r = std::log(task.theta1 / task.theta0);
            const double shift = task.theta1 - task.theta0;
            const double qq = r > 0.0 ? q : 1.0 - q;
            long k = 0;
            while (poisson_cdf(k, theta_h) < qq && k < 100'000'000) ++k;
            return r * static_cast<double>(k) - shift;
        }
        default: throw PreconditionError("lr_quantile: scalar families only");
    }
}

}  // namespace detail

struct RocPoint {
    double fpf = 0.0;
    double tpf = 0.0;
};

/// Ideal-observer ROC with its area and the equivalent detectability
/// d = 2 erfinv(2 AUC - 1).
struct RocCurve {
    std::vector<RocPoint> points;
    Estimate auc;
    double detectability = 0.0;

    /// CSV rows "fpf,tpf", 10 significant digits, LF line endings.
    void to_csv(std::ostream& os) const {
        os << "fpf,tpf\n";
        char buf[64];
        for (const auto& p : points) {
            auto r1 = std::to_chars(buf, buf + sizeof(buf), p.fpf, std::chars_format::general, 10);
            os.write(buf, r1.ptr - buf);
            os.put(',');
            auto r2 = std::to_chars(buf, buf + sizeof(buf), p.tpf, std::chars_format::general, 10);
            os.write(buf, r2.ptr - buf);
            os.put('\n');
        }
    }
};

inline double detectability_from_auc(double auc) {
    if (auc <= 0.5) return 0.0;
    return 2.0 * erf_inverse(std::min(2.0 * auc - 1.0, 1.0 - 1e-16));
}

namespace detail {

inline double auc_closed_form(const Model& model, const DetectionTask& task) {
    switch (model.family()) {
        case ModelFamily::gaussian_location:
            return normal_cdf(std::fabs(task.theta1 - task.theta0) / (model.sigma() * M_SQRT2));
        case ModelFamily::gaussian_scale: {
            const double lo = std::min(task.theta0, task.theta1);
            const double hi = std::max(task.theta0, task.theta1);
            return 1.0 - (2.0 / M_PI) * std::atan(lo / hi);
        }
        case ModelFamily::poisson_rate: {
            // two-sample rank statistic with half-weight ties, exact sums
            const bool increasing = task.theta1 > task.theta0;
            const long k0 = model.data_domain(task.theta0).count_hi;
            const long k1 = model.data_domain(task.theta1).count_hi;
            const long kmax = std::max(k0, k1);
            double auc = 0.0;
            double p0 = std::exp(-task.theta0);  // pmf under H0 at g=0
            double p1 = std::exp(-task.theta1);
            double cdf0_prev = 0.0;  // P0(G < k)
            for (long k = 0; k <= kmax; ++k) {
                if (k > 0) {
                    cdf0_prev += p0;
                    p0 *= task.theta0 / static_cast<double>(k);
                    p1 *= task.theta1 / static_cast<double>(k);
                }
                const double below = increasing ? cdf0_prev : 1.0 - cdf0_prev - p0;
                auc += p1 * (below + 0.5 * p0);
            }
            return auc;
        }
        default: throw PreconditionError("auc_closed_form: scalar families only");
    }
}

inline std::vector<double> threshold_grid(const Model& model, const DetectionTask& task, int n) {
    const double q = 1e-6;
    double lo = std::min(lr_quantile(model, task, task.theta0, q),
                         lr_quantile(model, task, task.theta1, q));
    double hi = std::max(lr_quantile(model, task, task.theta0, 1.0 - q),
                         lr_quantile(model, task, task.theta1, 1.0 - q));
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * i / static_cast<double>(n - 1);
    return grid;
}

}  // namespace detail

/// ROC curve, AUC and detectability for a two-point task.
///
/// closed_form evaluates exact tail probabilities on a 513-threshold grid
/// and an exact AUC; quadrature integrates the same curve by trapezoid on
/// a denser grid (for counts this reproduces the half-tie rank statistic
/// exactly); monte_carlo ranks sampled log-likelihood-ratios with DeLong
/// standard errors.
inline RocCurve roc_auc(const Model& model, const DetectionTask& task, MethodChoice choice,
                        const NumericsOptions& opt = {}) {
    model.check_theta(task.theta0);
    model.check_theta(task.theta1);
    RocCurve roc;
    if (task.theta0 == task.theta1) {
        roc.points = {{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}};
        roc.auc = closed_form_estimate(0.5);
        roc.detectability = 0.0;
        return roc;
    }

    const Method method = choice == MethodChoice::automatic
                              ? Method::closed_form
                              : (choice == MethodChoice::closed_form ? Method::closed_form
                                 : choice == MethodChoice::quadrature ? Method::quadrature
                                                                      : Method::monte_carlo);

    if (method != Method::monte_carlo) {
        const int n = method == Method::closed_form ? 513 : 4097;
        const auto grid = detail::threshold_grid(model, task, n);
        roc.points.reserve(grid.size() + 2);
        roc.points.push_back({0.0, 0.0});
        for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
            roc.points.push_back({detail::lr_tail(model, task, task.theta0, *it),
                                  detail::lr_tail(model, task, task.theta1, *it)});
        }
        roc.points.push_back({1.0, 1.0});
        if (method == Method::closed_form) {
            roc.auc = closed_form_estimate(detail::auc_closed_form(model, task));
        } else if (model.discrete_data()) {
            // exact polyline through every operating corner of the count
            // staircase; its trapezoid area equals the half-tie rank AUC
            const long kmax = std::max(model.data_domain(task.theta0).count_hi,
                                       model.data_domain(task.theta1).count_hi);
            const bool increasing = task.theta1 > task.theta0;
            double auc = 0.0;
            RocPoint prev{0.0, 0.0};
            for (long step = 0; step <= kmax + 1; ++step) {
                const long k = increasing ? kmax - step : step - 1;
                RocPoint cur = increasing
                                   ? RocPoint{poisson_sf(k, task.theta0), poisson_sf(k, task.theta1)}
                                   : RocPoint{poisson_cdf(k, task.theta0), poisson_cdf(k, task.theta1)};
                auc += (cur.fpf - prev.fpf) * 0.5 * (cur.tpf + prev.tpf);
                prev = cur;
            }
            auc += (1.0 - prev.fpf) * 0.5 * (1.0 + prev.tpf);
            roc.auc = Estimate{auc, 1e-12, Method::quadrature,
                               static_cast<std::uint64_t>(kmax + 2), std::nullopt};
        } else {
            double auc = 0.0;
            for (std::size_t i = 1; i < roc.points.size(); ++i) {
                auc += (roc.points[i].fpf - roc.points[i - 1].fpf) * 0.5 *
                       (roc.points[i].tpf + roc.points[i - 1].tpf);
            }
            roc.auc = Estimate{auc, 1e-6, Method::quadrature,
                               static_cast<std::uint64_t>(roc.points.size()), std::nullopt};
        }
        roc.detectability = detectability_from_auc(roc.auc.value);
        return roc;
    }

    // Monte Carlo path: rank statistic with half-weight ties + DeLong SE.
    const std::size_t n = opt.mc_samples;
    std::vector<double> l0(n), l1(n);
    {
        SplitRng r0(opt.seed, 0xD0);
        SplitRng r1(opt.seed, 0xD1);
        for (std::size_t i = 0; i < n; ++i) l0[i] = log_lr(model, model.draw(r0, task.theta0), task);
        for (std::size_t i = 0; i < n; ++i) l1[i] = log_lr(model, model.draw(r1, task.theta1), task);
    }
    std::vector<double> s0 = l0, s1 = l1;
    std::sort(s0.begin(), s0.end());
    std::sort(s1.begin(), s1.end());

    auto frac_below_half_ties = [](const std::vector<double>& sorted, double v) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v);
        const auto hi = std::upper_bound(lo, sorted.end(), v);
        const double below = static_cast<double>(lo - sorted.begin());
        const double ties = static_cast<double>(hi - lo);
        return (below + 0.5 * ties) / static_cast<double>(sorted.size());
    };

    double mean10 = 0.0, mean01 = 0.0;
    std::vector<double> v10(n), v01(n);
    for (std::size_t i = 0; i < n; ++i) {
        v10[i] = frac_below_half_ties(s0, l1[i]);  // P(L0 < L1_i) + ties/2
        mean10 += v10[i];
    }
    mean10 /= static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        v01[j] = 1.0 - frac_below_half_ties(s1, l0[j]);  // P(L1 > L0_j) + ties/2
        mean01 += v01[j];
    }
    mean01 /= static_cast<double>(n);
    double var10 = 0.0, var01 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var10 += (v10[i] - mean10) * (v10[i] - mean10);
        var01 += (v01[i] - mean01) * (v01[i] - mean01);
    }
    var10 /= static_cast<double>(n - 1);
    var01 /= static_cast<double>(n - 1);
    const double auc = mean10;
    const double se = std::sqrt(var10 / static_cast<double>(n) + var01 / static_cast<double>(n));
    roc.auc = Estimate{auc, se, Method::monte_carlo, 2 * n, opt.seed};
    roc.detectability = detectability_from_auc(auc);

    // empirical curve on the pooled-quantile grid
    const auto grid = detail::threshold_grid(model, task, 513);
    roc.points.reserve(grid.size() + 2);
    roc.points.push_back({0.0, 0.0});
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        const double fpf =
            static_cast<double>(s0.end() - std::upper_bound(s0.begin(), s0.end(), *it)) /
            static_cast<double>(n);
        const double tpf =
            static_cast<double>(s1.end() - std::upper_bound(s1.begin(), s1.end(), *it)) /
            static_cast<double>(n);
        roc.points.push_back({fpf, tpf});
    }
    roc.points.push_back({1.0, 1.0});
    return roc;
}

/// Error probability of the likelihood-ratio rule "decide H1 iff
/// log LR > log y" (ties to H0) with class priors from the odds y.
/// Infinite log-odds mean one class is prior-impossible: the error
/// probability is 0.
inline double min_error_probability_closed(const Model& model, const DetectionTask& task) {
    if (std::isinf(task.log_y)) return 0.0;
    const double fpf = detail::lr_tail(model, task, task.theta0, task.log_y);
    const double tpf = detail::lr_tail(model, task, task.theta1, task.log_y);
    return task.pr0 * fpf + task.pr1 * (1.0 - tpf);
}

/// Minimum probability of error for the prior-odds threshold.
inline Estimate mpe_task(const Model& model, const DetectionTask& task, MethodChoice choice,
                         const NumericsOptions& opt = {}) {
    model.check_theta(task.theta0);
    model.check_theta(task.theta1);
    const Method method = choice == MethodChoice::automatic || choice == MethodChoice::closed_form
                              ? Method::closed_form
                              : (choice == MethodChoice::quadrature ? Method::quadrature
                                                                    : Method::monte_carlo);
    if (method == Method::closed_form)
        return closed_form_estimate(min_error_probability_closed(model, task));

    if (method == Method::quadrature) {
        // integrate the densities over the decision regions
        auto region_prob = [&](double theta_h) -> Estimate {
            const DataDomain dom = model.data_domain(theta_h);
            if (dom.discrete) {
                double p = 0.0;
                for (long g = 0; g <= dom.count_hi; ++g) {
                    if (log_lr(model, static_cast<double>(g), task) > task.log_y)
                        p += std::exp(poisson_log_pmf(g, theta_h));
                }
                return Estimate{p, opt.quad_tol, Method::quadrature,
                                static_cast<std::uint64_t>(dom.count_hi + 1), std::nullopt};
            }
            auto f = [&](double g) {
                return log_lr(model, g, task) > task.log_y ? std::exp(model.log_pdf(g, theta_h))
                                                           : 0.0;
            };
            return integrate_1d(f, dom.lo, dom.hi, opt.quad_tol);
        };
        const Estimate d1_under_h0 = region_prob(task.theta0);
        const Estimate d1_under_h1 = region_prob(task.theta1);
        return Estimate{task.pr0 * d1_under_h0.value + task.pr1 * (1.0 - d1_under_h1.value),
                        opt.quad_tol, Method::quadrature, d1_under_h0.effort + d1_under_h1.effort,
                        std::nullopt};
    }

    const std::size_t n = opt.mc_samples;
    SplitRng r0(opt.seed, 0xE0);
    SplitRng r1(opt.seed, 0xE1);
    std::size_t false_pos = 0, false_neg = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (log_lr(model, model.draw(r0, task.theta0), task) > task.log_y) ++false_pos;
    for (std::size_t i = 0; i < n; ++i)
        if (!(log_lr(model, model.draw(r1, task.theta1), task) > task.log_y)) ++false_neg;
    const double pf = static_cast<double>(false_pos) / static_cast<double>(n);
    const double pn = static_cast<double>(false_neg) / static_cast<double>(n);
    const double value = task.pr0 * pf + task.pr1 * pn;
    const double se = std::sqrt(task.pr0 * task.pr0 * pf * (1.0 - pf) / static_cast<double>(n) +
                                task.pr1 * task.pr1 * pn * (1.0 - pn) / static_cast<double>(n));
    return Estimate{value, se, Method::monte_carlo, 2 * n, opt.seed};
}

inline Estimate mpe(const Model& model, const Prior& prior, double theta0, double theta1,
                    MethodChoice choice, const NumericsOptions& opt = {}) {
    return mpe_task(model, DetectionTask::with_prior(prior, theta0, theta1), choice, opt);
}

}  // namespace fomlab
