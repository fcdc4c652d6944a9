#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/model.hpp"
#include "fomlab/monte_carlo.hpp"
#include "fomlab/observer.hpp"
#include "fomlab/prior.hpp"
#include "fomlab/quadrature.hpp"
#include "fomlab/special.hpp"

namespace fomlab {

enum class InfoKind { shannon_info, binary_entropy, conditional_entropy };

/// A task information metric in nats.
struct InfoValue {
    Estimate value;
    InfoKind kind = InfoKind::shannon_info;
    DetectionTask task;
};

/// Entropy of the binary label with prior odds y, in nats. Peaks at ln 2
/// for even odds and vanishes as the odds degenerate.
inline double binary_entropy(double y) {
    if (!(y > 0.0)) throw DomainError("binary_entropy: odds must be positive");
    if (std::isinf(y)) return 0.0;
    const double log_y = std::log(y);
    // H = ln(1+y) - y/(1+y) ln y, arranged around log-odds for stability
    const double l1py = log1pexp(log_y);  // ln(1+y)
    const double pr0 = 1.0 / (1.0 + std::exp(-log_y));
    return l1py - pr0 * log_y;
}

/// Which of the two algebraically equal conditional-entropy expressions to
/// evaluate: h0_only needs expectations under H0 alone, two_expectation
/// averages one integrand under each hypothesis.
enum class CeForm { h0_only, two_expectation };

inline const char* to_string(CeForm f) { return f == CeForm::h0_only ? "h0_only" : "two_expectation"; }

namespace detail {

/// Integrate f(g, lp0, lp1) over the union of both hypotheses' certified
/// data ranges (sum for counts).
template <class F>
inline Estimate task_integral(const Model& model, const DetectionTask& task, F&& f, double tol) {
    const DataDomain d0 = model.data_domain(task.theta0);
    const DataDomain d1 = model.data_domain(task.theta1);
    if (!d0.discrete) {
        const double lo = std::min(d0.lo, d1.lo);
        const double hi = std::max(d0.hi, d1.hi);
        auto integrand = [&](double g) {
            return f(g, model.log_pdf(g, task.theta0), model.log_pdf(g, task.theta1));
        };
        return integrate_1d(integrand, lo, hi, tol);
    }
    const long hi = std::max(d0.count_hi, d1.count_hi);
    double acc = 0.0;
    for (long g = 0; g <= hi; ++g) {
        const double gd = static_cast<double>(g);
        acc += f(gd, poisson_log_pmf(g, task.theta0), poisson_log_pmf(g, task.theta1));
    }
    return Estimate{acc, tol, Method::quadrature, static_cast<std::uint64_t>(hi + 1), std::nullopt};
}

// per-sample integrands of the entropy metrics, all in log domain

inline double ce_h0_kernel(double log_lr, double log_y, double pr0, double /*pr1*/) {
    // pr1 * [ (L+y)ln(L+y) - L ln L ] - pr0 ln y per H0 sample, with the
    // pr1 factor folded into the exponents so huge odds cannot overflow
    const double l1py = log1pexp(log_y);        // ln(1+y)
    const double t = logaddexp(log_lr, log_y);  // ln(L + y)
    const double a = std::exp(t - l1py) * t;
    const double b = std::exp(log_lr - l1py) * log_lr;
    return a - b - pr0 * log_y;
}

inline double ce_two_h1_kernel(double log_lr, double log_y) {
    return log1pexp(log_y - log_lr);  // ln((L+y)/L)
}
inline double ce_two_h0_kernel(double log_lr, double log_y) {
    return log1pexp(log_lr - log_y);  // ln((L+y)/y)
}

inline double si_h1_kernel(double log_lr, double log_y) {
    return log1pexp(log_y) - log1pexp(log_y - log_lr);  // ln(L(1+y)/(L+y))
}
inline double si_h0_kernel(double log_lr, double log_y) {
    return log1pexp(-log_y) - log1pexp(log_lr - log_y);  // ln((1+y)/(L+y))
}

}  // namespace detail

/// Residual label uncertainty given the data, C_e = H - I, in nats.
///
/// Both forms must agree; evaluating them against each other is the main
/// cross-check on the entropy machinery.
inline InfoValue conditional_entropy(const Model& model, const DetectionTask& task, CeForm form,
                                     MethodChoice choice, const NumericsOptions& opt = {}) {
    InfoValue out;
    out.kind = InfoKind::conditional_entropy;
    out.task = task;
    if (task.theta0 == task.theta1) {  // data carry nothing; avoid 0*log 0
        out.value = closed_form_estimate(binary_entropy(task.y));
        return out;
    }
    if (std::fabs(task.log_y) > 500.0) {  // label is prior-certain: C_e <= H(y) ~ 0
        out.value = closed_form_estimate(0.0);
        return out;
    }
    const Method method =
        (choice == MethodChoice::monte_carlo) ? Method::monte_carlo : Method::quadrature;

    if (method == Method::quadrature) {
        if (form == CeForm::h0_only) {
            // weighted integrands keep everything bounded: pr0(g)(L+y) is
            // pr1(g) + y pr0(g), and the pr1 prefactor is folded into the
            // exponent so extreme odds stay finite
            const double l1py = log1pexp(task.log_y);
            auto f1 = [&](double, double lp0, double lp1) {
                const double t = logaddexp(lp1, task.log_y + lp0);
                return std::exp(t - l1py) * logaddexp(lp1 - lp0, task.log_y);
            };
            auto f2 = [&](double, double lp0, double lp1) {
                return std::exp(lp1 - l1py) * (lp1 - lp0);
            };
            const Estimate i1 = detail::task_integral(model, task, f1, opt.quad_tol);
            const Estimate i2 = detail::task_integral(model, task, f2, opt.quad_tol);
            out.value = Estimate{i1.value - i2.value - task.pr0 * task.log_y,
                                 i1.std_error + i2.std_error, Method::quadrature,
                                 i1.effort + i2.effort, std::nullopt};
        } else {
            auto fh1 = [&](double, double lp0, double lp1) {
                return std::exp(lp1) * detail::ce_two_h1_kernel(lp1 - lp0, task.log_y);
            };
            auto fh0 = [&](double, double lp0, double lp1) {
                return std::exp(lp0) * detail::ce_two_h0_kernel(lp1 - lp0, task.log_y);
            };
            const Estimate a = detail::task_integral(model, task, fh1, opt.quad_tol);
            const Estimate b = detail::task_integral(model, task, fh0, opt.quad_tol);
            out.value = Estimate{task.pr1 * a.value + task.pr0 * b.value,
                                 a.std_error + b.std_error, Method::quadrature,
                                 a.effort + b.effort, std::nullopt};
        }
        return out;
    }

    if (form == CeForm::h0_only) {
        out.value = mc_mean([&](SplitRng& rng) { return model.draw(rng, task.theta0); },
                            [&](double g) {
                                return detail::ce_h0_kernel(log_lr(model, g, task), task.log_y,
                                                            task.pr0, task.pr1);
                            },
                            opt.mc_samples, opt.seed);
    } else {
        const Estimate a = mc_mean([&](SplitRng& rng) { return model.draw(rng, task.theta1); },
                                   [&](double g) {
                                       return detail::ce_two_h1_kernel(log_lr(model, g, task),
                                                                       task.log_y);
                                   },
                                   opt.mc_samples, opt.seed);
        const Estimate b = mc_mean([&](SplitRng& rng) { return model.draw(rng, task.theta0); },
                                   [&](double g) {
                                       return detail::ce_two_h0_kernel(log_lr(model, g, task),
                                                                       task.log_y);
                                   },
                                   opt.mc_samples, opt.seed + 1);
        const double se = std::hypot(task.pr1 * a.std_error, task.pr0 * b.std_error);
        out.value = Estimate{task.pr1 * a.value + task.pr0 * b.value, se, Method::monte_carlo,
                             a.effort + b.effort, opt.seed};
    }
    return out;
}

/// Mutual information between the binary label and the data, in nats,
/// computed directly from its defining expectations.
inline InfoValue shannon_info(const Model& model, const DetectionTask& task, MethodChoice choice,
                              const NumericsOptions& opt = {}) {
    InfoValue out;
    out.kind = InfoKind::shannon_info;
    out.task = task;
    if (task.theta0 == task.theta1 || std::fabs(task.log_y) > 500.0) {
        out.value = closed_form_estimate(0.0);  // I <= H(y), which is ~0 for extreme odds
        return out;
    }
    const Method method =
        (choice == MethodChoice::monte_carlo) ? Method::monte_carlo : Method::quadrature;

    if (method == Method::quadrature) {
        auto fh1 = [&](double, double lp0, double lp1) {
            return std::exp(lp1) * detail::si_h1_kernel(lp1 - lp0, task.log_y);
        };
        auto fh0 = [&](double, double lp0, double lp1) {
            return std::exp(lp0) * detail::si_h0_kernel(lp1 - lp0, task.log_y);
        };
        const Estimate a = detail::task_integral(model, task, fh1, opt.quad_tol);
        const Estimate b = detail::task_integral(model, task, fh0, opt.quad_tol);
        out.value = Estimate{task.pr1 * a.value + task.pr0 * b.value, a.std_error + b.std_error,
                             Method::quadrature, a.effort + b.effort, std::nullopt};
        return out;
    }

    const Estimate a = mc_mean([&](SplitRng& rng) { return model.draw(rng, task.theta1); },
                               [&](double g) {
                                   return detail::si_h1_kernel(log_lr(model, g, task), task.log_y);
                               },
                               opt.mc_samples, opt.seed);
    const Estimate b = mc_mean([&](SplitRng& rng) { return model.draw(rng, task.theta0); },
                               [&](double g) {
                                   return detail::si_h0_kernel(log_lr(model, g, task), task.log_y);
                               },
                               opt.mc_samples, opt.seed + 1);
    const double se = std::hypot(task.pr1 * a.std_error, task.pr0 * b.std_error);
    out.value = Estimate{task.pr1 * a.value + task.pr0 * b.value, se, Method::monte_carlo,
                         a.effort + b.effort, opt.seed};
    return out;
}

/// Prior-averaged entropy metrics for the shifted-pair task family
/// theta -> (theta, theta + delta), odds taken from the prior at each node.
struct AveragedMetrics {
    Estimate avg_ce;
    Estimate avg_si;
    double excluded_mass = 0.0;  // prior mass whose shifted partner left the support
    double trunc_lo = 0.0;
    double trunc_hi = 0.0;
    std::vector<std::string> warnings;
};

inline AveragedMetrics averaged_metrics(const Model& model, const Prior& prior, double delta,
                                        MethodChoice choice, const NumericsOptions& opt = {}) {
    AveragedMetrics out;
    const Interval trunc = prior.truncation(opt.trunc_mass);
    out.trunc_lo = trunc.lo;
    out.trunc_hi = trunc.hi;
    if (delta == 0.0) {
        out.avg_ce = closed_form_estimate(std::log(2.0));
        out.avg_si = closed_form_estimate(0.0);
        return out;
    }

    // restrict to nodes whose shifted partner stays inside the support
    const Interval supp = prior.support();
    double lo = std::max(trunc.lo, supp.lo);
    double hi = std::min(trunc.hi, supp.hi);
    if (delta > 0.0)
        hi = std::min(hi, supp.hi - delta);
    else
        lo = std::max(lo, supp.lo - delta);
    if (!(hi > lo)) throw DomainError("averaged_metrics: no admissible nodes for this delta");
    out.excluded_mass = std::max(0.0, (prior.cdf(trunc.hi) - prior.cdf(hi)) +
                                          (prior.cdf(lo) - prior.cdf(trunc.lo)));
    if (out.excluded_mass > 1e-6)
        out.warnings.push_back("excluded prior mass " + std::to_string(out.excluded_mass) +
                               " at delta " + std::to_string(delta));

    const Method method =
        (choice == MethodChoice::monte_carlo) ? Method::monte_carlo : Method::quadrature;

    if (method == Method::quadrature) {
        auto node_ce = [&](double th) {
            const DetectionTask t = DetectionTask::with_prior(prior, th, th + delta);
            return prior.pdf(th) *
                   conditional_entropy(model, t, CeForm::h0_only, MethodChoice::quadrature, opt)
                       .value.value;
        };
        auto node_si = [&](double th) {
            const DetectionTask t = DetectionTask::with_prior(prior, th, th + delta);
            return prior.pdf(th) *
                   shannon_info(model, t, MethodChoice::quadrature, opt).value.value;
        };
        out.avg_ce = integrate_1d(node_ce, lo, hi, opt.quad_tol);
        out.avg_si = integrate_1d(node_si, lo, hi, opt.quad_tol);
        return out;
    }

    // single-level joint MC: the two_expectation form is linear in two
    // conditional expectations, so (theta, g0, g1) draws estimate it
    // without nesting
    auto draw = [&](SplitRng& rng) {
        double th = prior.draw(rng);
        int guard = 0;
        while (!(th > lo && th < hi) && ++guard < 10000) th = prior.draw(rng);
        if (guard >= 10000) throw DataError("averaged_metrics: prior draws keep leaving the node window");
        const double g0 = model.draw(rng, th);
        const double g1 = model.draw(rng, th + delta);
        return std::tuple<double, double, double>(th, g0, g1);
    };
    auto val_ce = [&](const std::tuple<double, double, double>& s) {
        const auto [th, g0, g1] = s;
        const DetectionTask t = DetectionTask::with_prior(prior, th, th + delta);
        return t.pr1 * detail::ce_two_h1_kernel(log_lr(model, g1, t), t.log_y) +
               t.pr0 * detail::ce_two_h0_kernel(log_lr(model, g0, t), t.log_y);
    };
    auto val_si = [&](const std::tuple<double, double, double>& s) {
        const auto [th, g0, g1] = s;
        const DetectionTask t = DetectionTask::with_prior(prior, th, th + delta);
        return t.pr1 * detail::si_h1_kernel(log_lr(model, g1, t), t.log_y) +
               t.pr0 * detail::si_h0_kernel(log_lr(model, g0, t), t.log_y);
    };
    out.avg_ce = mc_mean(draw, val_ce, opt.mc_samples, opt.seed);
    out.avg_si = mc_mean(draw, val_si, opt.mc_samples, opt.seed + 1);
    return out;
}

/// Average conditional entropy of the directional task theta -> theta + t u
/// for the vector family under a per-component product prior. The data
/// part reduces exactly to a scalar location task of separation t along u;
/// the odds come from the full product prior on a tensor quadrature grid.
inline Estimate averaged_ce_directional(const Model& model, const std::vector<Prior>& priors,
                                        double t, std::span<const double> u,
                                        const NumericsOptions& opt = {}) {
    if (model.family() != ModelFamily::gaussian_location_vector)
        throw ConfigError("model.family", "averaged_ce_directional needs the vector family");
    const std::size_t d = static_cast<std::size_t>(model.param_dim());
    if (priors.size() != d || u.size() != d)
        throw ConfigError("task.u", "direction/prior dimension mismatch");
    double norm = 0.0;
    for (const double c : u) norm += c * c;
    if (std::fabs(norm - 1.0) > 1e-9) throw ConfigError("task.u", "direction must be a unit vector");

    if (t == 0.0) return closed_form_estimate(std::log(2.0));

    const Model scalar = Model::gaussian_location(model.sigma());
    constexpr int kNodesPerAxis = 48;
    std::vector<std::vector<double>> nodes(d), weights(d);
    for (std::size_t i = 0; i < d; ++i) {
        const Interval tr = priors[i].truncation(opt.trunc_mass);
        gauss_legendre(kNodesPerAxis, tr.lo, tr.hi, nodes[i], weights[i]);
    }

    // walk the tensor grid (product prior: weight is the per-axis product)
    std::vector<std::size_t> idx(d, 0);
    double acc = 0.0;
    std::uint64_t effort = 0;
    for (;;) {
        double wgt = 1.0, log_y = 0.0;
        bool valid = true;
        for (std::size_t i = 0; i < d; ++i) {
            const double th = nodes[i][idx[i]];
            const double shifted = th + t * u[i];
            if (!priors[i].in_support_interior(shifted)) {
                valid = false;
                break;
            }
            wgt *= weights[i][idx[i]] * priors[i].pdf(th);
            log_y += priors[i].log_pdf(th) - priors[i].log_pdf(shifted);
        }
        if (valid) {
            const DetectionTask task = DetectionTask::with_log_odds(0.0, t, log_y);
            const InfoValue ce =
                conditional_entropy(scalar, task, CeForm::h0_only, MethodChoice::quadrature, opt);
            acc += wgt * ce.value.value;
            effort += ce.value.effort;
        }
        std::size_t k = 0;
        while (k < d && ++idx[k] == static_cast<std::size_t>(kNodesPerAxis)) idx[k++] = 0;
        if (k == d) break;
    }
    return Estimate{acc, opt.quad_tol * 100, Method::quadrature, effort, std::nullopt};
}

}  // namespace fomlab
