#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "fomlab/core.hpp"
#include "fomlab/fisher.hpp"
#include "fomlab/model.hpp"
#include "fomlab/monte_carlo.hpp"
#include "fomlab/observer.hpp"
#include "fomlab/prior.hpp"
#include "fomlab/quadrature.hpp"

namespace fomlab {

/// Posterior over theta for one observed g: normalizing evidence and the
/// first two posterior moments, all by quadrature over the prior support.
struct Posterior {
    double g = 0.0;
    double log_evidence = 0.0;
    Estimate evidence;
    double mean = 0.0;
    double second_moment = 0.0;

    double variance() const { return second_moment - mean * mean; }
};

inline Posterior posterior_stats(const Model& model, const Prior& prior, double g,
                                 const NumericsOptions& opt = {}) {
    const Interval tr = prior.truncation(opt.trunc_mass);
    auto log_joint = [&](double th) { return model.log_pdf(g, th) + prior.log_pdf(th); };

    // factor out the peak so the normalized integrals stay O(1)
    double peak = -std::numeric_limits<double>::infinity();
    constexpr int kScan = 256;
    for (int i = 0; i <= kScan; ++i) {
        const double th = tr.lo + (tr.hi - tr.lo) * i / static_cast<double>(kScan);
        if (!prior.in_support_interior(th)) continue;
        peak = std::max(peak, log_joint(th));
    }
    if (!std::isfinite(peak)) throw DataError("posterior_stats: joint density vanished on the support scan");

    auto wexp = [&](double th) { return std::exp(log_joint(th) - peak); };
    const Estimate z = integrate_1d(wexp, tr.lo, tr.hi, opt.quad_tol);
    if (!(z.value > 0.0))
        throw DataError("posterior_stats: evidence underflow; g is incompatible with the prior mass");
    const Estimate m1 = integrate_1d([&](double th) { return th * wexp(th); }, tr.lo, tr.hi, opt.quad_tol);
    const Estimate m2 =
        integrate_1d([&](double th) { return th * th * wexp(th); }, tr.lo, tr.hi, opt.quad_tol);

    Posterior p;
    p.g = g;
    p.log_evidence = peak + std::log(z.value);
    if (p.log_evidence < -700.0)
        throw DataError("posterior_stats: evidence below the underflow floor");
    p.evidence = Estimate{std::exp(p.log_evidence), opt.quad_tol, Method::quadrature, z.effort,
                          std::nullopt};
    p.mean = m1.value / z.value;
    p.second_moment = m2.value / z.value;
    return p;
}

/// ln pr(theta | g) for the posterior implied by (model, prior, g).
inline double log_posterior(const Model& model, const Prior& prior, const Posterior& post,
                            double theta) {
    return model.log_pdf(post.g, theta) + prior.log_pdf(theta) - post.log_evidence;
}

enum class Estimator { posterior_mean, mle };

inline const char* to_string(Estimator e) {
    return e == Estimator::posterior_mean ? "posterior_mean" : "mle";
}

namespace detail {

/// theta-hat(g) for the requested estimator; the MLE ships only for the
/// families whose MLE is exactly unbiased (location and rate: theta-hat = g).
class EstimatorFn {
  public:
    EstimatorFn(const Model& model, const Prior& prior, Estimator kind, const NumericsOptions& opt)
        : model_(model), prior_(prior), kind_(kind), opt_(opt) {
        if (kind == Estimator::mle && model.family() != ModelFamily::gaussian_location &&
            model.family() != ModelFamily::poisson_rate)
            throw PreconditionError("mle estimator ships only for gaussian_location and poisson_rate");
    }

    double operator()(double g) const {
        if (kind_ == Estimator::mle) return g;
        if (model_.discrete_data()) {
            const long key = static_cast<long>(g);
            const auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
            const double v = posterior_stats(model_, prior_, g, opt_).mean;
            cache_.emplace(key, v);
            return v;
        }
        return posterior_stats(model_, prior_, g, opt_).mean;
    }

  private:
    const Model& model_;
    const Prior& prior_;
    Estimator kind_;
    NumericsOptions opt_;
    mutable std::map<long, double> cache_;
};

}  // namespace detail

/// Ensemble mean squared error <<(theta-hat(g) - theta)^2>_{g|theta}>_theta.
inline Estimate emse(const Model& model, const Prior& prior, Estimator estimator,
                     MethodChoice choice, const NumericsOptions& opt = {}) {
    NumericsOptions inner_opt = opt;
    inner_opt.quad_tol = opt.quad_tol * 0.1;
    const detail::EstimatorFn theta_hat(model, prior, estimator, inner_opt);

    const Method method =
        (choice == MethodChoice::monte_carlo) ? Method::monte_carlo : Method::quadrature;

    if (method == Method::quadrature) {
        return expect_prior(
            prior,
            [&](double th) {
                return expect_data(
                           model, th,
                           [&](double g) {
                               const double e = theta_hat(g) - th;
                               return e * e;
                           },
                           inner_opt.quad_tol)
                    .value;
            },
            opt.quad_tol, opt.trunc_mass);
    }

    return mc_mean(
        [&](SplitRng& rng) {
            const double th = prior.draw(rng);
            return std::pair<double, double>(model.draw(rng, th), th);
        },
        [&](const std::pair<double, double>& gt) {
            const double e = theta_hat(gt.first) - gt.second;
            return e * e;
        },
        opt.mc_samples, opt.seed);
}

enum class ZzForm { standard, expectation };

inline const char* to_string(ZzForm f) { return f == ZzForm::standard ? "standard" : "expectation"; }

/// Detection-error lower bound on the EMSE, in the printed double-integral
/// form (standard) or the prior-expectation form; the two are equal and
/// evaluating both is the end-to-end check of that equivalence.
///
/// No valley-filling step is applied: the bound is evaluated exactly as
/// stated, which can only weaken (never invalidate) it.
inline Estimate ziv_zakai(const Model& model, const Prior& prior, ZzForm form, MethodChoice choice,
                          const NumericsOptions& opt = {}) {
    const Interval supp = prior.support();
    const Interval tr = prior.truncation(std::min(opt.trunc_mass, 1e-12));
    const double inner_tol = opt.quad_tol * 0.1;
    const double outer_tol = opt.quad_tol * 10.0;

    auto pe = [&](double t0, double t1) {
        if (!prior.in_support_interior(t0) || !prior.in_support_interior(t1)) return 0.0;
        const double ly = prior.log_pdf(t0) - prior.log_pdf(t1);
        return min_error_probability_closed(model, DetectionTask::with_log_odds(t0, t1, ly));
    };

    if (form == ZzForm::standard) {
        // 1/2 int_0^inf x int [pr(th) + pr(th+x)] P_e(th, th+x) dth dx
        auto inner = [&](double x) {
            // covers the mass of both weight terms: pr(th) on [tr.lo, tr.hi]
            // and pr(th+x) on [tr.lo - x, tr.hi - x]
            const double a = std::max(supp.lo, tr.lo - x);
            const double b = std::min(supp.hi - x, tr.hi);
            if (!(b > a)) return 0.0;
            auto f = [&](double th) {
                const double p = pe(th, th + x);
                if (p == 0.0) return 0.0;
                return (prior.pdf(th) + prior.pdf(th + x)) * p;
            };
            return integrate_1d(f, a, b, inner_tol).value;
        };
        // doubling x-segments until the running contribution is negligible
        double acc = 0.0;
        std::uint64_t effort = 0;
        double x_lo = 0.0;
        double width = (tr.hi - tr.lo) / 8.0;
        const double x_max = std::isfinite(supp.hi - supp.lo) ? (supp.hi - supp.lo)
                                                              : 4.0 * (tr.hi - tr.lo);
        int quiet = 0;
        while (x_lo < x_max && quiet < 2) {
            const double x_hi = std::min(x_lo + width, x_max);
            const Estimate seg = integrate_1d([&](double x) { return x * inner(x); }, x_lo, x_hi,
                                              outer_tol * (x_hi - x_lo) / x_max);
            acc += seg.value;
            effort += seg.effort;
            quiet = (std::fabs(seg.value) < 1e-12 * std::max(std::fabs(acc), 1e-300)) ? quiet + 1 : 0;
            x_lo = x_hi;
            width *= 2.0;
        }
        return Estimate{0.5 * acc, outer_tol, Method::quadrature, effort, std::nullopt};
    }

    // expectation form: 1/2 < int P_e(th, tt) |tt - th| dtt >_th
    auto inner_abs = [&](double th) {
        const double a = std::max(supp.lo, tr.lo);
        const double b = std::min(supp.hi, tr.hi);
        auto f = [&](double tt) { return pe(th, tt) * std::fabs(tt - th); };
        double v = 0.0;
        if (th > a) v += integrate_1d(f, a, th, inner_tol).value;  // split the |.| kink
        if (b > th) v += integrate_1d(f, th, b, inner_tol).value;
        return v;
    };

    const Method method =
        (choice == MethodChoice::monte_carlo) ? Method::monte_carlo : Method::quadrature;
    if (method == Method::monte_carlo) {
        const Estimate e = mc_mean([&](SplitRng& rng) { return prior.draw(rng); },
                                   [&](double th) { return inner_abs(th); },
                                   std::min<std::size_t>(opt.mc_samples, 20'000), opt.seed);
        return Estimate{0.5 * e.value, 0.5 * e.std_error, Method::monte_carlo, e.effort, e.seed};
    }

    const Estimate outer = expect_prior(prior, inner_abs, outer_tol, opt.trunc_mass);
    return Estimate{0.5 * outer.value, outer_tol, Method::quadrature, outer.effort, std::nullopt};
}

enum class BoundKind { crb, van_trees, ziv_zakai_standard, ziv_zakai_expectation };

inline const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::crb: return "crb";
        case BoundKind::van_trees: return "van_trees";
        case BoundKind::ziv_zakai_standard: return "ziv_zakai_standard";
        case BoundKind::ziv_zakai_expectation: return "ziv_zakai_expectation";
    }
    return "?";
}

/// An estimator error metric against one lower bound.
struct BoundReport {
    BoundKind bound_kind = BoundKind::van_trees;
    Estimate emse;  // variance at fixed theta for the crb, EMSE otherwise
    Estimate bound_value;
    bool satisfied = false;
    double slack = 0.0;
    Method method = Method::quadrature;
    std::optional<std::uint64_t> seed{};
};

/// Evaluate bound vs. error metric. The crb path takes a fixed theta,
/// verifies unbiasedness there (within 3 standard errors) and compares the
/// estimator variance against 1/F(theta); the Bayesian bounds compare the
/// EMSE against 1/F or the detection-error bound.
inline BoundReport bound_report(const Model& model, const Prior& prior, Estimator estimator,
                                BoundKind kind, MethodChoice choice, const NumericsOptions& opt = {},
                                std::optional<double> theta_for_crb = std::nullopt) {
    BoundReport rep;
    rep.bound_kind = kind;

    if (kind == BoundKind::crb) {
        if (!theta_for_crb) throw ConfigError("task.theta", "crb needs a fixed theta");
        const double theta = *theta_for_crb;
        model.check_theta(theta);
        const detail::EstimatorFn theta_hat(model, prior, estimator, opt);

        // sample moments of theta-hat at fixed theta
        const std::size_t n = opt.mc_samples;
        SplitRng rng(opt.seed, 0xC0);
        double mean = 0.0, m2 = 0.0, m4 = 0.0;
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = theta_hat(model.draw(rng, theta));
            mean += vals[i];
        }
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = vals[i] - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        const double var = m2 / static_cast<double>(n - 1);
        m4 /= static_cast<double>(n);
        const double se_mean = std::sqrt(var / static_cast<double>(n));
        const double bias = mean - theta;
        if (std::fabs(bias) > 3.0 * se_mean)
            throw PreconditionError("crb requires an unbiased estimator; measured bias " +
                                    std::to_string(bias) + " at theta " + std::to_string(theta) +
                                    " exceeds 3 x " + std::to_string(se_mean));
        const double se_var =
            std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(n));
        rep.emse = Estimate{var, se_var, Method::monte_carlo, n, opt.seed};
        rep.bound_value = closed_form_estimate(1.0 / model.fisher_closed_form(theta));
        rep.method = Method::monte_carlo;
        rep.seed = opt.seed;
    } else if (kind == BoundKind::van_trees) {
        rep.emse = emse(model, prior, estimator, choice, opt);
        const FisherResult fb =
            bayesian_fi(model, prior, BfiForm::conditional_form,
                        choice == MethodChoice::monte_carlo ? MethodChoice::monte_carlo
                                                            : MethodChoice::quadrature,
                        opt);
        const double f = fb.value.value;
        rep.bound_value = Estimate{1.0 / f, fb.value.std_error / (f * f), fb.value.method,
                                   fb.value.effort, fb.value.seed};
        rep.method = rep.emse.method;
        rep.seed = rep.emse.seed;
    } else {
        rep.emse = emse(model, prior, estimator, choice, opt);
        rep.bound_value = ziv_zakai(
            model, prior,
            kind == BoundKind::ziv_zakai_standard ? ZzForm::standard : ZzForm::expectation, choice,
            opt);
        rep.method = rep.emse.method;
        rep.seed = rep.emse.seed;
    }

    const double tol = 3.0 * (rep.emse.std_error + rep.bound_value.std_error) + 1e-9;
    rep.slack = rep.emse.value - rep.bound_value.value;
    rep.satisfied = rep.slack >= -tol;
    return rep;
}

}  // namespace fomlab
