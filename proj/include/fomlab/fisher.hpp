#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/matrix.hpp"
#include "fomlab/model.hpp"
#include "fomlab/monte_carlo.hpp"
#include "fomlab/prior.hpp"
#include "fomlab/quadrature.hpp"

namespace fomlab {

/// Which expression of the prior-averaged information was evaluated:
/// conditional_form averages the data information and adds the prior's own
/// term; posterior_form averages the squared log-posterior slope over the
/// joint distribution of (g, theta). Both estimate the same number.
enum class BfiForm { conditional_form, posterior_form };

inline const char* to_string(BfiForm f) {
    return f == BfiForm::conditional_form ? "conditional_form" : "posterior_form";
}

struct FisherResult {
    Estimate value;                  // scalar information
    std::optional<Matrix> matrix{};  // set for the vector family
    std::optional<BfiForm> form{};   // set for prior-averaged results
    std::optional<double> theta{};   // set for pointwise F(theta)
};

namespace detail {
inline Method resolve(MethodChoice choice, bool closed_available, bool quad_available) {
    switch (choice) {
        case MethodChoice::closed_form:
            if (!closed_available) throw ConfigError("method", "closed_form not available here");
            return Method::closed_form;
        case MethodChoice::quadrature:
            if (!quad_available) throw ConfigError("method", "quadrature not available here");
            return Method::quadrature;
        case MethodChoice::monte_carlo: return Method::monte_carlo;
        case MethodChoice::automatic:
            if (closed_available) return Method::closed_form;
            if (quad_available) return Method::quadrature;
            return Method::monte_carlo;
    }
    return Method::monte_carlo;
}
}  // namespace detail

/// Pointwise data information F(theta) = <score^2>_{g|theta}.
inline FisherResult fisher_scalar(const Model& model, double theta, MethodChoice choice,
                                  const NumericsOptions& opt = {}) {
    model.check_theta(theta);
    const Method method = detail::resolve(choice, true, true);
    FisherResult r;
    r.theta = theta;
    switch (method) {
        case Method::closed_form:
            r.value = closed_form_estimate(model.fisher_closed_form(theta));
            break;
        case Method::quadrature:
            r.value = expect_data(
                model, theta,
                [&](double g) {
                    const double s = model.derivatives(g, theta).score;
                    return s * s;
                },
                opt.quad_tol);
            break;
        case Method::monte_carlo:
            r.value = mc_mean([&](SplitRng& rng) { return model.draw(rng, theta); },
                              [&](double g) {
                                  const double s = model.derivatives(g, theta).score;
                                  return s * s;
                              },
                              opt.mc_samples, opt.seed);
            break;
    }
    return r;
}

namespace detail {

/// <F(theta)>_theta in closed form where the moment is known.
inline std::optional<double> mean_data_info_closed(const Model& model, const Prior& prior) {
    if (model.family() == ModelFamily::gaussian_location)
        return 1.0 / (model.sigma() * model.sigma());
    if (model.family() == ModelFamily::poisson_rate && prior.family() == PriorFamily::lognormal) {
        // <1/theta> for lognormal(mu, s) is exp(s^2/2 - mu)
        const double mu = prior.param0(), s = prior.param1();
        return std::exp(0.5 * s * s - mu);
    }
    return std::nullopt;
}

/// Truncation deficit for prior-score moment integrals. The squared score
/// grows exponentially against the log-space prior (lognormal worst case),
/// so the weighted integrand keeps meaningful mass far past the cut that
/// suffices for bounded integrands.
inline double score_trunc(const NumericsOptions& opt) {
    return std::max(opt.trunc_mass * 1e-12, 1e-28);
}

/// <(pr'/pr)^2>_theta in closed form.
inline std::optional<double> prior_info_closed(const Prior& prior) {
    switch (prior.family()) {
        case PriorFamily::gaussian: {
            const double sd = prior.param1();
            return 1.0 / (sd * sd);
        }
        case PriorFamily::cosine_bump: {
            const double w = prior.param1();
            return M_PI * M_PI / (w * w);
        }
        case PriorFamily::lognormal: {
            const double mu = prior.param0(), s = prior.param1();
            return std::exp(2.0 * s * s - 2.0 * mu) * (1.0 + 1.0 / (s * s));
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Prior-averaged (Bayesian) information.
///
/// conditional_form: <F(theta)>_theta + <(pr'/pr)^2>_theta.
/// posterior_form:   <<(d/dtheta log posterior)^2>_{g|theta}>_theta, the
/// joint average of the squared posterior log-slope. Their agreement is a
/// numerical check that the score has zero conditional mean.
inline FisherResult bayesian_fi(const Model& model, const Prior& prior, BfiForm form,
                                MethodChoice choice, const NumericsOptions& opt = {}) {
    const bool closed_ok = form == BfiForm::conditional_form &&
                           detail::mean_data_info_closed(model, prior).has_value() &&
                           detail::prior_info_closed(prior).has_value();
    const Method method = detail::resolve(choice, closed_ok, true);
    FisherResult r;
    r.form = form;

    if (method == Method::closed_form) {
        r.value = closed_form_estimate(*detail::mean_data_info_closed(model, prior) +
                                       *detail::prior_info_closed(prior));
        return r;
    }

    if (form == BfiForm::conditional_form) {
        if (method == Method::quadrature) {
            const Estimate data_part = expect_prior(
                prior,
                [&](double th) {
                    return fisher_scalar(model, th, MethodChoice::quadrature, opt).value.value;
                },
                opt.quad_tol, opt.trunc_mass);
            const Estimate prior_part = expect_prior(
                prior,
                [&](double th) {
                    const double s = prior.derivatives(th).score;
                    return s * s;
                },
                opt.quad_tol, detail::score_trunc(opt));
            r.value = Estimate{data_part.value + prior_part.value,
                               data_part.std_error + prior_part.std_error, Method::quadrature,
                               data_part.effort + prior_part.effort, std::nullopt};
        } else {
            r.value = mc_mean([&](SplitRng& rng) { return prior.draw(rng); },
                              [&](double th) {
                                  const double sp = prior.derivatives(th).score;
                                  return model.fisher_closed_form(th) + sp * sp;
                              },
                              opt.mc_samples, opt.seed);
        }
        return r;
    }

    // posterior_form: joint average of (model score + prior score)^2
    auto posterior_slope_sq = [&](double g, double th) {
        const double s = model.derivatives(g, th).score + prior.derivatives(th).score;
        return s * s;
    };
    if (method == Method::quadrature) {
        r.value = expect_prior(
            prior,
            [&](double th) {
                return expect_data(
                           model, th, [&](double g) { return posterior_slope_sq(g, th); },
                           opt.quad_tol * 0.1)
                    .value;
            },
            opt.quad_tol, detail::score_trunc(opt));
    } else {
        r.value = mc_mean(
            [&](SplitRng& rng) {
                const double th = prior.draw(rng);
                return std::pair<double, double>(model.draw(rng, th), th);
            },
            [&](const std::pair<double, double>& gt) { return posterior_slope_sq(gt.first, gt.second); },
            opt.mc_samples, opt.seed);
    }
    return r;
}

/// Prior-averaged information matrix for the vector family with a
/// per-component product prior: <FIM(theta)>_theta + <s s^T>_theta where
/// s = grad log prior. Independence across components reduces every entry
/// to one-dimensional integrals.
inline FisherResult bayesian_fim(const Model& model, const std::vector<Prior>& priors,
                                 MethodChoice choice, const NumericsOptions& opt = {}) {
    if (model.family() != ModelFamily::gaussian_location_vector)
        throw ConfigError("model.family", "bayesian_fim needs the vector family");
    const std::size_t d = static_cast<std::size_t>(model.param_dim());
    if (priors.size() != d)
        throw ConfigError("prior", "bayesian_fim: need one prior per component (" +
                                       std::to_string(d) + ")");
    const Method method = detail::resolve(choice, false, true);

    Matrix fim(d);
    const double data_diag = 1.0 / (model.sigma() * model.sigma());
    std::uint64_t effort = 0;
    double err = 0.0;

    if (method == Method::quadrature) {
        std::vector<double> mean_score(d), mean_score_sq(d);
        for (std::size_t i = 0; i < d; ++i) {
            const Estimate m1 = expect_prior(
                priors[i], [&](double th) { return priors[i].derivatives(th).score; }, opt.quad_tol,
                detail::score_trunc(opt));
            const Estimate m2 = expect_prior(
                priors[i],
                [&](double th) {
                    const double s = priors[i].derivatives(th).score;
                    return s * s;
                },
                opt.quad_tol, detail::score_trunc(opt));
            mean_score[i] = m1.value;
            mean_score_sq[i] = m2.value;
            effort += m1.effort + m2.effort;
            err += m1.std_error + m2.std_error;
        }
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                const double prior_term =
                    (i == j) ? mean_score_sq[i] : mean_score[i] * mean_score[j];
                fim.at(i, j) = (i == j ? data_diag : 0.0) + prior_term;
            }
        }
    } else {
        // joint MC of the outer product of the posterior log-slope
        const std::uint64_t n = opt.mc_samples;
        std::vector<double> acc(d * d, 0.0);
        SplitRng rng(opt.seed, 0);
        std::vector<double> theta(d), sm(d), s(d);
        for (std::uint64_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < d; ++i) theta[i] = priors[i].draw(rng);
            const std::vector<double> g = model.draw_vec(rng, theta);
            model.score_vec(g, theta, sm);
            for (std::size_t i = 0; i < d; ++i) s[i] = sm[i] + priors[i].derivatives(theta[i]).score;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) acc[i * d + j] += s[i] * s[j];
        }
        for (std::size_t i = 0; i < d * d; ++i) fim.a[i] = acc[i] / static_cast<double>(n);
        effort = n;
        err = 1.0 / std::sqrt(static_cast<double>(n));  // crude scale for the matrix entries
    }

    FisherResult r;
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += fim.at(i, i);
    r.value = Estimate{trace / static_cast<double>(d), err, method, effort,
                       method == Method::monte_carlo ? std::optional<std::uint64_t>(opt.seed)
                                                     : std::nullopt};
    r.matrix = std::move(fim);
    return r;
}

}  // namespace fomlab
