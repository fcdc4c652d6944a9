#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fomlab/bounds.hpp"
#include "fomlab/report.hpp"
#include "oracles.hpp"

using namespace fomlab;

namespace {
const Model kLoc = Model::gaussian_location(1.0);
const Model kPois = Model::poisson_rate();
const Prior kConj = Prior::gaussian(0.0, 1.0);
}  // namespace

TEST_CASE("posterior statistics for the conjugate pair", "[bounds]") {
    const Posterior p1 = posterior_stats(kLoc, kConj, 1.0);
    CHECK(std::fabs(p1.mean - 0.5) < 1e-8);
    CHECK(std::fabs(p1.variance() - 0.5) < 1e-8);
    CHECK(p1.evidence.value > 0.0);
    // evidence of the conjugate pair is N(0, 2) evaluated at g
    CHECK(std::fabs(p1.log_evidence - std::log(oracle::normal_pdf(1.0, 0.0, std::sqrt(2.0)))) < 1e-8);

    const Posterior p0 = posterior_stats(kLoc, kConj, 0.0);
    CHECK(std::fabs(p0.mean) < 1e-9);

    // log_posterior integrates to one against theta
    const Interval t = kConj.truncation(1e-12);
    const Estimate mass = integrate_1d(
        [&](double th) { return std::exp(log_posterior(kLoc, kConj, p1, th)); }, t.lo, t.hi, 1e-10);
    CHECK(std::fabs(mass.value - 1.0) < 1e-8);
}

TEST_CASE("posterior normalization for a count model", "[bounds]") {
    const Prior logn = Prior::lognormal(0.0, 1.0);
    const Posterior p = posterior_stats(kPois, logn, 3.0);
    const Interval t = logn.truncation(1e-12);
    const Estimate mass = integrate_1d(
        [&](double th) { return std::exp(log_posterior(kPois, logn, p, th)); }, t.lo, t.hi, 1e-10);
    CHECK(std::fabs(mass.value - 1.0) < 1e-8);
    CHECK(p.mean > 0.0);
}

TEST_CASE("incompatible data reports an evidence underflow", "[bounds]") {
    const Prior tight = Prior::gaussian(0.0, 1e-3);
    CHECK_THROWS_AS(posterior_stats(kLoc, tight, 60.0), DataError);
}

TEST_CASE("ensemble error of the conjugate estimators", "[bounds]") {
    const Estimate mmse = emse(kLoc, kConj, Estimator::posterior_mean, MethodChoice::quadrature);
    CHECK(std::fabs(mmse.value - 0.5) < 1e-6);

    const Estimate mle = emse(kLoc, kConj, Estimator::mle, MethodChoice::quadrature);
    CHECK(std::fabs(mle.value - 1.0) < 1e-6);
    CHECK(mmse.value <= mle.value);

    // concentrated prior drives the posterior-mean error to zero
    const Prior tight = Prior::gaussian(0.4, 1e-3);
    const Estimate small = emse(kLoc, tight, Estimator::posterior_mean, MethodChoice::quadrature);
    CHECK(small.value <= 1e-6);
}

TEST_CASE("posterior mean never loses to the mle in ensemble error", "[bounds]") {
    const Prior logn = Prior::lognormal(0.3, 0.5);
    const Estimate pm = emse(kPois, logn, Estimator::posterior_mean, MethodChoice::quadrature);
    const Estimate ml = emse(kPois, logn, Estimator::mle, MethodChoice::quadrature);
    CHECK(pm.value <= ml.value + 1e-9);
}

TEST_CASE("monte carlo ensemble error agrees with quadrature", "[bounds]") {
    NumericsOptions opt;
    opt.mc_samples = 200'000;
    opt.seed = 21;
    const Estimate mc = emse(kLoc, kConj, Estimator::mle, MethodChoice::monte_carlo, opt);
    CHECK(std::fabs(mc.value - 1.0) <= 3.0 * mc.std_error);
}

TEST_CASE("mle ships only for location and rate families", "[bounds]") {
    CHECK_THROWS_AS(
        emse(Model::gaussian_scale(), Prior::lognormal(0.0, 0.5), Estimator::mle,
             MethodChoice::quadrature),
        PreconditionError);
}

TEST_CASE("fixed-theta bound: efficient estimators attain it", "[bounds]") {
    NumericsOptions opt;
    opt.mc_samples = 400'000;
    opt.seed = 3;
    const BoundReport r = bound_report(kLoc, kConj, Estimator::mle, BoundKind::crb,
                                       MethodChoice::monte_carlo, opt, 0.0);
    CHECK(r.satisfied);
    CHECK(std::fabs(r.bound_value.value - 1.0) < 1e-12);
    CHECK(std::fabs(r.emse.value - 1.0) <= 3.0 * r.emse.std_error);
    CHECK(std::fabs(r.slack) <= 3.0 * r.emse.std_error);

    const BoundReport rp = bound_report(kPois, Prior::lognormal(0.0, 0.5), Estimator::mle,
                                        BoundKind::crb, MethodChoice::monte_carlo, opt, 2.0);
    CHECK(rp.satisfied);
    CHECK(std::fabs(rp.bound_value.value - 2.0) < 1e-12);
    CHECK(std::fabs(rp.emse.value - 2.0) <= 3.0 * rp.emse.std_error);
}

TEST_CASE("fixed-theta bound rejects biased estimators by name", "[bounds]") {
    NumericsOptions opt;
    opt.mc_samples = 100'000;
    opt.seed = 12;
    // the posterior mean shrinks toward the prior, so at fixed theta = 1 it
    // is measurably biased
    CHECK_THROWS_MATCHES(bound_report(kLoc, kConj, Estimator::posterior_mean, BoundKind::crb,
                                      MethodChoice::monte_carlo, opt, 1.0),
                         PreconditionError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("measured bias")));
    CHECK_THROWS_AS(bound_report(kLoc, kConj, Estimator::mle, BoundKind::crb,
                                 MethodChoice::monte_carlo, opt, std::nullopt),
                    ConfigError);
}

TEST_CASE("prior-averaged bound: conjugate equality and mle slack", "[bounds]") {
    const BoundReport mmse = bound_report(kLoc, kConj, Estimator::posterior_mean,
                                          BoundKind::van_trees, MethodChoice::quadrature);
    CHECK(mmse.satisfied);
    CHECK(std::fabs(mmse.emse.value - 0.5) < 1e-6);
    CHECK(std::fabs(mmse.bound_value.value - 0.5) < 1e-6);
    CHECK(std::fabs(mmse.slack) < 1e-6);

    const BoundReport mle = bound_report(kLoc, kConj, Estimator::mle, BoundKind::van_trees,
                                         MethodChoice::quadrature);
    CHECK(mle.satisfied);
    CHECK(std::fabs(mle.slack - 0.5) < 1e-6);
}

TEST_CASE("detection-error bound: the two printed forms are the same number", "[bounds]") {
    struct Pair {
        Model m;
        Prior p;
    };
    const std::vector<Pair> pairs = {
        {Model::gaussian_location(1.0), Prior::gaussian(0.0, 1.0)},
        {Model::gaussian_location(1.0), Prior::cosine_bump(0.0, 2.0)},
        {Model::poisson_rate(), Prior::lognormal(0.0, 0.5)},
    };
    for (const auto& pr : pairs) {
        const Estimate s = ziv_zakai(pr.m, pr.p, ZzForm::standard, MethodChoice::quadrature);
        const Estimate e = ziv_zakai(pr.m, pr.p, ZzForm::expectation, MethodChoice::quadrature);
        CHECK(std::fabs(s.value - e.value) / std::fabs(s.value) < 1e-6);

        const Estimate mmse = emse(pr.m, pr.p, Estimator::posterior_mean, MethodChoice::quadrature);
        CHECK(s.value <= mmse.value + 1e-6);
    }
}

TEST_CASE("conjugate pair: detection-error bound is tight", "[bounds]") {
    const Estimate s = ziv_zakai(kLoc, kConj, ZzForm::standard, MethodChoice::quadrature);
    CHECK(std::fabs(s.value - 0.5) < 1e-6);  // equals the conjugate MMSE
}

TEST_CASE("vanishing prior width collapses the bound", "[bounds]") {
    const Prior narrow = Prior::gaussian(0.0, 1e-2);
    const Estimate s = ziv_zakai(kLoc, narrow, ZzForm::expectation, MethodChoice::quadrature);
    CHECK(s.value >= 0.0);
    CHECK(s.value <= 1e-3);
}

TEST_CASE("the expectation-form integrand is pair-symmetric", "[bounds]") {
    const Prior p = Prior::gaussian(0.2, 0.9);
    auto weighted = [&](double a, double b) {
        const DetectionTask t = DetectionTask::with_prior(p, a, b);
        return min_error_probability_closed(kLoc, t) * std::fabs(b - a);
    };
    SplitRng rng(77, 0);
    for (int i = 0; i < 30; ++i) {
        const double a = -2.0 + 4.0 * rng.next_uniform();
        const double b = -2.0 + 4.0 * rng.next_uniform();
        CHECK(std::fabs(weighted(a, b) - weighted(b, a)) < 1e-12);
    }
}

TEST_CASE("bound reports serialize with the pinned schema", "[bounds]") {
    const BoundReport r = bound_report(kLoc, kConj, Estimator::posterior_mean,
                                       BoundKind::van_trees, MethodChoice::quadrature);
    const json j = to_json(r);
    const std::vector<std::string> keys = {"bound_kind", "emse",  "bound_value", "satisfied",
                                           "slack",      "method", "seed"};
    CHECK(j.size() == keys.size());
    for (const auto& k : keys) CHECK(j.contains(k));
    CHECK(j["bound_kind"] == "van_trees");
    CHECK(j["satisfied"].is_boolean());
}
