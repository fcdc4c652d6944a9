#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fomlab/fisher.hpp"
#include "oracles.hpp"

using namespace fomlab;

TEST_CASE("pointwise information matches the closed forms", "[fisher]") {
    const Model loc = Model::gaussian_location(2.0);
    const Model scale = Model::gaussian_scale();
    const Model pois = Model::poisson_rate();

    for (const double theta : {0.5, 1.0, 2.0, 3.5, 7.0}) {
        const double exact_loc = 0.25;
        CHECK(std::fabs(fisher_scalar(loc, theta, MethodChoice::quadrature).value.value -
                        exact_loc) < 1e-8 * exact_loc);
        const double exact_scale = 2.0 / (theta * theta);
        CHECK(std::fabs(fisher_scalar(scale, theta, MethodChoice::quadrature).value.value -
                        exact_scale) < 1e-8 * exact_scale);
        const double exact_pois = 1.0 / theta;
        CHECK(std::fabs(fisher_scalar(pois, theta, MethodChoice::quadrature).value.value -
                        exact_pois) < 1e-8 * exact_pois);
    }
}

TEST_CASE("pointwise information by monte carlo", "[fisher]") {
    const Model loc = Model::gaussian_location(1.0);
    NumericsOptions opt;
    opt.mc_samples = 1'000'000;
    opt.seed = 404;
    const FisherResult mc = fisher_scalar(loc, 0.0, MethodChoice::monte_carlo, opt);
    CHECK(std::fabs(mc.value.value - 1.0) <= 3.0 * mc.value.std_error);
    CHECK(mc.value.method == Method::monte_carlo);
    CHECK(mc.value.seed == opt.seed);

    const Model pois = Model::poisson_rate();
    const FisherResult pmc = fisher_scalar(pois, 2.0, MethodChoice::monte_carlo, opt);
    CHECK(std::fabs(pmc.value.value - 0.5) <= 3.0 * pmc.value.std_error);
}

TEST_CASE("prior-averaged information: conjugate pair equals 2", "[fisher]") {
    const Model m = Model::gaussian_location(1.0);
    const Prior p = Prior::gaussian(0.0, 1.0);
    NumericsOptions opt;

    const FisherResult closed =
        bayesian_fi(m, p, BfiForm::conditional_form, MethodChoice::closed_form, opt);
    CHECK(closed.value.value == 2.0);

    const FisherResult cond =
        bayesian_fi(m, p, BfiForm::conditional_form, MethodChoice::quadrature, opt);
    CHECK(std::fabs(cond.value.value - 2.0) < 1e-8);

    const FisherResult post =
        bayesian_fi(m, p, BfiForm::posterior_form, MethodChoice::quadrature, opt);
    CHECK(std::fabs(post.value.value - 2.0) < 1e-6);
    CHECK(std::fabs(cond.value.value - post.value.value) < 1e-6);
}

TEST_CASE("both averaged forms agree by monte carlo on every pair", "[fisher]") {
    NumericsOptions opt;
    opt.mc_samples = 400'000;
    opt.seed = 17;
    const std::vector<std::pair<Model, Prior>> zoo = {
        {Model::gaussian_location(1.0), Prior::gaussian(0.0, 1.0)},
        {Model::gaussian_location(1.0), Prior::cosine_bump(0.0, 2.0)},
        {Model::poisson_rate(), Prior::lognormal(0.5, 0.5)},
        {Model::gaussian_scale(), Prior::lognormal(0.0, 0.5)},
    };
    for (const auto& [m, p] : zoo) {
        const FisherResult cond = bayesian_fi(m, p, BfiForm::conditional_form,
                                              MethodChoice::monte_carlo, opt);
        const FisherResult post =
            bayesian_fi(m, p, BfiForm::posterior_form, MethodChoice::monte_carlo, opt);
        const double combined = std::hypot(cond.value.std_error, post.value.std_error);
        CHECK(std::fabs(cond.value.value - post.value.value) <= 3.0 * combined);

        // the prior term is nonnegative, so the average can only grow
        const Estimate mean_f = expect_prior(
            p, [&, model = m](double th) { return model.fisher_closed_form(th); }, 1e-9);
        CHECK(cond.value.value + 3.0 * cond.value.std_error >= mean_f.value);
    }
}

TEST_CASE("poisson with lognormal prior has a pinned averaged information", "[fisher]") {
    // <1/theta> + <(pr'/pr)^2> = e^0.5 + 2 e^2, the latter confirmed by an
    // independent quadrature of the prior score
    const Model m = Model::poisson_rate();
    const Prior p = Prior::lognormal(0.0, 1.0);
    const double expected = oracle::kExpHalf + oracle::kLognormalScoreSq;

    const FisherResult closed =
        bayesian_fi(m, p, BfiForm::conditional_form, MethodChoice::closed_form);
    CHECK(std::fabs(closed.value.value - expected) < 1e-10);

    const FisherResult quad =
        bayesian_fi(m, p, BfiForm::conditional_form, MethodChoice::quadrature);
    CHECK(std::fabs(quad.value.value - expected) < 1e-6);
}

TEST_CASE("vector information matrix for the isotropic pair", "[fisher]") {
    const Model vec = Model::gaussian_location_vector(1.0, 2);
    const std::vector<Prior> priors = {Prior::gaussian(0.0, 1.0), Prior::gaussian(0.0, 1.0)};
    const FisherResult r = bayesian_fim(vec, priors, MethodChoice::quadrature);
    REQUIRE(r.matrix.has_value());
    const Matrix& f = *r.matrix;
    CHECK(std::fabs(f.at(0, 0) - 2.0) < 1e-8);
    CHECK(std::fabs(f.at(1, 1) - 2.0) < 1e-8);
    CHECK(std::fabs(f.at(0, 1)) < 1e-8);
    CHECK(f.max_asymmetry() < 1e-12);

    const std::vector<double> u1 = {1.0, 0.0};
    const std::vector<double> u2 = {M_SQRT1_2, M_SQRT1_2};
    CHECK(std::fabs(f.quad_form(u1) - 2.0) < 1e-8);
    CHECK(std::fabs(f.quad_form(u2) - 2.0) < 1e-8);

    for (const double ev : symmetric_eigenvalues(f)) CHECK(ev >= -1e-10);
}

TEST_CASE("wide priors reduce the matrix to the data information", "[fisher]") {
    const Model vec = Model::gaussian_location_vector(1.0, 2);
    const std::vector<Prior> wide = {Prior::gaussian(0.0, 1e3), Prior::gaussian(0.0, 1e3)};
    const FisherResult r = bayesian_fim(vec, wide, MethodChoice::quadrature);
    CHECK(std::fabs(r.matrix->at(0, 0) - 1.0) < 1e-5);
    CHECK(std::fabs(r.matrix->at(1, 1) - 1.0) < 1e-5);
}

TEST_CASE("monte carlo matrix stays symmetric positive semidefinite", "[fisher]") {
    const Model vec = Model::gaussian_location_vector(1.0, 2);
    const std::vector<Prior> priors = {Prior::gaussian(0.0, 1.0), Prior::gaussian(0.5, 2.0)};
    NumericsOptions opt;
    opt.mc_samples = 100'000;
    opt.seed = 55;
    const FisherResult r = bayesian_fim(vec, priors, MethodChoice::monte_carlo, opt);
    CHECK(r.matrix->max_asymmetry() < 1e-12);
    for (const double ev : symmetric_eigenvalues(*r.matrix)) CHECK(ev >= -1e-10);

    SplitRng rng(1, 2);
    for (int trial = 0; trial < 16; ++trial) {
        const double phi = 2.0 * M_PI * rng.next_uniform();
        const std::vector<double> u = {std::cos(phi), std::sin(phi)};
        CHECK(r.matrix->quad_form(u) >= 0.0);
    }
}

TEST_CASE("dimension mismatches are configuration errors", "[fisher]") {
    const Model vec = Model::gaussian_location_vector(1.0, 2);
    const std::vector<Prior> one = {Prior::gaussian(0.0, 1.0)};
    CHECK_THROWS_AS(bayesian_fim(vec, one, MethodChoice::quadrature), ConfigError);
    CHECK_THROWS_AS(bayesian_fim(Model::gaussian_location(1.0), one, MethodChoice::quadrature),
                    ConfigError);
}
