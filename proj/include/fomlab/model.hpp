#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/quadrature.hpp"
#include "fomlab/rng.hpp"

namespace fomlab {

enum class ModelFamily { gaussian_location, gaussian_scale, poisson_rate, gaussian_location_vector };

inline const char* to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::gaussian_location: return "gaussian_location";
        case ModelFamily::gaussian_scale: return "gaussian_scale";
        case ModelFamily::poisson_rate: return "poisson_rate";
        case ModelFamily::gaussian_location_vector: return "gaussian_location_vector";
    }
    return "?";
}

/// Log-density value and its parameter derivatives at one (g, theta).
///
/// lr_d1 / lr_d2 are the first and second derivatives of the likelihood
/// ratio g -> pr(g|theta~)/pr(g|theta) in theta~ at theta~ = theta, i.e.
/// pr'/pr and pr''/pr; they satisfy lr_d1 = score and
/// lr_d2 = curvature + score^2.
struct ModelDerivatives {
    double log_pdf = 0.0;
    double score = 0.0;
    double curvature = 0.0;
    double lr_d1 = 0.0;
    double lr_d2 = 0.0;
};

/// Certified truncation of the data space for expectations under g|theta.
struct DataDomain {
    bool discrete = false;
    double lo = 0.0;
    double hi = 0.0;
    long count_hi = 0;  // inclusive upper count for discrete families
};

// ---- Poisson pmf helpers (recurrence around the mode, safe for any rate) ----

inline double poisson_log_pmf(long g, double lambda) {
    if (g < 0) return -std::numeric_limits<double>::infinity();
    return g * std::log(lambda) - lambda - std::lgamma(static_cast<double>(g) + 1.0);
}

/// P(G <= k) for G ~ Poisson(lambda); sums the smaller of the two tails.
inline double poisson_cdf(long k, double lambda) {
    if (k < 0) return 0.0;
    const long mode = static_cast<long>(lambda);
    if (k >= mode) {
        // sum upper tail k+1.. and subtract
        double term = std::exp(poisson_log_pmf(k + 1, lambda));
        double tail = 0.0;
        long g = k + 1;
        while (term > tail * 1e-18 + 1e-300) {
            tail += term;
            ++g;
            term *= lambda / static_cast<double>(g);
        }
        return 1.0 - tail;
    }
    double term = std::exp(poisson_log_pmf(k, lambda));
    double cdf = 0.0;
    for (long g = k; g >= 0; --g) {
        cdf += term;
        term *= static_cast<double>(g) / lambda;
        if (term < cdf * 1e-18 + 1e-300) break;
    }
    return cdf;
}

inline double poisson_sf(long k, double lambda) {
    if (k < 0) return 1.0;
    const long mode = static_cast<long>(lambda);
    if (k >= mode) {
        double term = std::exp(poisson_log_pmf(k + 1, lambda));
        double tail = 0.0;
        long g = k + 1;
        while (term > tail * 1e-18 + 1e-300) {
            tail += term;
            ++g;
            term *= lambda / static_cast<double>(g);
        }
        return tail;
    }
    return 1.0 - poisson_cdf(k, lambda);
}

/// Parametric data model pr(g|theta) with exact derivatives and a sampler.
/// Immutable; all operations are pure and reentrant.
class Model {
  public:
    static Model gaussian_location(double sigma) {
        if (!(sigma > 0.0)) throw ConfigError("model.sigma", "gaussian_location: sigma must be positive");
        return Model(ModelFamily::gaussian_location, sigma, 1);
    }
    static Model gaussian_scale() { return Model(ModelFamily::gaussian_scale, 0.0, 1); }
    static Model poisson_rate() { return Model(ModelFamily::poisson_rate, 0.0, 1); }
    static Model gaussian_location_vector(double sigma, int dim) {
        if (!(sigma > 0.0)) throw ConfigError("model.sigma", "gaussian_location_vector: sigma must be positive");
        if (dim < 2) throw ConfigError("model.dim", "gaussian_location_vector: dim must be >= 2");
        return Model(ModelFamily::gaussian_location_vector, sigma, dim);
    }

    ModelFamily family() const { return family_; }
    int param_dim() const { return dim_; }
    int data_dim() const { return dim_; }
    double sigma() const { return sigma_; }
    bool discrete_data() const { return family_ == ModelFamily::poisson_rate; }

    void check_theta(double theta) const {
        if (!std::isfinite(theta)) throw DomainError("theta must be finite");
        if ((family_ == ModelFamily::poisson_rate || family_ == ModelFamily::gaussian_scale) && !(theta > 0.0))
            throw DomainError(std::string(to_string(family_)) + ": theta must be positive, got " +
                              std::to_string(theta));
    }

    double log_pdf(double g, double theta) const {
        check_theta(theta);
        check_scalar();
        switch (family_) {
            case ModelFamily::gaussian_location: {
                const double z = (g - theta) / sigma_;
                return -0.5 * z * z - 0.9189385332046727 - std::log(sigma_);
            }
            case ModelFamily::gaussian_scale: {
                const double z = g / theta;
                return -0.5 * z * z - 0.9189385332046727 - std::log(theta);
            }
            case ModelFamily::poisson_rate: {
                return poisson_log_pmf(check_count(g), theta);
            }
            default: return 0.0;  // unreachable
        }
    }

    ModelDerivatives derivatives(double g, double theta) const {
        check_theta(theta);
        check_scalar();
        ModelDerivatives d;
        d.log_pdf = log_pdf(g, theta);
        switch (family_) {
            case ModelFamily::gaussian_location:
                d.score = (g - theta) / (sigma_ * sigma_);
                d.curvature = -1.0 / (sigma_ * sigma_);
                break;
            case ModelFamily::gaussian_scale:
                d.score = -1.0 / theta + g * g / (theta * theta * theta);
                d.curvature = 1.0 / (theta * theta) - 3.0 * g * g / (theta * theta * theta * theta);
                break;
            case ModelFamily::poisson_rate: {
                const double gc = static_cast<double>(check_count(g));
                d.score = gc / theta - 1.0;
                d.curvature = -gc / (theta * theta);
                break;
            }
            default: break;
        }
        d.lr_d1 = d.score;
        d.lr_d2 = d.curvature + d.score * d.score;
        return d;
    }

    double draw(SplitRng& rng, double theta) const {
        check_scalar();
        switch (family_) {
            case ModelFamily::gaussian_location: return theta + sigma_ * rng.next_normal();
            case ModelFamily::gaussian_scale: return theta * rng.next_normal();
            case ModelFamily::poisson_rate: return static_cast<double>(rng.next_poisson(theta));
            default: return 0.0;
        }
    }

    std::vector<double> sample(double theta, std::size_t n, std::uint64_t seed) const {
        if (n < 1) throw DomainError("sample: n must be >= 1");
        check_theta(theta);
        check_scalar();
        SplitRng rng(seed, 0);
        std::vector<double> out(n);
        for (auto& v : out) v = draw(rng, theta);
        return out;
    }

    /// 1/sigma^2, 2/theta^2 or 1/theta.
    double fisher_closed_form(double theta) const {
        check_theta(theta);
        switch (family_) {
            case ModelFamily::gaussian_location: return 1.0 / (sigma_ * sigma_);
            case ModelFamily::gaussian_scale: return 2.0 / (theta * theta);
            case ModelFamily::poisson_rate: return 1.0 / theta;
            case ModelFamily::gaussian_location_vector:
                throw PreconditionError("fisher_closed_form: vector family has a matrix FI");
        }
        return 0.0;
    }

    /// Truncated data range certified to carry all but <= ~1e-25 (continuous)
    /// or <= 1e-12 (counts, checked via a geometric tail bound) of the mass.
    DataDomain data_domain(double theta) const {
        check_theta(theta);
        check_scalar();
        DataDomain d;
        switch (family_) {
            case ModelFamily::gaussian_location:
                d.lo = theta - 12.0 * sigma_;
                d.hi = theta + 12.0 * sigma_;
                break;
            case ModelFamily::gaussian_scale:
                d.lo = -12.0 * theta;
                d.hi = 12.0 * theta;
                break;
            case ModelFamily::poisson_rate: {
                d.discrete = true;
                long k = static_cast<long>(std::ceil(theta + 40.0 * std::sqrt(theta))) + 4;
                // geometric bound on P(G > k): pmf(k+1) / (1 - theta/(k+2))
                for (;;) {
                    const double ratio = theta / static_cast<double>(k + 2);
                    const double bound = std::exp(poisson_log_pmf(k + 1, theta)) / (1.0 - ratio);
                    if (bound <= 1e-12) break;
                    k += k / 4 + 8;
                    if (k > 100'000'000)
                        throw ConvergenceError("poisson data_domain: truncation did not certify", 0.0);
                }
                d.count_hi = k;
                d.lo = 0.0;
                d.hi = static_cast<double>(k);
                break;
            }
            default: break;
        }
        return d;
    }

    // ---- vector family (isotropic Gaussian location) ----

    double log_pdf_vec(std::span<const double> g, std::span<const double> theta) const {
        check_vector(g.size(), theta.size());
        double q = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double z = (g[i] - theta[i]) / sigma_;
            q += z * z;
        }
        return -0.5 * q - dim_ * (0.9189385332046727 + std::log(sigma_));
    }

    void score_vec(std::span<const double> g, std::span<const double> theta,
                   std::span<double> out) const {
        check_vector(g.size(), theta.size());
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = (g[i] - theta[i]) / (sigma_ * sigma_);
    }

    std::vector<double> draw_vec(SplitRng& rng, std::span<const double> theta) const {
        check_vector(theta.size(), theta.size());
        std::vector<double> g(theta.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = theta[i] + sigma_ * rng.next_normal();
        return g;
    }

  private:
    Model(ModelFamily f, double sigma, int dim) : family_(f), sigma_(sigma), dim_(dim) {}

    void check_scalar() const {
        if (family_ == ModelFamily::gaussian_location_vector)
            throw PreconditionError("scalar operation on vector family; use the *_vec interface");
    }
    void check_vector(std::size_t gn, std::size_t tn) const {
        if (family_ != ModelFamily::gaussian_location_vector)
            throw PreconditionError("vector operation on scalar family");
        if (gn != static_cast<std::size_t>(dim_) || tn != static_cast<std::size_t>(dim_))
            throw ConfigError("model.dim", "vector length does not match model dim");
    }
    long check_count(double g) const {
        const double r = std::nearbyint(g);
        if (!(std::fabs(g - r) < 1e-9) || r < 0.0)
            throw DomainError("poisson_rate: data point must be a count >= 0, got " + std::to_string(g));
        return static_cast<long>(r);
    }

    ModelFamily family_;
    double sigma_;
    int dim_;
};

/// Expectation of f(g) under g|theta: quadrature over the certified domain
/// for continuous families, exact truncated summation for counts.
template <class F>
inline Estimate expect_data(const Model& model, double theta, F&& f, double tol) {
    const DataDomain dom = model.data_domain(theta);
    if (!dom.discrete) {
        auto integrand = [&](double g) { return std::exp(model.log_pdf(g, theta)) * f(g); };
        return integrate_1d(integrand, dom.lo, dom.hi, tol);
    }
    double acc = 0.0;
    for (long g = 0; g <= dom.count_hi; ++g)
        acc += std::exp(poisson_log_pmf(g, theta)) * f(static_cast<double>(g));
    return Estimate{acc, tol, Method::quadrature, static_cast<std::uint64_t>(dom.count_hi + 1),
                    std::nullopt};
}

}  // namespace fomlab
