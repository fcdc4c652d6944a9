#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fomlab/core.hpp"
#include "fomlab/rng.hpp"
#include "fomlab/special.hpp"

namespace fomlab {

enum class PriorFamily { gaussian, cosine_bump, lognormal };

inline const char* to_string(PriorFamily f) {
    switch (f) {
        case PriorFamily::gaussian: return "gaussian";
        case PriorFamily::cosine_bump: return "cosine_bump";
        case PriorFamily::lognormal: return "lognormal";
    }
    return "?";
}

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

/// Log-density, its log-derivative (pr'/pr) and the density-ratio second
/// derivative pr''/pr at one theta.
struct PriorDerivatives {
    double log_pdf = 0.0;
    double score = 0.0;     // pr'/pr
    double ratio_d2 = 0.0;  // pr''/pr = d2(log pr) + score^2
};

/// Prior odds y = pr(theta0)/pr(theta1) with the implied class priors.
struct PriorOdds {
    double y = 1.0;
    double log_y = 0.0;
    double pr0 = 0.5;
    double pr1 = 0.5;
};

/// Smooth prior pr(theta): twice continuously differentiable on the
/// interior of its support, density -> 0 at finite endpoints. These are
/// the regularity conditions the Bayesian information and van Trees
/// machinery assume; a flat prior is deliberately absent (its boundary
/// kinks break them), the cosine^2 bump is the compact-support stand-in.
class Prior {
  public:
    static Prior gaussian(double mean, double sd) {
        if (!(sd > 0.0)) throw ConfigError("prior.params", "gaussian prior: sd must be positive");
        return Prior(PriorFamily::gaussian, mean, sd);
    }
    /// pr(theta) = (1/w) cos^2(pi (theta-c) / (2w)) on [c-w, c+w].
    static Prior cosine_bump(double center, double half_width) {
        if (!(half_width > 0.0)) throw ConfigError("prior.params", "cosine_bump: half_width must be positive");
        return Prior(PriorFamily::cosine_bump, center, half_width);
    }
    static Prior lognormal(double mu, double s) {
        if (!(s > 0.0)) throw ConfigError("prior.params", "lognormal prior: s must be positive");
        return Prior(PriorFamily::lognormal, mu, s);
    }

    PriorFamily family() const { return family_; }
    double param0() const { return a_; }
    double param1() const { return b_; }

    Interval support() const {
        switch (family_) {
            case PriorFamily::gaussian: return {};
            case PriorFamily::cosine_bump: return {a_ - b_, a_ + b_};
            case PriorFamily::lognormal: return {0.0, std::numeric_limits<double>::infinity()};
        }
        return {};
    }

    bool in_support_interior(double theta) const {
        const Interval s = support();
        return theta > s.lo && theta < s.hi;
    }

    double log_pdf(double theta) const {
        switch (family_) {
            case PriorFamily::gaussian: {
                const double z = (theta - a_) / b_;
                return -0.5 * z * z - 0.9189385332046727 - std::log(b_);
            }
            case PriorFamily::cosine_bump: {
                if (!in_support_interior(theta)) return -std::numeric_limits<double>::infinity();
                const double ax = 0.5 * M_PI * (theta - a_) / b_;
                return 2.0 * std::log(std::fabs(std::cos(ax))) - std::log(b_);
            }
            case PriorFamily::lognormal: {
                if (!(theta > 0.0)) return -std::numeric_limits<double>::infinity();
                const double z = (std::log(theta) - a_) / b_;
                return -0.5 * z * z - 0.9189385332046727 - std::log(b_) - std::log(theta);
            }
        }
        return 0.0;
    }

    double pdf(double theta) const { return std::exp(log_pdf(theta)); }

    PriorDerivatives derivatives(double theta) const {
        require_interior(theta);
        PriorDerivatives d;
        d.log_pdf = log_pdf(theta);
        double log_curv = 0.0;  // d^2/dtheta^2 log pr
        switch (family_) {
            case PriorFamily::gaussian:
                d.score = -(theta - a_) / (b_ * b_);
                log_curv = -1.0 / (b_ * b_);
                break;
            case PriorFamily::cosine_bump: {
                const double k = 0.5 * M_PI / b_;
                d.score = -2.0 * k * std::tan(k * (theta - a_));
                const double sec2 = 1.0 + std::pow(std::tan(k * (theta - a_)), 2);
                log_curv = -2.0 * k * k * sec2;
                break;
            }
            case PriorFamily::lognormal: {
                const double lt = std::log(theta);
                d.score = -(1.0 + (lt - a_) / (b_ * b_)) / theta;
                log_curv = 1.0 / (theta * theta) - (1.0 - (lt - a_)) / (b_ * b_ * theta * theta);
                break;
            }
        }
        d.ratio_d2 = log_curv + d.score * d.score;
        return d;
    }

    double log_odds(double theta0, double theta1) const {
        require_interior(theta0);
        require_interior(theta1);
        return log_pdf(theta0) - log_pdf(theta1);
    }

    /// y = pr(theta0)/pr(theta1), plus Pr0 = y/(1+y) and Pr1 = 1/(1+y).
    PriorOdds odds(double theta0, double theta1) const {
        PriorOdds o;
        o.log_y = log_odds(theta0, theta1);
        o.y = std::exp(o.log_y);
        if (o.log_y >= 0.0) {
            o.pr1 = 1.0 / (1.0 + o.y);
            o.pr0 = 1.0 - o.pr1;
        } else {
            o.pr0 = 1.0 / (1.0 + std::exp(-o.log_y));
            o.pr1 = 1.0 - o.pr0;
        }
        return o;
    }

    /// Prior mass of (-inf, theta].
    double cdf(double theta) const {
        switch (family_) {
            case PriorFamily::gaussian: return normal_cdf((theta - a_) / b_);
            case PriorFamily::cosine_bump: {
                if (theta <= a_ - b_) return 0.0;
                if (theta >= a_ + b_) return 1.0;
                const double x = theta - a_;
                return 0.5 * (x + b_) / b_ + std::sin(M_PI * x / b_) / (2.0 * M_PI);
            }
            case PriorFamily::lognormal:
                if (!(theta > 0.0)) return 0.0;
                return normal_cdf((std::log(theta) - a_) / b_);
        }
        return 0.0;
    }

    /// Interval carrying at least 1 - mass_deficit of the prior mass.
    Interval truncation(double mass_deficit) const {
        switch (family_) {
            case PriorFamily::cosine_bump: return support();
            case PriorFamily::gaussian: {
                const double z = normal_tail_quantile(0.5 * mass_deficit);
                return {a_ - z * b_, a_ + z * b_};
            }
            case PriorFamily::lognormal: {
                const double z = normal_tail_quantile(0.5 * mass_deficit);
                return {std::exp(a_ - z * b_), std::exp(a_ + z * b_)};
            }
        }
        return {};
    }

    double draw(SplitRng& rng) const {
        switch (family_) {
            case PriorFamily::gaussian: return a_ + b_ * rng.next_normal();
            case PriorFamily::lognormal: return std::exp(a_ + b_ * rng.next_normal());
            case PriorFamily::cosine_bump: {
                // rejection from the uniform envelope, acceptance rate 1/2
                for (;;) {
                    const double x = b_ * (2.0 * rng.next_uniform() - 1.0);
                    const double c = std::cos(0.5 * M_PI * x / b_);
                    if (rng.next_uniform() <= c * c) return a_ + x;
                }
            }
        }
        return 0.0;
    }

    std::vector<double> sample(std::size_t n, std::uint64_t seed) const {
        if (n < 1) throw DomainError("prior sample: n must be >= 1");
        std::vector<double> out(n);
        // one substream per sample: rejection loops cannot shift later draws
        for (std::size_t i = 0; i < n; ++i) {
            SplitRng rng(seed, i + 1);
            out[i] = draw(rng);
        }
        return out;
    }

  private:
    Prior(PriorFamily f, double a, double b) : family_(f), a_(a), b_(b) {}

    void require_interior(double theta) const {
        if (!in_support_interior(theta))
            throw DomainError(std::string(to_string(family_)) +
                              " prior: theta outside support interior: " + std::to_string(theta));
    }

    PriorFamily family_;
    double a_;  // mean / center / mu
    double b_;  // sd / half_width / s
};

/// Expectation of f(theta) against the prior over its certified truncation.
template <class F>
inline Estimate expect_prior(const Prior& prior, F&& f, double tol, double mass_deficit = 1e-10) {
    const Interval t = prior.truncation(mass_deficit);
    auto integrand = [&](double th) { return prior.pdf(th) * f(th); };
    return integrate_1d(integrand, t.lo, t.hi, tol);
}

}  // namespace fomlab
