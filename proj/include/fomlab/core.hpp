#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fomlab {

inline constexpr const char* kVersion = "0.1.0";

/// How a numeric result was produced.
enum class Method { closed_form, quadrature, monte_carlo };

/// Requested evaluation route; `automatic` picks the most accurate
/// available path (closed form, then quadrature for 1-D data, then MC).
enum class MethodChoice { automatic, closed_form, quadrature, monte_carlo };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "?";
}

/// A numeric result with uncertainty and reproducibility metadata.
///
/// For monte_carlo the std_error is the standard error of the mean and a
/// seed is always present; for quadrature it holds the requested absolute
/// tolerance; closed_form results carry 0.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    Method method = Method::closed_form;
    std::uint64_t effort = 0;  // quadrature nodes or MC samples
    std::optional<std::uint64_t> seed{};
};

inline Estimate closed_form_estimate(double value) {
    return Estimate{value, 0.0, Method::closed_form, 0, std::nullopt};
}

/// Shared numeric knobs, surfaced through the CLI `[numerics]` section.
struct NumericsOptions {
    double quad_tol = 1e-9;
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 20260809;
    std::vector<double> curvature_ladder = {0.16, 0.08, 0.04, 0.02};
    // Prior-support truncation keeps at least 1 - trunc_mass of the mass.
    double trunc_mass = 1e-10;
};

// ---- error taxonomy ----

/// Inadmissible parameter or data point (theta <= 0 for Poisson, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Bad configuration: unknown family, dimension mismatch, schema violation.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument(what), offending_key(key) {}
    std::string offending_key;
};

/// A precondition of an operation failed (e.g. biased estimator fed to a
/// bound that requires unbiasedness); message names the measured violation.
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Quadrature or tail truncation failed to converge; carries the best
/// estimate obtained so far.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_estimate(best) {}
    double best_estimate;
};

/// Non-finite value met while reducing data (identifies the offender).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fomlab
