#pragma once

// Test-side oracles, deliberately independent of the library's own
// quadrature/special-function code paths: composite Simpson integration,
// direct erfc-based normal tails, lgamma-based Poisson pmf. Frozen
// constants were produced by an external high-precision evaluation of the
// same closed-form expressions.

#include <cmath>
#include <functional>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline double normal_pdf(double x, double mu = 0.0, double sd = 1.0) {
    const double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * 2.5066282746310002);
}
inline double normal_cdf(double x, double mu = 0.0, double sd = 1.0) {
    return 0.5 * std::erfc(-(x - mu) / (sd * 1.4142135623730951));
}
inline double normal_sf(double x, double mu = 0.0, double sd = 1.0) {
    return 0.5 * std::erfc((x - mu) / (sd * 1.4142135623730951));
}

inline double poisson_pmf(long k, double lambda) {
    return std::exp(k * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
}

// frozen reference values
inline constexpr double kLn2 = 0.6931471805599453;
inline constexpr double kErfHalf = 0.5204998778130465;
inline constexpr double kAucGauss01 = 0.7602499389065233;       // 1/2 + erf(1/2)/2
inline constexpr double kExpHalf = 1.6487212707001282;          // e^0.5
inline constexpr double kEntropyAtExpHalf = 0.6628473185791794; // H(e^0.5)
inline constexpr double kMpeEqualOdds = 0.3085375387259869;     // Phi(-1/2)
inline constexpr double kMpePriorOdds = 0.2875267776529079;     // conjugate pair, t0=0, t1=1
inline constexpr double kCeSmallPair = 0.6918987404638748;      // C_e(-0.05, 0.05, y=1)
inline constexpr double kCeWidePair = 0.01720460317904493;      // C_e(0, 5, y=1)
inline constexpr double kCeAvgConjugateAtTenth = 0.6906534098554856;  // <C_e>(0.1), conjugate
inline constexpr double kSiAvgConjugateAtTenth = 0.0012453306083891524;
inline constexpr double kLognormalScoreSq = 14.778112197861299;  // 2 e^2
inline constexpr double kScaleAuc12 = 0.7048327646991335;        // 1 - (2/pi) atan(1/2)

}  // namespace oracle
