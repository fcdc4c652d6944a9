#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fomlab/core.hpp"

namespace fomlab {

/// Dense square matrix, row-major. Big-linear-algebra free zone: parameter
/// dimensions here are tiny (the zoo caps at a handful of axes).
struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double max_asymmetry() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                worst = std::max(worst, std::fabs(at(i, j) - at(j, i)));
        return worst;
    }

    double quad_form(std::span<const double> u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += u[i] * at(i, j) * u[j];
        return s;
    }
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(Matrix m) {
    const std::size_t n = m.n;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m.at(i, j) * m.at(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = 0.5 * (m.at(q, q) - m.at(p, p)) / apq;
                const double t = ((theta >= 0.0) ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = m.at(k, p);
                    const double akq = m.at(k, q);
                    m.at(k, p) = c * akp - s * akq;
                    m.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = m.at(p, k);
                    const double aqk = m.at(q, k);
                    m.at(p, k) = c * apk - s * aqk;
                    m.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m.at(i, i);
    return ev;
}

}  // namespace fomlab
