// Test-side oracles, deliberately independent of the library implementation
// paths they cross-check.
#ifndef SPECPROXY_TESTS_ORACLES_HPP
#define SPECPROXY_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracles {

/// Plain dense symmetric storage for the eigenvalue oracle.
struct SymMatrix {
    std::size_t n = 0;
    std::vector<double> a;  // row-major n x n

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// Cyclic two-sided Jacobi eigenvalue iteration for symmetric matrices.
/// Returns eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(SymMatrix m) {
    const std::size_t n = m.n;
    if (n == 0) return {};
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += m.at(i, j) * m.at(i, j);
            }
        }
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diag += m.at(i, i) * m.at(i, i);
        }
        if (off <= 1e-30 * (diag + 1e-300)) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double app = m.at(p, p);
                const double aqq = m.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
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
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = m.at(i, i);
    }
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

/// Singular values of a row-major (rows x cols) array through the Gram
/// matrix of the smaller side: sqrt of the symmetric eigenvalues.
inline std::vector<double> gram_singular_values(const std::vector<double>& data,
                                                std::size_t rows, std::size_t cols) {
    const bool tall = rows >= cols;
    const std::size_t n = tall ? cols : rows;
    SymMatrix g;
    g.n = n;
    g.a.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            if (tall) {  // G = M^T M
                for (std::size_t k = 0; k < rows; ++k) {
                    sum += data[k * cols + i] * data[k * cols + j];
                }
            } else {  // G = M M^T
                for (std::size_t k = 0; k < cols; ++k) {
                    sum += data[i * cols + k] * data[j * cols + k];
                }
            }
            g.at(i, j) = sum;
        }
    }
    std::vector<double> ev = jacobi_eigenvalues(std::move(g));
    for (double& v : ev) {
        v = std::sqrt(std::max(v, 0.0));
    }
    return ev;
}

/// Direct Schatten power: ascending long double accumulation, independent of
/// the library's summation order.
inline double schatten_direct(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    long double sum = 0.0L;
    for (double v : values) {
        sum += std::pow(static_cast<long double>(v), static_cast<long double>(p));
    }
    return static_cast<double>(sum);
}

inline std::vector<double> random_array(std::mt19937_64& rng, std::size_t count,
                                        double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    std::vector<double> out(count);
    for (double& v : out) {
        v = gauss(rng);
    }
    return out;
}

}  // namespace oracles

#endif
