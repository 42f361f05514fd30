#include "specproxy/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace specproxy {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

Spectrum singular_values(const Matrix& m, double rank_tol) {
    require_finite(m, "singular_values");
    Spectrum s;
    s.rows = m.rows();
    s.cols = m.cols();
    s.rank_tol = rank_tol > 0.0 ? rank_tol : default_rank_tol(m.rows(), m.cols());
    if (m.rows() == 0 || m.cols() == 0) {
        return s;
    }
    // BDC for large matrices, one-sided Jacobi below the crossover.
    Eigen::VectorXd sv;
    if (std::min(m.rows(), m.cols()) >= 16) {
        sv = Eigen::BDCSVD<Matrix>(m).singularValues();
    } else {
        sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    }
    s.values.assign(sv.data(), sv.data() + sv.size());
    for (double& v : s.values) {
        v = std::max(v, 0.0);
    }
    std::sort(s.values.begin(), s.values.end(), std::greater<>());
    return s;
}

double schatten_power(const Spectrum& s, double p) {
    if (!(p >= 0.0 && p <= 2.0)) {
        throw std::domain_error("schatten_power: p must lie in [0,2]");
    }
    if (p == 0.0) {
        return static_cast<double>(numerical_rank(s));
    }
    double sum = 0.0;
    for (double v : s.values) {
        sum += std::pow(v, p);
    }
    return sum;
}

Index numerical_rank(const Spectrum& s) {
    if (s.values.empty() || s.values.front() <= 0.0) {
        return 0;
    }
    const double cut = s.rank_tol * s.values.front();
    Index r = 0;
    for (double v : s.values) {
        if (v > cut) {
            ++r;
        }
    }
    return r;
}

double spectral_norm(const Spectrum& s) { return s.sigma_max(); }

double frobenius_norm(const Matrix& m) {
    require_finite(m, "frobenius_norm");
    return m.norm();
}

double mixed_norm(const Matrix& m, double a, double b) {
    if (a < 1.0 || b < 1.0) {
        throw std::invalid_argument("mixed_norm: indices must be >= 1");
    }
    require_finite(m, "mixed_norm");
    double outer = 0.0;
    for (Index j = 0; j < m.cols(); ++j) {
        double inner = 0.0;
        for (Index i = 0; i < m.rows(); ++i) {
            inner += std::pow(std::abs(m(i, j)), a);
        }
        outer += std::pow(inner, b / a);
    }
    return std::pow(outer, 1.0 / b);
}

double two_to_inf_norm(const Matrix& m) {
    require_finite(m, "two_to_inf_norm");
    double best = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        best = std::max(best, m.row(i).norm());
    }
    return best;
}

}  // namespace specproxy
