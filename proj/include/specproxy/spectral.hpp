#ifndef SPECPROXY_SPECTRAL_HPP
#define SPECPROXY_SPECTRAL_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace specproxy {

/// Dense real matrix, the universal weight carrier. All internal arithmetic
/// is 64-bit regardless of the dtype a checkpoint was stored in.
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Descending singular values of a matrix together with the source shape and
/// the relative tolerance used for numerical rank decisions.
struct Spectrum {
    std::vector<double> values;  // sorted descending, all >= 0
    Index rows = 0;
    Index cols = 0;
    double rank_tol = 0.0;

    Index min_dim() const { return std::min(rows, cols); }
    double sigma_max() const { return values.empty() ? 0.0 : values.front(); }
};

/// Default relative rank tolerance: max(rows, cols) times single-precision
/// machine epsilon, since released checkpoints store weights as f32.
inline double default_rank_tol(Index rows, Index cols) {
    return static_cast<double>(std::max(rows, cols)) * 1.2e-7;
}

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* what);

/// Full singular value spectrum, descending, negatives clamped to zero.
/// rank_tol <= 0 selects the default tolerance for the shape.
Spectrum singular_values(const Matrix& m, double rank_tol = -1.0);

/// Schatten power ||W||_{s,p}^p for p in [0,2]. At p = 0 this is the numerical
/// rank: the count of singular values above rank_tol * sigma_1. For p > 0 the
/// full spectrum is summed with no truncation.
double schatten_power(const Spectrum& s, double p);

/// Numerical rank at the spectrum's tolerance (= schatten_power at p = 0).
Index numerical_rank(const Spectrum& s);

double spectral_norm(const Spectrum& s);
double frobenius_norm(const Matrix& m);

/// Mixed (a,b)-norm: the l_b norm over columns of the columnwise l_a norms,
/// [sum_j (sum_i |W_ij|^a)^{b/a}]^{1/b}. mixed_norm(m, 2, 2) equals the
/// Frobenius norm.
double mixed_norm(const Matrix& m, double a, double b);

/// Maximum Euclidean row norm ||W||_{2->inf}.
double two_to_inf_norm(const Matrix& m);

}  // namespace specproxy

#endif
