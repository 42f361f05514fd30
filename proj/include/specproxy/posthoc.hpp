#ifndef SPECPROXY_POSTHOC_HPP
#define SPECPROXY_POSTHOC_HPP

#include "specproxy/bounds.hpp"
#include "specproxy/spectral.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace specproxy::posthoc {

using bounds::BoundBreakdown;
using bounds::BoundConfig;
using bounds::LayerRadii;
using bounds::MatrixKind;

/// Dyadic shell index of a realized Schatten power: nullopt is the zero shell,
/// integer j covers (2^(j-1), 2^j].
using ShellIndex = std::optional<std::int64_t>;

ShellIndex shell_index(double schatten_power);

/// Shell weights summing to one over the zero shell and all integers:
/// omega_bot = 3/pi^2 and omega_j = (3/pi^2) / (1+|j|)^2.
double shell_weight(ShellIndex s);

/// Schatten index grid {0, 1/m, ..., 2} with upward projection.
struct IndexGrid {
    int m = 1;

    explicit IndexGrid(int m_) : m(m_) {
        if (m < 1) throw std::invalid_argument("IndexGrid: m >= 1 required");
    }
    std::vector<double> points() const;
    double project_up(double t) const;

    /// Default grid resolution ceil(L + log N).
    static int default_m(std::int64_t depth, std::int64_t hidden_dim);
};

/// One analyzed weight matrix: its location in the layer stack plus spectrum.
struct WeightSpectrum {
    MatrixKind kind = MatrixKind::qk;
    std::int64_t layer = 1;
    Spectrum spectrum;
};

/// 3L spectra ordered (qk, v, m) within each layer.
using WeightSpectra = std::vector<WeightSpectrum>;

/// SVD of every matrix in a layer stack, in the canonical order. Spectral
/// radii for the propagation factors are the measured top singular values.
WeightSpectra analyze_layers(const std::vector<std::array<Matrix, 3>>& layers,
                             double rank_tol = -1.0);
LayerRadii measured_radii(const WeightSpectra& spectra, std::int64_t depth);

/// Post hoc logarithmic penalty Omega = 3L log(2m+1) + sum log(1/omega_kappa)
/// over the realized shells of the given Schatten powers (3L entries).
double penalty_omega(const std::vector<double>& schatten_powers, std::int64_t depth, int m);

struct PosthocTerm {
    MatrixKind kind = MatrixKind::qk;
    std::int64_t layer = 1;
    double p = 0.0;
    double schatten = 0.0;  // ||W||_{s,p}^p at the chosen index
    double term = 0.0;
};

struct PosthocReport {
    std::vector<PosthocTerm> per_matrix;
    double complexity = 0.0;  // sum of per-matrix terms
    double omega = 0.0;
    double chi = 0.0;
    int m = 0;
    std::int64_t floor_violations = 0;  // weights below the exp(-c0(L+log N)) floor
};

/// Single contribution of one matrix to the complexity at index p, with
/// architectural factor H = L_phi gamma alpha L. At p = 0 this is
/// sqrt(rank * N).
double complexity_term(const Spectrum& s, double p, double arch_factor,
                       std::int64_t hidden_dim);

/// Weight-dependent complexity at a fixed index vector (3L entries aligned
/// with the spectra order).
PosthocReport complexity_B(const WeightSpectra& spectra, const std::vector<double>& p_vec,
                           const LayerRadii& radii, const BoundConfig& cfg);

/// Per-matrix grid minimization of the complexity term; the joint grid
/// infimum coincides because the objective is separable. Ties resolve to the
/// smallest index.
PosthocReport select_indices(const WeightSpectra& spectra, const LayerRadii& radii,
                             const BoundConfig& cfg, int m);

/// Full post hoc bound at an index vector: upward grid projection, the
/// unconditional rounding factor exp(chi/m) L^(1/2m) N^(1/4m), the penalty at
/// the projected indices, and the readout term.
BoundBreakdown posthoc_bound(const WeightSpectra& spectra, const LayerRadii& radii,
                             const BoundConfig& cfg, int m, const std::vector<double>& p_vec);

}  // namespace specproxy::posthoc

#endif
