#ifndef SPECPROXY_BOUNDS_HPP
#define SPECPROXY_BOUNDS_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace specproxy::bounds {

enum class MatrixKind { qk, v, m };

const char* kind_name(MatrixKind k);

/// Scalar context every bound depends on. univ_const stands in for every
/// suppressed absolute constant; with the default 1 all outputs are proxies,
/// not certified bounds, and reports label them as such.
struct BoundConfig {
    std::int64_t n = 10000;          // sample size
    std::int64_t token_len = 128;    // T
    std::int64_t hidden_dim = 128;   // N
    std::int64_t depth = 1;          // L
    double delta = 0.01;             // confidence level
    double loss_lipschitz = 1.0;     // L_L
    double loss_bound = 1.0;         // B_L
    double readout_radius = 1.0;     // C_2^out
    double act_lipschitz = 1.0;      // L_phi
    double input_row_bound = 1.0;    // B_{n,(2->inf)}
    double univ_const = 1.0;

    void validate() const;
};

/// Per-layer spectral radii C_2, Schatten radii C_s and Schatten indices p
/// for the three matrix kinds. Layers are 1-based in every accessor.
struct LayerRadii {
    struct Entry {
        double c2_qk = 1.0, c2_v = 1.0, c2_m = 1.0;
        double cs_qk = 0.0, cs_v = 0.0, cs_m = 0.0;
        double p_qk = 0.0, p_v = 0.0, p_m = 0.0;
    };
    std::vector<Entry> layers;

    std::int64_t depth() const { return static_cast<std::int64_t>(layers.size()); }
    double c2(MatrixKind k, std::int64_t ell) const;
    double cs(MatrixKind k, std::int64_t ell) const;
    double p(MatrixKind k, std::int64_t ell) const;

    static LayerRadii uniform(std::int64_t depth, double c2, double cs, double p);
};

/// Propagation factor alpha^(ell) = prod_{k=ell+1}^{L} L_phi C_2^M C_2^V (1 + 4 C_2^QK),
/// with the empty product equal to 1 at ell = L.
double propagation_alpha(std::int64_t ell, const LayerRadii& radii, double act_lipschitz);

/// Local factor gamma^{star,(ell)}; the input-row bound enters only at layer 1.
double gamma_factor(MatrixKind kind, std::int64_t ell, const LayerRadii& radii,
                    const BoundConfig& cfg);

struct InterpEntropy {
    double bound = 0.0;
    double tau = 0.0;
    double low_rank_term = 0.0;
    double tail_term = 0.0;
};

/// Two-term covering entropy for the linear class {X -> XW} on R^{d x ldim}
/// inputs with row bound b, under a Schatten-power radius cs at index p and a
/// spectral radius c2: a low-rank head covered at threshold tau plus a
/// Frobenius tail, with tau balancing the two polynomial parts.
InterpEntropy interp_entropy(std::int64_t ldim, std::int64_t mdim, double p, double cs,
                             double c2, double b, double eps, std::int64_t n,
                             std::int64_t d);

/// Entropy of the scalar linear class {x -> w.x, |w|_2 <= a} on inputs with
/// |x|_2 <= b, with the explicit constants of the underlying covering bound.
double linear_scalar_entropy(double a, double b, double eps, std::int64_t n);

struct Allocation {
    std::vector<double> z;
    double value = 0.0;
};

/// Closed-form minimizer of sum_i a_i z_i^(-nu) subject to sum_i b_i z_i = c
/// over positive z.
Allocation allocate_radii(const std::vector<double>& a, const std::vector<double>& b,
                          double c, double nu);

/// Rademacher complexity from a power-law entropy sum: terms (C_i, nu_i) with
/// nu_i in [0,2) plus a final exponent-2 term with constant c_last, for a
/// class bounded by A.
double dudley_complexity(const std::vector<std::pair<double, double>>& terms,
                         double c_last, double A, std::int64_t n,
                         double univ_const = 1.0);

struct BoundBreakdown {
    double total = 0.0;
    double main_term = 0.0;
    double readout_term = 0.0;
    double confidence_term = 0.0;
    double penalty_term = 0.0;           // post hoc only
    std::vector<double> per_matrix;      // summands, ordered (qk, v, m) per layer
    std::vector<double> per_layer;       // common-p: Gamma^(ell)
    double xi = 0.0;                     // common-p aggregate
};

/// Fixed-index gap bound with a separate Schatten index per matrix.
BoundBreakdown gap_bound_general_p(const LayerRadii& radii, const BoundConfig& cfg);

/// Fixed-index gap bound with one shared Schatten index; the covering radii
/// are allocated across layers and matrix kinds in closed form, which beats
/// the balanced allocation behind the general-p route.
BoundBreakdown gap_bound_common_p(const LayerRadii& radii, const BoundConfig& cfg,
                                  double p);

/// Entropy of the attention-head class at output radius eps, composed from
/// the two linear covers.
double head_entropy(const BoundConfig& cfg, double p_qk, double cs_qk, double c2_qk,
                    double p_v, double cs_v, double c2_v, double eps);

/// Entropy of one Transformer block at output radius eps.
double block_entropy(const BoundConfig& cfg, const LayerRadii::Entry& e, double eps,
                     double input_bound);

/// Entropy of the scalar-output multi-layer class at radius eps, including
/// the readout cover.
double multilayer_entropy(const LayerRadii& radii, const BoundConfig& cfg, double eps);

}  // namespace specproxy::bounds

#endif
