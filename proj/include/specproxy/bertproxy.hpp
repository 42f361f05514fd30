#ifndef SPECPROXY_BERTPROXY_HPP
#define SPECPROXY_BERTPROXY_HPP

#include "specproxy/posthoc.hpp"
#include "specproxy/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace specproxy::bertproxy {

/// Composed per-head and feedforward weight matrices of one encoder layer.
struct BertLayer {
    std::vector<Matrix> w_qk;       // per head, N x N, rank <= d_h
    std::vector<Matrix> w_vtilde;   // per head, N x N, rank <= d_h
    Matrix w_m_in;                  // N x I
    Matrix w_m_out;                 // I x N
};

struct BertCheckpoint {
    std::int64_t L = 0;
    std::int64_t N = 0;
    std::int64_t A_h = 0;
    std::int64_t d_h = 64;
    std::int64_t I = 0;
    std::vector<BertLayer> layers;

    void validate() const;
};

/// Headwise query-key product (W^Q)^T W^K from d_h x N slices.
Matrix compose_qk(const Matrix& q_slice, const Matrix& k_slice);

/// Composed value-output matrix W^V W^O from an N x d_h value slice and a
/// d_h x N output slice.
Matrix compose_value_output(const Matrix& v_slice, const Matrix& o_slice);

enum class BertKind { qk, vtilde, ffn_in, ffn_out };

const char* bert_kind_name(BertKind k);

/// One analyzed matrix: spectrum plus the measured norms entering the
/// proxies. head is -1 for feedforward matrices.
struct BertMatrixRecord {
    BertKind kind = BertKind::qk;
    std::int64_t layer = 1;  // 1-based
    std::int64_t head = -1;  // 0-based
    std::int64_t rows = 0, cols = 0;
    Spectrum spectrum;
    double c2 = 0.0;
    double c21 = 0.0;  // for qk this is the (2,1)-norm of the transpose
    double c11 = 0.0;
    double frob = 0.0;

    std::string label() const;
};

/// Full spectral analysis of a checkpoint. All radii entering the adapted
/// propagation and local factors are the measured norms of the composed
/// trained matrices.
struct BertAnalysis {
    std::int64_t L = 0, N = 0, A_h = 0, d_h = 0, I = 0;
    double act_lipschitz = 1.13;
    std::vector<BertMatrixRecord> matrices;  // layer-major: qk heads, vtilde heads, ffn in, ffn out

    double c2_m_in(std::int64_t ell) const;
    double c2_m_out(std::int64_t ell) const;
    const BertMatrixRecord& record(BertKind kind, std::int64_t ell, std::int64_t head) const;

    /// Adapted propagation factor: product over later layers of
    /// L_phi C_2^{M,in} C_2^{M,out} sum_h C_2^{Vt,h} (1 + 4 C_2^{QK,h}).
    double alpha_tilde(std::int64_t ell) const;

    /// Adapted local factor per matrix kind.
    double gamma_tilde(const BertMatrixRecord& rec) const;

    /// Architectural factor gamma_tilde * alpha_tilde * L for one matrix.
    double arch_factor(const BertMatrixRecord& rec) const;
};

/// SVD + norms of every composed matrix, in a parallel map over matrices.
/// threads = 0 picks the hardware concurrency.
BertAnalysis analyze(const BertCheckpoint& ckpt, double act_lipschitz = 1.13,
                     double rank_tol = -1.0, int threads = 0);

/// Per-matrix contribution to the adapted complexity at Schatten index p.
double bert_matrix_term(const BertAnalysis& a, const BertMatrixRecord& rec, double p);

struct BoursChoice {
    BertKind kind = BertKind::qk;
    std::int64_t layer = 1;
    std::int64_t head = -1;
    double p = 0.0;
    double schatten = 0.0;
    double term = 0.0;
};

struct BoursResult {
    double value = 0.0;       // grid infimum of the complexity plus sqrt(L)
    double complexity = 0.0;  // grid infimum alone
    double omega = 0.0;       // penalty at the selected indices
    double chi = 0.0;
    int m = 0;
    std::vector<BoursChoice> choices;
};

/// Spectrum-adaptive proxy: separable per-matrix grid minimization plus the
/// sqrt(L) readout part. m = 0 selects ceil(L + log N).
BoursResult b_ours(const BertAnalysis& a, int m = 0);

/// Mixed-norm baseline proxy (1 + sum_l alpha_tilde^(2/3) xi_tilde)^(3/2).
double b_edelman(const BertAnalysis& a);

struct CurvePoint {
    std::int64_t L = 0;
    std::int64_t N = 0;
    double value = 0.0;
};

/// Values rescaled so the smallest checkpoint (smallest L, then smallest N)
/// equals one.
struct ScalingCurve {
    std::vector<CurvePoint> points;
    std::vector<double> normalized;
    std::size_t base_index = 0;
};

ScalingCurve normalize_curves(std::vector<CurvePoint> points);

/// term(p) / term(0) curve of one matrix over the index grid; matrices with
/// zero term at p = 0 are flagged undefined.
struct SweepCurve {
    BertKind kind = BertKind::qk;
    std::int64_t layer = 1;
    std::int64_t head = -1;
    bool defined = true;
    std::vector<double> ratios;
};

std::vector<SweepCurve> p_sweep(const BertAnalysis& a, const std::vector<double>& grid);

}  // namespace specproxy::bertproxy

#endif
