#include "specproxy/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace specproxy::bounds {

const char* kind_name(MatrixKind k) {
    switch (k) {
        case MatrixKind::qk: return "qk";
        case MatrixKind::v: return "v";
        case MatrixKind::m: return "m";
    }
    return "?";
}

void BoundConfig::validate() const {
    if (n < 3) {
        throw std::invalid_argument("BoundConfig: n >= 3 required");
    }
    if (token_len < 1 || hidden_dim < 1 || depth < 1) {
        throw std::invalid_argument("BoundConfig: T, N, L must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("BoundConfig: delta must lie in (0,1)");
    }
    if (loss_lipschitz <= 0.0 || loss_bound <= 0.0 || readout_radius <= 0.0 ||
        act_lipschitz <= 0.0 || input_row_bound <= 0.0 || univ_const <= 0.0) {
        throw std::invalid_argument("BoundConfig: scale constants must be positive");
    }
}

namespace {

const LayerRadii::Entry& layer_at(const LayerRadii& r, std::int64_t ell) {
    if (ell < 1 || ell > r.depth()) {
        throw std::out_of_range("LayerRadii: layer index out of range");
    }
    return r.layers[static_cast<std::size_t>(ell - 1)];
}

}  // namespace

double LayerRadii::c2(MatrixKind k, std::int64_t ell) const {
    const Entry& e = layer_at(*this, ell);
    switch (k) {
        case MatrixKind::qk: return e.c2_qk;
        case MatrixKind::v: return e.c2_v;
        case MatrixKind::m: return e.c2_m;
    }
    return 0.0;
}

double LayerRadii::cs(MatrixKind k, std::int64_t ell) const {
    const Entry& e = layer_at(*this, ell);
    switch (k) {
        case MatrixKind::qk: return e.cs_qk;
        case MatrixKind::v: return e.cs_v;
        case MatrixKind::m: return e.cs_m;
    }
    return 0.0;
}

double LayerRadii::p(MatrixKind k, std::int64_t ell) const {
    const Entry& e = layer_at(*this, ell);
    switch (k) {
        case MatrixKind::qk: return e.p_qk;
        case MatrixKind::v: return e.p_v;
        case MatrixKind::m: return e.p_m;
    }
    return 0.0;
}

LayerRadii LayerRadii::uniform(std::int64_t depth, double c2, double cs, double p) {
    LayerRadii r;
    Entry e;
    e.c2_qk = e.c2_v = e.c2_m = c2;
    e.cs_qk = e.cs_v = e.cs_m = cs;
    e.p_qk = e.p_v = e.p_m = p;
    r.layers.assign(static_cast<std::size_t>(depth), e);
    return r;
}

double propagation_alpha(std::int64_t ell, const LayerRadii& radii, double act_lipschitz) {
    const std::int64_t depth = radii.depth();
    if (ell < 1 || ell > depth) {
        throw std::out_of_range("propagation_alpha: layer index out of range");
    }
    double prod = 1.0;
    for (std::int64_t k = ell + 1; k <= depth; ++k) {
        const LayerRadii::Entry& e = radii.layers[static_cast<std::size_t>(k - 1)];
        prod *= act_lipschitz * e.c2_m * e.c2_v * (1.0 + 4.0 * e.c2_qk);
    }
    return prod;
}

double gamma_factor(MatrixKind kind, std::int64_t ell, const LayerRadii& radii,
                    const BoundConfig& cfg) {
    const LayerRadii::Entry& e = layer_at(radii, ell);
    const double b = ell == 1 ? cfg.input_row_bound : 1.0;
    switch (kind) {
        case MatrixKind::qk: return 2.0 * e.c2_v * e.c2_m * b * b * b;
        case MatrixKind::v: return e.c2_m * b;
        case MatrixKind::m: return 1.0;
    }
    throw std::invalid_argument("gamma_factor: unknown matrix kind");
}

InterpEntropy interp_entropy(std::int64_t ldim, std::int64_t mdim, double p, double cs,
                             double c2, double b, double eps, std::int64_t n,
                             std::int64_t d) {
    if (eps <= 0.0) {
        throw std::invalid_argument("interp_entropy: eps must be positive");
    }
    if (!(p >= 0.0 && p <= 2.0)) {
        throw std::domain_error("interp_entropy: p must lie in [0,2]");
    }
    if (ldim < 1 || mdim < 1 || cs < 0.0 || c2 < 0.0 || b <= 0.0 || n < 1 || d < 1) {
        throw std::invalid_argument("interp_entropy: invalid arguments");
    }
    InterpEntropy out;
    if (cs == 0.0) {
        return out;  // zero-radius class covers itself
    }
    const double min_dim = static_cast<double>(std::min(ldim, mdim));
    const double dim_sum = static_cast<double>(ldim + mdim);
    const double md = static_cast<double>(mdim);

    out.tau = std::pow(cs * dim_sum * eps * eps / (b * b * min_dim * md), 1.0 / (p + 2.0));

    // low-rank head: rank at most cs / tau^p, spectral-net cover
    const double rank_cap = p == 0.0 ? cs : cs / std::pow(out.tau, p);
    const double head_log =
        std::log(32.0 * std::sqrt(cs) * c2 * b / (std::pow(out.tau, p / 2.0) * eps) + 1.0);
    out.low_rank_term = dim_sum * rank_cap * head_log;

    // Frobenius tail at radius eps/4
    const double a = out.tau * std::sqrt(min_dim);
    const double eps4 = eps / 4.0;
    const double tail_log = std::log(
        20.0 * std::ceil(8.0 * a * b / eps4 + 2.0) * static_cast<double>(n) * static_cast<double>(d));
    out.tail_term = 144.0 * a * a * b * b * md / (eps4 * eps4) * tail_log;

    out.bound = out.low_rank_term + out.tail_term;
    return out;
}

double linear_scalar_entropy(double a, double b, double eps, std::int64_t n) {
    if (eps <= 0.0) {
        throw std::invalid_argument("linear_scalar_entropy: eps must be positive");
    }
    if (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    const double ab = a * b;
    return 36.0 * ab * ab / (eps * eps) *
           std::log(2.0 * std::ceil(4.0 * ab / eps + 2.0) * static_cast<double>(n) + 1.0);
}

Allocation allocate_radii(const std::vector<double>& a, const std::vector<double>& b,
                          double c, double nu) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("allocate_radii: a and b must be nonempty and equal length");
    }
    if (c <= 0.0 || nu <= 0.0) {
        throw std::invalid_argument("allocate_radii: c and nu must be positive");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.0 || b[i] <= 0.0) {
            throw std::invalid_argument("allocate_radii: coefficients must be positive");
        }
    }
    const double inv = 1.0 / (nu + 1.0);
    double denom = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        denom += std::pow(a[i], inv) * std::pow(b[i], nu * inv);
    }
    Allocation out;
    out.z.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.z[i] = c * std::pow(a[i], inv) * std::pow(b[i], -inv) / denom;
    }
    out.value = std::pow(c, -nu) * std::pow(denom, nu + 1.0);
    return out;
}

double dudley_complexity(const std::vector<std::pair<double, double>>& terms,
                         double c_last, double A, std::int64_t n, double univ_const) {
    if (A <= 0.0 || n < 1) {
        throw std::invalid_argument("dudley_complexity: A > 0 and n >= 1 required");
    }
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double sum = 0.0;
    for (const auto& [ci, nui] : terms) {
        if (ci < 0.0 || nui < 0.0 || nui >= 2.0) {
            throw std::invalid_argument("dudley_complexity: power-law exponents must lie in [0,2)");
        }
        sum += std::pow(A, 1.0 - nui / 2.0) / (1.0 - nui / 2.0) * std::sqrt(ci);
    }
    if (c_last > 0.0) {
        const double sq = std::sqrt(c_last);
        sum += (1.0 + std::log(1.0 + A * sqrt_n / sq)) * sq;
    }
    return univ_const * sum / sqrt_n;
}

namespace {

struct GapContext {
    double log_nt;
    double sqrt_n;
    double readout;
    double confidence;
};

GapContext gap_context(const BoundConfig& cfg) {
    GapContext c{};
    const double n = static_cast<double>(cfg.n);
    c.sqrt_n = std::sqrt(n);
    c.log_nt = std::log(n * static_cast<double>(cfg.token_len));
    c.readout = cfg.univ_const * cfg.loss_lipschitz * cfg.readout_radius *
                std::pow(std::log(n), 1.5) / c.sqrt_n;
    c.confidence = cfg.univ_const * cfg.loss_bound * std::sqrt(std::log(1.0 / cfg.delta) / n);
    return c;
}

}  // namespace

BoundBreakdown gap_bound_general_p(const LayerRadii& radii, const BoundConfig& cfg) {
    cfg.validate();
    if (radii.depth() != cfg.depth) {
        throw std::invalid_argument("gap_bound_general_p: radii depth mismatch");
    }
    const GapContext ctx = gap_context(cfg);
    const double nd = static_cast<double>(cfg.hidden_dim);
    const double depth = static_cast<double>(cfg.depth);

    BoundBreakdown out;
    double sum = 0.0;
    for (std::int64_t ell = 1; ell <= cfg.depth; ++ell) {
        const double alpha = propagation_alpha(ell, radii, cfg.act_lipschitz);
        for (MatrixKind k : {MatrixKind::qk, MatrixKind::v, MatrixKind::m}) {
            const double p = radii.p(k, ell);
            if (!(p >= 0.0 && p <= 2.0)) {
                throw std::domain_error("gap_bound_general_p: Schatten index outside [0,2]");
            }
            const double cs = radii.cs(k, ell);
            const double gamma = gamma_factor(k, ell, radii, cfg);
            const double psi = std::pow(cs, 1.0 / (p + 2.0)) *
                               std::pow(cfg.act_lipschitz * gamma * alpha, p / (p + 2.0));
            const double term = psi * std::pow(depth, p / (p + 2.0)) *
                                std::pow(nd, (p + 1.0) / (p + 2.0));
            out.per_matrix.push_back(term);
            sum += term;
        }
    }
    out.main_term = cfg.univ_const * cfg.loss_lipschitz * cfg.readout_radius *
                    std::sqrt(ctx.log_nt) / ctx.sqrt_n * sum;
    out.readout_term = ctx.readout;
    out.confidence_term = ctx.confidence;
    out.total = out.main_term + out.readout_term + out.confidence_term;
    return out;
}

BoundBreakdown gap_bound_common_p(const LayerRadii& radii, const BoundConfig& cfg, double p) {
    cfg.validate();
    if (radii.depth() != cfg.depth) {
        throw std::invalid_argument("gap_bound_common_p: radii depth mismatch");
    }
    if (!(p >= 0.0 && p <= 2.0)) {
        throw std::domain_error("gap_bound_common_p: Schatten index outside [0,2]");
    }
    const GapContext ctx = gap_context(cfg);
    const double nd = static_cast<double>(cfg.hidden_dim);

    BoundBreakdown out;
    double aggregate = 0.0;
    for (std::int64_t ell = 1; ell <= cfg.depth; ++ell) {
        const double alpha = propagation_alpha(ell, radii, cfg.act_lipschitz);
        double gamma_sum = 0.0;
        for (MatrixKind k : {MatrixKind::qk, MatrixKind::v, MatrixKind::m}) {
            const double gamma = gamma_factor(k, ell, radii, cfg);
            gamma_sum += std::pow(gamma, 2.0 * p / (3.0 * p + 2.0)) *
                         std::pow(radii.cs(k, ell), 2.0 / (3.0 * p + 2.0));
        }
        out.per_layer.push_back(gamma_sum);
        aggregate += std::pow(alpha, 2.0 * p / (3.0 * p + 2.0)) * gamma_sum;
    }
    out.xi = std::pow(aggregate, (3.0 * p + 2.0) / (2.0 * (p + 2.0))) *
             std::pow(nd, (p + 1.0) / (p + 2.0));
    out.main_term = cfg.univ_const * cfg.loss_lipschitz * cfg.readout_radius / ctx.sqrt_n *
                    std::pow(cfg.act_lipschitz, p / (p + 2.0)) * out.xi * std::sqrt(ctx.log_nt);
    out.readout_term = ctx.readout;
    out.confidence_term = ctx.confidence;
    out.total = out.main_term + out.readout_term + out.confidence_term;
    return out;
}

double head_entropy(const BoundConfig& cfg, double p_qk, double cs_qk, double c2_qk,
                    double p_v, double cs_v, double c2_v, double eps) {
    const double b = cfg.input_row_bound;
    const double eps_qk = eps / (4.0 * c2_v * b * b);
    const double eps_v = eps / 2.0;
    const std::int64_t nd = cfg.hidden_dim;
    return interp_entropy(nd, nd, p_qk, cs_qk, c2_qk, b, eps_qk, cfg.n, cfg.token_len).bound +
           interp_entropy(nd, nd, p_v, cs_v, c2_v, b, eps_v, cfg.n, cfg.token_len).bound;
}

double block_entropy(const BoundConfig& cfg, const LayerRadii::Entry& e, double eps,
                     double input_bound) {
    const double b = input_bound;
    const double lphi = cfg.act_lipschitz;
    const double eps_qk = eps / (6.0 * lphi * e.c2_v * e.c2_m * b * b);
    const double eps_v = eps / (3.0 * lphi * e.c2_m);
    const double eps_m = eps / 3.0;
    const std::int64_t nd = cfg.hidden_dim;
    return interp_entropy(nd, nd, e.p_qk, e.cs_qk, e.c2_qk, b, eps_qk, cfg.n, cfg.token_len).bound +
           interp_entropy(nd, nd, e.p_v, e.cs_v, e.c2_v, b, eps_v, cfg.n, cfg.token_len).bound +
           interp_entropy(nd, nd, e.p_m, e.cs_m, e.c2_m, lphi, eps_m, cfg.n, cfg.token_len).bound;
}

double multilayer_entropy(const LayerRadii& radii, const BoundConfig& cfg, double eps) {
    cfg.validate();
    const double lphi = cfg.act_lipschitz;
    const double cout = cfg.readout_radius;
    const double depth = static_cast<double>(cfg.depth);
    const std::int64_t nd = cfg.hidden_dim;
    double total = 0.0;
    for (std::int64_t ell = 1; ell <= cfg.depth; ++ell) {
        const LayerRadii::Entry& e = radii.layers[static_cast<std::size_t>(ell - 1)];
        const double alpha = propagation_alpha(ell, radii, lphi);
        const double b = ell == 1 ? cfg.input_row_bound : 1.0;
        const double eps_qk = eps / (12.0 * depth * lphi * cout * alpha * e.c2_v * e.c2_m * b * b);
        const double eps_v = eps / (6.0 * depth * lphi * cout * alpha * e.c2_m);
        const double eps_m = eps / (6.0 * depth * cout * alpha);
        total += interp_entropy(nd, nd, e.p_qk, e.cs_qk, e.c2_qk, b, eps_qk, cfg.n, cfg.token_len).bound;
        total += interp_entropy(nd, nd, e.p_v, e.cs_v, e.c2_v, b, eps_v, cfg.n, cfg.token_len).bound;
        total += interp_entropy(nd, nd, e.p_m, e.cs_m, e.c2_m, lphi, eps_m, cfg.n, cfg.token_len).bound;
    }
    total += linear_scalar_entropy(cout, 1.0, eps / 2.0, cfg.n);
    return total;
}

}  // namespace specproxy::bounds
