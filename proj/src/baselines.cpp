#include "specproxy/baselines.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace specproxy::baselines {

MixedRadii MixedRadii::measured(const std::vector<std::array<Matrix, 3>>& weights) {
    MixedRadii out;
    out.layers.reserve(weights.size());
    for (const auto& layer : weights) {
        Entry e;
        e.c21_qk = mixed_norm(layer[0].transpose(), 2.0, 1.0);
        e.c21_v = mixed_norm(layer[1], 2.0, 1.0);
        e.c21_m = mixed_norm(layer[2], 2.0, 1.0);
        e.c11_qk = mixed_norm(layer[0], 1.0, 1.0);
        e.c11_v = mixed_norm(layer[1], 1.0, 1.0);
        e.c11_m = mixed_norm(layer[2], 1.0, 1.0);
        out.layers.push_back(e);
    }
    return out;
}

BaselineResult edelman_factor(const MixedRadii& mixed, const LayerRadii& radii,
                              const BoundConfig& cfg) {
    if (mixed.depth() != radii.depth()) {
        throw std::invalid_argument("edelman_factor: depth mismatch");
    }
    const double lphi = cfg.act_lipschitz;
    double acc = 1.0;
    for (std::int64_t ell = 1; ell <= radii.depth(); ++ell) {
        const auto& me = mixed.layers[static_cast<std::size_t>(ell - 1)];
        const auto& re = radii.layers[static_cast<std::size_t>(ell - 1)];
        const double xi = std::pow(me.c21_m, 2.0 / 3.0) +
                          std::pow(2.0 * lphi * re.c2_m * re.c2_v * me.c21_qk, 2.0 / 3.0) +
                          std::pow(lphi * re.c2_m * me.c21_v, 2.0 / 3.0);
        const double alpha = bounds::propagation_alpha(ell, radii, lphi);
        acc += std::pow(alpha, 2.0 / 3.0) * xi;
    }
    BaselineResult out;
    out.leading = std::pow(acc, 1.5);
    const double n = static_cast<double>(cfg.n);
    out.full = cfg.univ_const *
               (cfg.loss_lipschitz * cfg.readout_radius * out.leading *
                    std::sqrt(std::log(static_cast<double>(cfg.hidden_dim) * n *
                                       static_cast<double>(cfg.token_len)) /
                              n) +
                cfg.loss_bound * std::sqrt(std::log(1.0 / cfg.delta) / n));
    return out;
}

BaselineResult trauger_factor(double c11, double c2_qk, double c2_v, double c2_m,
                              const BoundConfig& cfg) {
    if (c11 < 0.0) {
        throw std::invalid_argument("trauger_factor: negative radius");
    }
    const double lphi = cfg.act_lipschitz;
    const double per_layer = lphi * c2_m * c2_v * (1.0 + 4.0 * c2_qk);
    double acc = 1.0 + std::pow(lphi * c2_v, 2.0 / 3.0);
    const double upsilon_tail = 1.0 + std::pow(2.0 * lphi * c2_m * c2_v, 2.0 / 3.0) +
                                std::pow(lphi * c2_v, 2.0 / 3.0);
    for (std::int64_t ell = 1; ell <= cfg.depth; ++ell) {
        const double alpha = std::pow(per_layer, static_cast<double>(cfg.depth - ell));
        const double upsilon =
            ell == 1
                ? std::pow(2.0 * lphi * c2_m * c2_v * cfg.input_row_bound, 2.0 / 3.0)
                : upsilon_tail;
        acc += std::pow(alpha, 2.0 / 3.0) * upsilon;
    }
    BaselineResult out;
    out.leading = c11 * std::pow(acc, 1.5);
    const double n = static_cast<double>(cfg.n);
    const double nd = static_cast<double>(cfg.hidden_dim);
    out.full = cfg.univ_const *
               (cfg.loss_lipschitz * cfg.readout_radius * out.leading *
                    std::sqrt(std::log(2.0 * nd * nd + 1.0) / n) +
                cfg.loss_bound * std::sqrt(std::log(1.0 / cfg.delta) / n));
    return out;
}

ConversionBounds conversion_bounds(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("conversion_bounds: square matrix required");
    }
    const double nd = static_cast<double>(m.rows());
    const Spectrum s = singular_values(m);
    const double rank = static_cast<double>(numerical_rank(s));
    const double frob = frobenius_norm(m);
    const double spec = spectral_norm(s);
    ConversionBounds out;
    out.mixed21 = mixed_norm(m, 2.0, 1.0);
    out.sqrtN_frob = std::sqrt(nd) * frob;
    out.sqrtNrank_spec = std::sqrt(nd * rank) * spec;
    out.mixed11 = mixed_norm(m, 1.0, 1.0);
    out.N_frob = nd * frob;
    out.Nsqrtrank_spec = nd * std::sqrt(rank) * spec;
    return out;
}

Regime regime_from_name(const std::string& name) {
    if (name == "frobenius") return Regime::frobenius;
    if (name == "rank") return Regime::rank;
    if (name == "spectral-only" || name == "spectral_only") return Regime::spectral_only;
    throw std::invalid_argument("unknown regime: " + name);
}

RegimeRow regime_table(Regime regime, std::int64_t hidden_dim, std::int64_t depth,
                       double c, double prop) {
    if (hidden_dim < 1 || depth < 1 || prop <= 0.0) {
        throw std::invalid_argument("regime_table: positive parameters required");
    }
    const double nd = static_cast<double>(hidden_dim);
    const double ld = static_cast<double>(depth);
    RegimeRow row;
    switch (regime) {
        case Regime::frobenius: {
            if (c < 0.0) throw std::invalid_argument("regime_table: negative radius");
            row.ours = {std::sqrt(c) * std::pow(prop, ld / 2.0) * ld * std::pow(nd, 0.75),
                        "sqrt(C_F)*C^(L/2)*L*N^(3/4)"};
            row.edelman = {c * std::pow(prop, ld) * std::pow(ld, 1.5) * std::sqrt(nd),
                           "C_F*C^L*L^(3/2)*N^(1/2)"};
            row.trauger = {c * std::pow(prop, ld) * std::pow(ld, 1.5) * nd,
                           "C_F*C^L*L^(3/2)*N"};
            break;
        }
        case Regime::rank: {
            if (c < 0.0) throw std::invalid_argument("regime_table: negative rank");
            row.ours = {std::sqrt(c * ld * nd), "sqrt(r*L*N)"};
            row.edelman = {std::pow(prop, ld) * std::pow(ld, 1.5) * std::sqrt(c * nd),
                           "C^L*L^(3/2)*sqrt(r*N)"};
            row.trauger = {std::pow(prop, ld) * std::pow(ld, 1.5) * std::sqrt(c) * nd,
                           "C^L*L^(3/2)*sqrt(r)*N"};
            break;
        }
        case Regime::spectral_only: {
            row.ours = {std::sqrt(ld) * nd, "sqrt(L)*N"};
            row.edelman = {std::pow(prop, ld) * std::pow(ld, 1.5) * nd, "C^L*L^(3/2)*N"};
            row.trauger = {std::pow(prop, ld) * std::pow(ld, 1.5) * std::pow(nd, 1.5),
                           "C^L*L^(3/2)*N^(3/2)"};
            break;
        }
    }
    return row;
}

}  // namespace specproxy::baselines
