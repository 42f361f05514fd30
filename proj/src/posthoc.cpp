#include "specproxy/posthoc.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace specproxy::posthoc {

ShellIndex shell_index(double schatten_power) {
    if (!(schatten_power >= 0.0) || !std::isfinite(schatten_power)) {
        throw std::invalid_argument("shell_index: value must be finite and nonnegative");
    }
    if (schatten_power == 0.0) {
        return std::nullopt;
    }
    auto j = static_cast<std::int64_t>(std::ceil(std::log2(schatten_power)));
    // repair round-off at dyadic boundaries: enforce 2^(j-1) < v <= 2^j
    while (std::exp2(static_cast<double>(j - 1)) >= schatten_power) {
        --j;
    }
    while (std::exp2(static_cast<double>(j)) < schatten_power) {
        ++j;
    }
    return j;
}

double shell_weight(ShellIndex s) {
    constexpr double z = std::numbers::pi * std::numbers::pi / 3.0;
    if (!s.has_value()) {
        return 1.0 / z;
    }
    const double d = 1.0 + static_cast<double>(std::abs(*s));
    return 1.0 / (z * d * d);
}

std::vector<double> IndexGrid::points() const {
    std::vector<double> pts(static_cast<std::size_t>(2 * m + 1));
    for (int k = 0; k <= 2 * m; ++k) {
        pts[static_cast<std::size_t>(k)] = static_cast<double>(k) / static_cast<double>(m);
    }
    return pts;
}

double IndexGrid::project_up(double t) const {
    if (!(t >= 0.0 && t <= 2.0)) {
        throw std::domain_error("IndexGrid::project_up: index outside [0,2]");
    }
    const double md = static_cast<double>(m);
    auto k = static_cast<std::int64_t>(std::ceil(md * t - 1e-9));
    k = std::max<std::int64_t>(0, std::min<std::int64_t>(k, 2 * m));
    return static_cast<double>(k) / md;
}

int IndexGrid::default_m(std::int64_t depth, std::int64_t hidden_dim) {
    return static_cast<int>(
        std::ceil(static_cast<double>(depth) + std::log(static_cast<double>(hidden_dim))));
}

WeightSpectra analyze_layers(const std::vector<std::array<Matrix, 3>>& layers, double rank_tol) {
    WeightSpectra out;
    out.reserve(layers.size() * 3);
    std::int64_t ell = 1;
    for (const auto& layer : layers) {
        out.push_back({MatrixKind::qk, ell, singular_values(layer[0], rank_tol)});
        out.push_back({MatrixKind::v, ell, singular_values(layer[1], rank_tol)});
        out.push_back({MatrixKind::m, ell, singular_values(layer[2], rank_tol)});
        ++ell;
    }
    return out;
}

LayerRadii measured_radii(const WeightSpectra& spectra, std::int64_t depth) {
    LayerRadii radii;
    radii.layers.assign(static_cast<std::size_t>(depth), {});
    for (const auto& ws : spectra) {
        if (ws.layer < 1 || ws.layer > depth) {
            throw std::invalid_argument("measured_radii: layer index out of range");
        }
        auto& e = radii.layers[static_cast<std::size_t>(ws.layer - 1)];
        const double c2 = ws.spectrum.sigma_max();
        switch (ws.kind) {
            case MatrixKind::qk: e.c2_qk = c2; break;
            case MatrixKind::v: e.c2_v = c2; break;
            case MatrixKind::m: e.c2_m = c2; break;
        }
    }
    return radii;
}

namespace {

void check_spectra(const WeightSpectra& spectra, const LayerRadii& radii,
                   const BoundConfig& cfg) {
    if (radii.depth() != cfg.depth) {
        throw std::invalid_argument("posthoc: radii depth mismatch");
    }
    if (static_cast<std::int64_t>(spectra.size()) != 3 * cfg.depth) {
        throw std::invalid_argument("posthoc: expected 3L weight spectra");
    }
}

double arch_factor(const WeightSpectrum& ws, const LayerRadii& radii, const BoundConfig& cfg) {
    const double alpha = bounds::propagation_alpha(ws.layer, radii, cfg.act_lipschitz);
    const double gamma = bounds::gamma_factor(ws.kind, ws.layer, radii, cfg);
    return cfg.act_lipschitz * gamma * alpha * static_cast<double>(cfg.depth);
}

double chi_of(const WeightSpectra& spectra, const LayerRadii& radii, const BoundConfig& cfg) {
    double chi = 0.0;
    for (const auto& ws : spectra) {
        const double s1 = ws.spectrum.sigma_max();
        if (s1 <= 0.0) {
            continue;  // maximum over the empty set stays zero
        }
        const double alpha = bounds::propagation_alpha(ws.layer, radii, cfg.act_lipschitz);
        const double gamma = bounds::gamma_factor(ws.kind, ws.layer, radii, cfg);
        const double h = cfg.act_lipschitz * gamma * alpha;
        if (h <= 0.0) {
            throw std::invalid_argument("posthoc: vanishing local factor for a nonzero weight");
        }
        chi = std::max(chi, std::abs(std::log(s1)) + std::abs(std::log(h)));
    }
    return chi;
}

std::int64_t floor_violations_of(const WeightSpectra& spectra, const BoundConfig& cfg) {
    // diagnostic only: c0 = 1 in the exp(-c0(L + log N)) smallness floor
    const double floor = std::exp(-(static_cast<double>(cfg.depth) +
                                    std::log(static_cast<double>(cfg.hidden_dim))));
    std::int64_t count = 0;
    for (const auto& ws : spectra) {
        const double s1 = ws.spectrum.sigma_max();
        if (s1 > 0.0 && s1 < floor) {
            ++count;
        }
    }
    return count;
}

}  // namespace

double penalty_omega(const std::vector<double>& schatten_powers, std::int64_t depth, int m) {
    if (static_cast<std::int64_t>(schatten_powers.size()) != 3 * depth) {
        throw std::invalid_argument("penalty_omega: expected 3L Schatten powers");
    }
    if (m < 1) {
        throw std::invalid_argument("penalty_omega: m >= 1 required");
    }
    double omega = 3.0 * static_cast<double>(depth) * std::log(2.0 * m + 1.0);
    for (double v : schatten_powers) {
        omega += std::log(1.0 / shell_weight(shell_index(v)));
    }
    return omega;
}

double complexity_term(const Spectrum& s, double p, double arch_factor,
                       std::int64_t hidden_dim) {
    const double sp = schatten_power(s, p);
    if (sp == 0.0) {
        return 0.0;
    }
    return std::pow(sp, 1.0 / (p + 2.0)) * std::pow(arch_factor, p / (p + 2.0)) *
           std::pow(static_cast<double>(hidden_dim), (p + 1.0) / (p + 2.0));
}

PosthocReport complexity_B(const WeightSpectra& spectra, const std::vector<double>& p_vec,
                           const LayerRadii& radii, const BoundConfig& cfg) {
    check_spectra(spectra, radii, cfg);
    if (p_vec.size() != spectra.size()) {
        throw std::invalid_argument("complexity_B: index vector length mismatch");
    }
    PosthocReport report;
    report.per_matrix.reserve(spectra.size());
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const auto& ws = spectra[i];
        const double p = p_vec[i];
        const double h = arch_factor(ws, radii, cfg);
        PosthocTerm t;
        t.kind = ws.kind;
        t.layer = ws.layer;
        t.p = p;
        t.schatten = schatten_power(ws.spectrum, p);
        t.term = complexity_term(ws.spectrum, p, h, cfg.hidden_dim);
        report.complexity += t.term;
        report.per_matrix.push_back(t);
    }
    report.chi = chi_of(spectra, radii, cfg);
    report.floor_violations = floor_violations_of(spectra, cfg);
    return report;
}

PosthocReport select_indices(const WeightSpectra& spectra, const LayerRadii& radii,
                             const BoundConfig& cfg, int m) {
    check_spectra(spectra, radii, cfg);
    const IndexGrid grid(m);
    const std::vector<double> pts = grid.points();

    PosthocReport report;
    report.m = m;
    report.per_matrix.reserve(spectra.size());
    std::vector<double> chosen_powers;
    chosen_powers.reserve(spectra.size());
    for (const auto& ws : spectra) {
        const double h = arch_factor(ws, radii, cfg);
        PosthocTerm best;
        best.kind = ws.kind;
        best.layer = ws.layer;
        bool have = false;
        for (double p : pts) {
            const double term = complexity_term(ws.spectrum, p, h, cfg.hidden_dim);
            // ties (within round-off) keep the smaller index
            if (!have || term < best.term * (1.0 - 1e-12)) {
                best.p = p;
                best.term = term;
                best.schatten = schatten_power(ws.spectrum, p);
                have = true;
            }
        }
        report.complexity += best.term;
        chosen_powers.push_back(best.schatten);
        report.per_matrix.push_back(best);
    }
    report.omega = penalty_omega(chosen_powers, cfg.depth, m);
    report.chi = chi_of(spectra, radii, cfg);
    report.floor_violations = floor_violations_of(spectra, cfg);
    return report;
}

BoundBreakdown posthoc_bound(const WeightSpectra& spectra, const LayerRadii& radii,
                             const BoundConfig& cfg, int m, const std::vector<double>& p_vec) {
    cfg.validate();
    check_spectra(spectra, radii, cfg);
    if (p_vec.size() != spectra.size()) {
        throw std::invalid_argument("posthoc_bound: index vector length mismatch");
    }
    const IndexGrid grid(m);
    std::vector<double> projected(p_vec.size());
    for (std::size_t i = 0; i < p_vec.size(); ++i) {
        projected[i] = grid.project_up(p_vec[i]);
    }

    const PosthocReport at_grid = complexity_B(spectra, projected, radii, cfg);
    std::vector<double> powers;
    powers.reserve(at_grid.per_matrix.size());
    for (const auto& t : at_grid.per_matrix) {
        powers.push_back(t.schatten);
    }
    const double omega = penalty_omega(powers, cfg.depth, m);

    const double n = static_cast<double>(cfg.n);
    const double depth = static_cast<double>(cfg.depth);
    const double nd = static_cast<double>(cfg.hidden_dim);
    const double md = static_cast<double>(m);
    const double rounding = std::exp(at_grid.chi / md) * std::pow(depth, 1.0 / (2.0 * md)) *
                            std::pow(nd, 1.0 / (4.0 * md));

    BoundBreakdown out;
    for (const auto& t : at_grid.per_matrix) {
        out.per_matrix.push_back(t.term);
    }
    out.main_term = cfg.univ_const * cfg.loss_lipschitz * cfg.readout_radius *
                    std::sqrt(std::log(n * static_cast<double>(cfg.token_len)) / n) * rounding *
                    at_grid.complexity;
    out.penalty_term =
        cfg.univ_const * cfg.loss_bound * std::sqrt((std::log(1.0 / cfg.delta) + omega) / n);
    out.readout_term = cfg.univ_const * cfg.loss_lipschitz * cfg.readout_radius *
                       std::pow(std::log(n), 1.5) / std::sqrt(n);
    out.total = out.main_term + out.penalty_term + out.readout_term;
    return out;
}

}  // namespace specproxy::posthoc
