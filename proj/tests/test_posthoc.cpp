#include "specproxy/posthoc.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace specproxy;
using namespace specproxy::posthoc;

namespace {

Spectrum make_spectrum(std::vector<double> values, Index n) {
    Spectrum s;
    s.values = std::move(values);
    s.rows = s.cols = n;
    s.rank_tol = default_rank_tol(n, n);
    return s;
}

Spectrum flat_spectrum(Index n, double value) {
    return make_spectrum(std::vector<double>(static_cast<std::size_t>(n), value), n);
}

}  // namespace

TEST_CASE("shell index") {
    CHECK(!shell_index(0.0).has_value());
    CHECK(shell_index(1.0) == 0);
    CHECK(shell_index(5.0) == 3);
    CHECK(shell_index(8.0) == 3);           // 4 < 8 <= 8
    CHECK(shell_index(8.0000001) == 4);     // just above the boundary
    CHECK(shell_index(0.25) == -2);
    CHECK_THROWS_AS(shell_index(-1.0), std::invalid_argument);

    // dyadic bracket invariant
    for (double v : {0.001, 0.7, 1.0, 3.9, 1024.0, 7.3e9}) {
        const auto j = shell_index(v);
        REQUIRE(j.has_value());
        CHECK(std::exp2(double(*j - 1)) < v);
        CHECK(v <= std::exp2(double(*j)));
    }
}

TEST_CASE("shell weights") {
    const double z = std::numbers::pi * std::numbers::pi / 3.0;
    CHECK(shell_weight(std::nullopt) == doctest::Approx(3.0 / (std::numbers::pi * std::numbers::pi))
                                            .epsilon(1e-14));
    CHECK(shell_weight(std::nullopt) == doctest::Approx(0.3039636).epsilon(1e-6));
    CHECK(shell_weight(std::int64_t{0}) == doctest::Approx(1.0 / z).epsilon(1e-14));
    CHECK(shell_weight(std::int64_t{3}) == doctest::Approx(0.0189977).epsilon(1e-5));
    CHECK(shell_weight(std::int64_t{-3}) == shell_weight(std::int64_t{3}));
}

TEST_CASE("penalty omega") {
    // L = 1, m = 1, all matrices zero
    const double expect = 3.0 * std::log(3.0) +
                          3.0 * std::log(std::numbers::pi * std::numbers::pi / 3.0);
    CHECK(penalty_omega({0.0, 0.0, 0.0}, 1, 1) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(penalty_omega({0.0, 0.0, 0.0}, 1, 1) == doctest::Approx(6.8683).epsilon(1e-4));

    // moving one shell from kappa = 0 to kappa = 5 strictly increases omega
    const double at0 = penalty_omega({1.0, 1.0, 1.0}, 1, 2);
    const double at5 = penalty_omega({20.0, 1.0, 1.0}, 1, 2);  // kappa(20) = 5
    CHECK(at5 > at0);

    // direct-sum oracle at BERT-like scale
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 300.0);
    std::vector<double> powers(36);
    for (auto& v : powers) {
        v = unit(rng);
    }
    const int m = 9;
    double direct = 36.0 * std::log(2.0 * m + 1.0);
    for (double v : powers) {
        const auto j = shell_index(v);
        direct += std::log(1.0 / shell_weight(j));
    }
    CHECK(penalty_omega(powers, 12, m) == doctest::Approx(direct).epsilon(1e-12));

    CHECK_THROWS_AS(penalty_omega({1.0, 1.0}, 1, 1), std::invalid_argument);
}

TEST_CASE("index grid") {
    const IndexGrid grid(7);
    const auto pts = grid.points();
    REQUIRE(pts.size() == 15);
    CHECK(pts.front() == 0.0);
    CHECK(pts.back() == 2.0);

    for (double p : pts) {
        CHECK(grid.project_up(p) == p);  // grid points are fixed points
    }
    CHECK(grid.project_up(0.15) == doctest::Approx(2.0 / 7.0));
    CHECK(grid.project_up(1.999) == 2.0);
    CHECK_THROWS_AS(grid.project_up(2.5), std::domain_error);
    CHECK_THROWS_AS(IndexGrid(0), std::invalid_argument);

    CHECK(IndexGrid::default_m(2, 128) == 7);
    CHECK(IndexGrid::default_m(12, 768) == 19);
}

TEST_CASE("complexity term") {
    // p = 0: sqrt(rank N), independent of the architectural factor
    const Spectrum r8 = make_spectrum({1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, 10);
    CHECK(complexity_term(r8, 0.0, 123.0, 128) ==
          doctest::Approx(std::sqrt(8.0 * 128.0)).epsilon(1e-13));

    // p = 2: (|W|_F^2)^{1/4} H^{1/2} N^{3/4}
    const Spectrum two = make_spectrum({2.0, 1.0}, 4);
    const double h = 3.0;
    CHECK(complexity_term(two, 2.0, h, 16) ==
          doctest::Approx(std::pow(5.0, 0.25) * std::sqrt(h) * std::pow(16.0, 0.75))
              .epsilon(1e-13));

    // identity weights, single layer, p = 1, all radii one: (L_phi gamma)^{1/3} N
    {
        bounds::BoundConfig cfg;
        cfg.depth = 1;
        cfg.hidden_dim = 16;
        cfg.act_lipschitz = 1.0;
        const bounds::LayerRadii ones = bounds::LayerRadii::uniform(1, 1.0, 0.0, 1.0);
        const Spectrum eye = flat_spectrum(16, 1.0);
        for (bounds::MatrixKind kind :
             {bounds::MatrixKind::qk, bounds::MatrixKind::v, bounds::MatrixKind::m}) {
            const double gamma = bounds::gamma_factor(kind, 1, ones, cfg);
            const double arch = cfg.act_lipschitz * gamma * 1.0 * 1.0;
            CHECK(complexity_term(eye, 1.0, arch, 16) ==
                  doctest::Approx(std::pow(cfg.act_lipschitz * gamma, 1.0 / 3.0) * 16.0)
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("select indices") {
    bounds::BoundConfig cfg;
    cfg.depth = 1;
    cfg.hidden_dim = 128;
    cfg.act_lipschitz = 1.0;

    SUBCASE("zero matrix ties resolve to p = 0") {
        WeightSpectra spectra{{bounds::MatrixKind::qk, 1, make_spectrum({0, 0, 0}, 128)},
                              {bounds::MatrixKind::v, 1, flat_spectrum(128, 1.0)},
                              {bounds::MatrixKind::m, 1, flat_spectrum(128, 1.0)}};
        const auto radii = measured_radii(spectra, 1);
        const auto report = select_indices(spectra, radii, cfg, 3);
        CHECK(report.per_matrix[0].p == 0.0);
        CHECK(report.per_matrix[0].term == 0.0);
    }

    SUBCASE("deep-layer rank-8 matrix selects p = 0 (full grid oracle)") {
        // architectural factor 5^8 as for a deep layer with unit radii
        const Spectrum r8 = make_spectrum(
            std::vector<double>{1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, 128);
        const double arch = std::pow(5.0, 8.0);
        const IndexGrid grid(4);
        double best = std::numeric_limits<double>::infinity();
        double best_p = -1.0;
        for (double p : grid.points()) {
            const double term = complexity_term(r8, p, arch, 128);
            if (term < best * (1.0 - 1e-12)) {
                best = term;
                best_p = p;
            }
        }
        CHECK(best_p == 0.0);
        CHECK(best == doctest::Approx(std::sqrt(8.0 * 128.0)));
    }

    SUBCASE("flat spectrum with unit factor ties across the whole grid") {
        // gamma = 1 for the m kind; alpha = 1 at the last layer; L = 1
        WeightSpectra spectra{{bounds::MatrixKind::qk, 1, make_spectrum({0, 0}, 128)},
                              {bounds::MatrixKind::v, 1, make_spectrum({0, 0}, 128)},
                              {bounds::MatrixKind::m, 1, flat_spectrum(128, 1.0)}};
        bounds::LayerRadii radii = measured_radii(spectra, 1);
        const auto report = select_indices(spectra, radii, cfg, 5);
        CHECK(report.per_matrix[2].p == 0.0);
        CHECK(report.per_matrix[2].term == doctest::Approx(128.0).epsilon(1e-12));
    }
}

TEST_CASE("posthoc bound") {
    bounds::BoundConfig cfg;
    cfg.n = 5000;
    cfg.token_len = 64;
    cfg.depth = 2;
    cfg.hidden_dim = 32;
    cfg.act_lipschitz = 1.13;
    cfg.delta = 0.05;

    SUBCASE("all-zero weights keep only penalty and readout terms") {
        WeightSpectra spectra;
        for (std::int64_t ell = 1; ell <= 2; ++ell) {
            spectra.push_back({bounds::MatrixKind::qk, ell, make_spectrum({0, 0}, 32)});
            spectra.push_back({bounds::MatrixKind::v, ell, make_spectrum({0, 0}, 32)});
            spectra.push_back({bounds::MatrixKind::m, ell, make_spectrum({0, 0}, 32)});
        }
        // zero radii would degenerate gamma * alpha; keep prescribed unit radii
        const bounds::LayerRadii radii = bounds::LayerRadii::uniform(2, 1.0, 0.0, 0.0);
        const auto b = posthoc_bound(spectra, radii, cfg, 7, std::vector<double>(6, 0.0));
        CHECK(b.main_term == 0.0);
        CHECK(b.total == doctest::Approx(b.penalty_term + b.readout_term).epsilon(1e-13));
    }

    SUBCASE("independent transcription of a synthetic two-layer instance") {
        std::mt19937_64 rng(91);
        std::uniform_real_distribution<double> unit(0.3, 2.0);
        WeightSpectra spectra;
        std::vector<double> p_vec;
        for (std::int64_t ell = 1; ell <= 2; ++ell) {
            for (int k = 0; k < 3; ++k) {
                std::vector<double> vals(8);
                double v = unit(rng) * 2.0;
                for (auto& x : vals) {
                    x = v;
                    v *= 0.6;
                }
                spectra.push_back({k == 0   ? bounds::MatrixKind::qk
                                   : k == 1 ? bounds::MatrixKind::v
                                            : bounds::MatrixKind::m,
                                   ell, make_spectrum(std::move(vals), 32)});
                p_vec.push_back(unit(rng));
            }
        }
        const bounds::LayerRadii radii = measured_radii(spectra, 2);
        const int m = 7;
        const auto got = posthoc_bound(spectra, radii, cfg, m, p_vec);

        // transcription: projection, complexity, penalty, rounding, three terms
        const IndexGrid grid(m);
        double complexity = 0.0;
        double omega = 6.0 * std::log(2.0 * m + 1.0);
        double chi = 0.0;
        for (std::size_t i = 0; i < spectra.size(); ++i) {
            const double p = grid.project_up(p_vec[i]);
            const auto& ws = spectra[i];
            const double alpha =
                bounds::propagation_alpha(ws.layer, radii, cfg.act_lipschitz);
            const double gamma = bounds::gamma_factor(ws.kind, ws.layer, radii, cfg);
            const double sp = schatten_power(ws.spectrum, p);
            const double arch = cfg.act_lipschitz * gamma * alpha * 2.0;
            complexity += std::pow(sp, 1.0 / (p + 2.0)) * std::pow(arch, p / (p + 2.0)) *
                          std::pow(32.0, (p + 1.0) / (p + 2.0));
            omega += std::log(1.0 / shell_weight(shell_index(sp)));
            chi = std::max(chi, std::abs(std::log(ws.spectrum.sigma_max())) +
                                    std::abs(std::log(cfg.act_lipschitz * gamma * alpha)));
        }
        const double n = 5000.0;
        const double rounding =
            std::exp(chi / m) * std::pow(2.0, 1.0 / (2.0 * m)) * std::pow(32.0, 1.0 / (4.0 * m));
        const double main = std::sqrt(std::log(n * 64.0) / n) * rounding * complexity;
        const double penalty = std::sqrt((std::log(1.0 / 0.05) + omega) / n);
        const double readout = std::pow(std::log(n), 1.5) / std::sqrt(n);
        CHECK(got.main_term == doctest::Approx(main).epsilon(1e-12));
        CHECK(got.penalty_term == doctest::Approx(penalty).epsilon(1e-12));
        CHECK(got.readout_term == doctest::Approx(readout).epsilon(1e-12));
        CHECK(got.total == doctest::Approx(main + penalty + readout).epsilon(1e-12));
    }

    SUBCASE("n below 3 is rejected") {
        cfg.n = 2;
        const bounds::LayerRadii radii = bounds::LayerRadii::uniform(2, 1.0, 0.0, 0.0);
        WeightSpectra spectra;
        for (std::int64_t ell = 1; ell <= 2; ++ell) {
            spectra.push_back({bounds::MatrixKind::qk, ell, make_spectrum({0, 0}, 32)});
            spectra.push_back({bounds::MatrixKind::v, ell, make_spectrum({0, 0}, 32)});
            spectra.push_back({bounds::MatrixKind::m, ell, make_spectrum({0, 0}, 32)});
        }
        CHECK_THROWS_AS(posthoc_bound(spectra, radii, cfg, 7, std::vector<double>(6, 0.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("grid refinement never hurts and omega is permutation invariant") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> unit(0.2, 3.0);
    bounds::BoundConfig cfg;
    cfg.depth = 2;
    cfg.hidden_dim = 24;
    cfg.act_lipschitz = 1.0;

    for (int t = 0; t < 20; ++t) {
        WeightSpectra spectra;
        for (std::int64_t ell = 1; ell <= 2; ++ell) {
            for (int k = 0; k < 3; ++k) {
                std::vector<double> vals(12);
                double v = unit(rng);
                for (auto& x : vals) {
                    x = v;
                    v *= 0.5 + 0.4 * unit(rng) / 3.0;
                }
                spectra.push_back({k == 0   ? bounds::MatrixKind::qk
                                   : k == 1 ? bounds::MatrixKind::v
                                            : bounds::MatrixKind::m,
                                   ell, make_spectrum(std::move(vals), 24)});
            }
        }
        const auto radii = measured_radii(spectra, 2);
        const int m = 1 + t % 3;
        const auto coarse = select_indices(spectra, radii, cfg, m);
        for (int mult = 2; mult <= 3; ++mult) {
            const auto fine = select_indices(spectra, radii, cfg, m * mult);
            CHECK(fine.complexity <= coarse.complexity * (1.0 + 1e-12));
        }

        std::vector<double> powers;
        for (const auto& t2 : coarse.per_matrix) {
            powers.push_back(t2.schatten);
        }
        const double om = penalty_omega(powers, 2, m);
        std::swap(powers[0], powers[2]);
        std::swap(powers[3], powers[5]);
        CHECK(penalty_omega(powers, 2, m) == doctest::Approx(om).epsilon(1e-13));
    }
}
