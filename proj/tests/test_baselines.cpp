#include "specproxy/baselines.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace specproxy;
using namespace specproxy::baselines;

namespace {

Matrix from_rng(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
    const auto data = oracles::random_array(rng, static_cast<std::size_t>(rows * cols), scale);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = data[static_cast<std::size_t>(i * cols + j)];
        }
    }
    return m;
}

bounds::BoundConfig config_for(std::int64_t depth) {
    bounds::BoundConfig cfg;
    cfg.n = 1000;
    cfg.token_len = 32;
    cfg.hidden_dim = 16;
    cfg.depth = depth;
    cfg.act_lipschitz = 1.0;
    return cfg;
}

}  // namespace

TEST_CASE("edelman factor closed form") {
    const bounds::BoundConfig cfg = config_for(1);
    const bounds::LayerRadii ones = bounds::LayerRadii::uniform(1, 1.0, 0.0, 0.0);

    MixedRadii mixed;
    mixed.layers.push_back({1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    const BaselineResult r = edelman_factor(mixed, ones, cfg);
    const double xi = 2.0 + std::pow(2.0, 2.0 / 3.0);
    CHECK(r.leading == doctest::Approx(std::pow(1.0 + xi, 1.5)).epsilon(1e-13));
    CHECK(r.leading == doctest::Approx(9.825).epsilon(1e-3));

    MixedRadii zero;
    zero.layers.push_back({});
    CHECK(edelman_factor(zero, ones, cfg).leading == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("edelman factor transcription oracle and monotonicity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.2, 2.5);
    for (int t = 0; t < 50; ++t) {
        const std::int64_t depth = 1 + t % 3;
        bounds::BoundConfig cfg = config_for(depth);
        cfg.act_lipschitz = unit(rng);
        bounds::LayerRadii radii = bounds::LayerRadii::uniform(depth, 1.0, 0.0, 0.0);
        MixedRadii mixed;
        for (auto& e : radii.layers) {
            e.c2_qk = unit(rng);
            e.c2_v = unit(rng);
            e.c2_m = unit(rng);
            mixed.layers.push_back({unit(rng), unit(rng), unit(rng), 0.0, 0.0, 0.0});
        }
        const BaselineResult got = edelman_factor(mixed, radii, cfg);

        double acc = 1.0;
        for (std::int64_t ell = 1; ell <= depth; ++ell) {
            const auto& me = mixed.layers[static_cast<std::size_t>(ell - 1)];
            const auto& re = radii.layers[static_cast<std::size_t>(ell - 1)];
            double alpha = 1.0;
            for (std::int64_t k = ell + 1; k <= depth; ++k) {
                const auto& rk = radii.layers[static_cast<std::size_t>(k - 1)];
                alpha *= cfg.act_lipschitz * rk.c2_m * rk.c2_v * (1.0 + 4.0 * rk.c2_qk);
            }
            const double xi =
                std::pow(me.c21_m, 2.0 / 3.0) +
                std::pow(2.0 * cfg.act_lipschitz * re.c2_m * re.c2_v * me.c21_qk, 2.0 / 3.0) +
                std::pow(cfg.act_lipschitz * re.c2_m * me.c21_v, 2.0 / 3.0);
            acc += std::pow(alpha, 2.0 / 3.0) * xi;
        }
        CHECK(got.leading == doctest::Approx(std::pow(acc, 1.5)).epsilon(1e-12));

        MixedRadii bumped = mixed;
        bumped.layers[0].c21_qk += 0.7;
        CHECK(edelman_factor(bumped, radii, cfg).leading >= got.leading);
    }
}

TEST_CASE("trauger factor") {
    bounds::BoundConfig cfg = config_for(1);
    cfg.input_row_bound = 1.0;
    const BaselineResult r = trauger_factor(1.0, 1.0, 1.0, 1.0, cfg);
    CHECK(r.leading ==
          doctest::Approx(std::pow(2.0 + std::pow(2.0, 2.0 / 3.0), 1.5)).epsilon(1e-13));
    CHECK(r.leading == doctest::Approx(6.7946).epsilon(1e-3));

    CHECK(trauger_factor(0.0, 1.0, 1.0, 1.0, cfg).leading == 0.0);

    // transcription oracle over random instances
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.3, 2.0);
    for (int t = 0; t < 50; ++t) {
        bounds::BoundConfig c = config_for(1 + t % 4);
        c.act_lipschitz = unit(rng);
        c.input_row_bound = unit(rng);
        const double c11 = unit(rng), qk = unit(rng), v = unit(rng), m = unit(rng);
        const BaselineResult got = trauger_factor(c11, qk, v, m, c);

        const double per = c.act_lipschitz * m * v * (1.0 + 4.0 * qk);
        double acc = 1.0 + std::pow(c.act_lipschitz * v, 2.0 / 3.0);
        for (std::int64_t ell = 1; ell <= c.depth; ++ell) {
            const double alpha = std::pow(per, double(c.depth - ell));
            const double up =
                ell == 1 ? std::pow(2.0 * c.act_lipschitz * m * v * c.input_row_bound, 2.0 / 3.0)
                         : 1.0 + std::pow(2.0 * c.act_lipschitz * m * v, 2.0 / 3.0) +
                               std::pow(c.act_lipschitz * v, 2.0 / 3.0);
            acc += std::pow(alpha, 2.0 / 3.0) * up;
        }
        CHECK(got.leading == doctest::Approx(c11 * std::pow(acc, 1.5)).epsilon(1e-12));
    }
}

TEST_CASE("conversion bounds") {
    const Index n = 9;
    const auto eye = conversion_bounds(Matrix::Identity(n, n));
    CHECK(eye.mixed21 == doctest::Approx(double(n)).epsilon(1e-13));
    CHECK(eye.sqrtN_frob == doctest::Approx(double(n)).epsilon(1e-13));
    CHECK(eye.sqrtNrank_spec == doctest::Approx(double(n)).epsilon(1e-13));

    std::mt19937_64 rng(23);
    // rank-one outer product: chains hold with strict slack generically
    {
        Matrix u = from_rng(rng, n, 1);
        Matrix v = from_rng(rng, n, 1);
        u.normalize();
        v.normalize();
        const auto cb = conversion_bounds(Matrix(u * v.transpose()));
        CHECK(cb.mixed21 < cb.sqrtN_frob);
        CHECK(cb.sqrtN_frob <= cb.sqrtNrank_spec * (1.0 + 1e-12));
        CHECK(cb.mixed11 < cb.N_frob);
    }

    for (int t = 0; t < 200; ++t) {
        const Index size = 3 + t % 10;
        const auto cb = conversion_bounds(from_rng(rng, size, size));
        CHECK(cb.mixed21 <= cb.sqrtN_frob * (1.0 + 1e-9));
        CHECK(cb.sqrtN_frob <= cb.sqrtNrank_spec * (1.0 + 1e-9));
        CHECK(cb.mixed11 <= cb.N_frob * (1.0 + 1e-9));
        CHECK(cb.N_frob <= cb.Nsqrtrank_spec * (1.0 + 1e-9));
    }

    CHECK_THROWS_AS(conversion_bounds(Matrix::Zero(3, 4)), std::invalid_argument);
}

TEST_CASE("regime table cells") {
    const std::int64_t nd = 128, depth = 4;
    const double r = 16.0, cf = 2.0, prop = 2.0;

    const RegimeRow rank = regime_table(Regime::rank, nd, depth, r, prop);
    CHECK(rank.ours.formula == "sqrt(r*L*N)");
    CHECK(rank.edelman.formula == "C^L*L^(3/2)*sqrt(r*N)");
    CHECK(rank.trauger.formula == "C^L*L^(3/2)*sqrt(r)*N");
    CHECK(rank.ours.value == doctest::Approx(std::sqrt(r * depth * nd)).epsilon(1e-13));
    CHECK(rank.edelman.value ==
          doctest::Approx(std::pow(prop, 4.0) * 8.0 * std::sqrt(r * nd)).epsilon(1e-13));
    CHECK(rank.trauger.value ==
          doctest::Approx(std::pow(prop, 4.0) * 8.0 * 4.0 * nd).epsilon(1e-13));

    const RegimeRow spec = regime_table(Regime::spectral_only, nd, depth, 0.0, prop);
    CHECK(spec.ours.formula == "sqrt(L)*N");
    CHECK(spec.edelman.formula == "C^L*L^(3/2)*N");
    CHECK(spec.trauger.formula == "C^L*L^(3/2)*N^(3/2)");
    CHECK(spec.ours.value == doctest::Approx(std::sqrt(4.0) * 128.0).epsilon(1e-13));

    const RegimeRow frob = regime_table(Regime::frobenius, nd, depth, cf, prop);
    CHECK(frob.ours.formula == "sqrt(C_F)*C^(L/2)*L*N^(3/4)");
    CHECK(frob.edelman.formula == "C_F*C^L*L^(3/2)*N^(1/2)");
    CHECK(frob.trauger.formula == "C_F*C^L*L^(3/2)*N");
    CHECK(frob.ours.value == doctest::Approx(std::sqrt(cf) * 4.0 * 4.0 *
                                             std::pow(128.0, 0.75)).epsilon(1e-13));

    CHECK(regime_from_name("rank") == Regime::rank);
    CHECK_THROWS_AS(regime_from_name("nuclear"), std::invalid_argument);
}

TEST_CASE("rank regime ratio decays with depth for C above one") {
    const std::int64_t nd = 64;
    const double r = 8.0, prop = 1.5;
    double prev = std::numeric_limits<double>::infinity();
    for (std::int64_t depth : {1, 2, 4, 8, 16}) {
        const RegimeRow row = regime_table(Regime::rank, nd, depth, r, prop);
        const double ratio = row.ours.value / row.edelman.value;
        CHECK(ratio < prev);
        prev = ratio;
        // ratio equals 1 / (C^L L) exactly in this regime
        CHECK(ratio == doctest::Approx(1.0 / (std::pow(prop, double(depth)) * double(depth)))
                           .epsilon(1e-12));
    }
}
