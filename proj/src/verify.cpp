#include "specproxy/verify.hpp"

#include "specproxy/baselines.hpp"
#include "specproxy/bounds.hpp"
#include "specproxy/ingest.hpp"
#include "specproxy/model.hpp"
#include "specproxy/posthoc.hpp"
#include "specproxy/spectral.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace specproxy::verify {

using nlohmann::json;

bool SuiteResult::passed() const {
    return std::all_of(properties.begin(), properties.end(),
                       [](const PropertyResult& p) { return p.passed(); });
}

namespace {

/// Records one inequality check lhs <= rhs + slack_budget; slack is the
/// signed violation margin relative to scale.
struct Property {
    PropertyResult result;

    explicit Property(std::string name) { result.name = std::move(name); }

    void check(double lhs, double rhs, double budget, const std::string& instance) {
        ++result.checks;
        const double slack = lhs - rhs - budget;
        result.worst_slack = std::max(result.worst_slack, slack);
        if (slack > 0.0 && result.violations++ == 0) {
            result.failing = instance;
        }
    }

    void check_true(bool ok, const std::string& instance) {
        ++result.checks;
        if (!ok && result.violations++ == 0) {
            result.failing = instance;
        }
    }
};

SuiteResult make_suite(std::string name, std::initializer_list<Property> props) {
    SuiteResult s;
    s.suite = std::move(name);
    for (const auto& p : props) {
        s.properties.push_back(p.result);
    }
    return s;
}

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = gauss(rng);
        }
    }
    return m;
}

std::string describe_matrix(const Matrix& m, const char* tag) {
    std::ostringstream out;
    out << "{\"" << tag << "\": [" << m.rows() << "," << m.cols() << "], \"data\": [";
    const Index cap = std::min<Index>(m.size(), 64);
    for (Index i = 0; i < cap; ++i) {
        out << m(i / m.cols(), i % m.cols());
        if (i + 1 < cap) out << ",";
    }
    out << (m.size() > cap ? ",...]}" : "]}");
    return out.str();
}

// ---------------------------------------------------------------- norms ----

SuiteResult suite_norms(long long trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Property sandwich("schatten_spectral_sandwich");
    Property continuity("schatten_power_continuity");
    Property transpose("singular_values_transpose");
    Property exact_rank("exact_rank_recovery");
    Property chain21("mixed21_conversion_chain");
    Property chain11("mixed11_conversion_chain");
    Property norm_order("two_to_inf_le_spectral_le_frobenius");

    std::uniform_int_distribution<Index> dim(2, 40);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long long t = 0; t < trials; ++t) {
        const Index rows = dim(rng), cols = dim(rng);
        Matrix w = random_matrix(rng, rows, cols);
        const Spectrum s = singular_values(w);
        const double s1 = s.sigma_max();
        const std::string inst = describe_matrix(w, "w");

        // 1 <= rho_q <= rho_p <= min dim for 0 <= p <= q <= 2
        double p = 2.0 * unit(rng), q = 2.0 * unit(rng);
        if (p > q) std::swap(p, q);
        if (t % 4 == 0) p = 0.0;
        if (t % 8 == 0) q = 2.0;
        const double rho_p = schatten_power(s, p) / std::pow(s1, p);
        const double rho_q = schatten_power(s, q) / std::pow(s1, q);
        sandwich.check(1.0, rho_q, 1e-9 * rho_q, inst);
        sandwich.check(rho_q, rho_p, 1e-9 * rho_p, inst);
        sandwich.check(rho_p, static_cast<double>(s.min_dim()),
                       1e-9 * static_cast<double>(s.min_dim()), inst);

        // continuity in p on (0,2] for sigma_1 <= 10
        Spectrum scaled = s;
        if (s1 > 10.0) {
            for (double& v : scaled.values) v *= 10.0 / s1;
        }
        const double pc = 1.9 * unit(rng) + 0.05;
        const double f0 = schatten_power(scaled, pc);
        const double f1 = schatten_power(scaled, pc + 1e-6);
        continuity.check(std::abs(f1 - f0), 1e-4 * (1.0 + f0), 0.0, inst);

        // transpose agreement
        const Spectrum st = singular_values(Matrix(w.transpose()));
        double worst = 0.0;
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            worst = std::max(worst, std::abs(s.values[i] - st.values[i]));
        }
        transpose.check(worst, 1e-10 * std::max(1.0, s1), 0.0, inst);

        // exact rank-r construction
        const Index r = std::max<Index>(1, std::min(rows, cols) / 2);
        const Matrix qu = Eigen::HouseholderQR<Matrix>(random_matrix(rng, rows, r))
                              .householderQ() * Matrix::Identity(rows, r);
        const Matrix qv = Eigen::HouseholderQR<Matrix>(random_matrix(rng, cols, r))
                              .householderQ() * Matrix::Identity(cols, r);
        Matrix lowrank = Matrix::Zero(rows, cols);
        for (Index i = 0; i < r; ++i) {
            lowrank += (1.0 + unit(rng)) * qu.col(i) * qv.col(i).transpose();
        }
        exact_rank.check_true(numerical_rank(singular_values(lowrank)) == r,
                              describe_matrix(lowrank, "lowrank"));

        // conversion chains on a square matrix
        const Index nsq = std::min(rows, cols);
        const Matrix sq = w.topLeftCorner(nsq, nsq);
        const auto cb = baselines::conversion_bounds(sq);
        chain21.check(cb.mixed21, cb.sqrtN_frob, 1e-9 * cb.sqrtN_frob, inst);
        chain21.check(cb.sqrtN_frob, cb.sqrtNrank_spec, 1e-9 * cb.sqrtNrank_spec, inst);
        chain11.check(cb.mixed11, cb.N_frob, 1e-9 * cb.N_frob, inst);
        chain11.check(cb.N_frob, cb.Nsqrtrank_spec, 1e-9 * cb.Nsqrtrank_spec, inst);

        const double frob = frobenius_norm(w);
        norm_order.check(two_to_inf_norm(w), s1, 1e-9 * std::max(1.0, s1), inst);
        norm_order.check(s1, frob, 1e-9 * std::max(1.0, frob), inst);
    }
    return make_suite("norms", {sandwich, continuity, transpose, exact_rank, chain21,
                                norm_order, chain11});
}

// ------------------------------------------------------------ lipschitz ----

SuiteResult suite_lipschitz(long long trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Property rowsum("softmax_row_stochastic");
    Property softmax_vec("softmax_l1_linf_lipschitz");
    Property projection("projection_nonexpansive");
    Property head("head_perturbation_bound");
    Property block("block_lipschitz_bound");
    Property scalar("scalar_output_bounded");

    const Index tokens = 16, nd = 32;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long long t = 0; t < trials; ++t) {
        const model::Activation act{t % 2 == 0 ? model::Activation::Kind::relu
                                               : model::Activation::Kind::gelu};
        const Matrix x = random_matrix(rng, tokens, nd);
        const std::string inst = describe_matrix(x, "x");

        const Matrix sm = model::softmax_rows(random_matrix(rng, tokens, tokens, 3.0));
        for (Index i = 0; i < sm.rows(); ++i) {
            rowsum.check(std::abs(sm.row(i).sum() - 1.0), 1e-12, 0.0, inst);
            rowsum.check(-sm.row(i).minCoeff(), 0.0, 0.0, inst);
        }

        // vector softmax: |sm(a) - sm(b)|_1 <= 2 |a - b|_inf
        {
            const Matrix a = random_matrix(rng, 1, tokens, 2.0);
            const Matrix b = random_matrix(rng, 1, tokens, 2.0);
            const double lhs =
                (model::softmax_rows(a) - model::softmax_rows(b)).cwiseAbs().sum();
            const double rhs = 2.0 * (a - b).cwiseAbs().maxCoeff();
            softmax_vec.check(lhs, rhs, 1e-9, inst);
        }

        const Matrix z1 = random_matrix(rng, tokens, nd, 2.0);
        const Matrix z2 = random_matrix(rng, tokens, nd, 2.0);
        projection.check(two_to_inf_norm(model::project_rows(z1) - model::project_rows(z2)),
                         two_to_inf_norm(z1 - z2), 1e-9, inst);

        // head perturbation against the covering-step constant
        {
            const Matrix w = random_matrix(rng, nd, nd, 0.5);
            const Matrix wt = w + random_matrix(rng, nd, nd, 0.1);
            const Matrix v = random_matrix(rng, nd, nd, 0.5);
            const Matrix vt = v + random_matrix(rng, nd, nd, 0.1);
            const double b = two_to_inf_norm(x);
            const double lhs = two_to_inf_norm(model::head_forward(x, w, v) -
                                               model::head_forward(x, wt, vt));
            const double rhs =
                two_to_inf_norm(x * (v - vt)) +
                2.0 * two_to_inf_norm(x * (w - wt)) * b * b *
                    singular_values(vt).sigma_max();
            head.check(lhs, rhs * (1.0 + 1e-9), 1e-9, inst);
        }

        // block Lipschitz with measured spectral radii
        {
            const double b = std::max(two_to_inf_norm(z1), two_to_inf_norm(z2));
            const Matrix w = random_matrix(rng, nd, nd, 0.4);
            const Matrix v = random_matrix(rng, nd, nd, 0.4);
            const Matrix m = random_matrix(rng, nd, nd, 0.4);
            const double c_qk = singular_values(w).sigma_max();
            const double c_v = singular_values(v).sigma_max();
            const double c_m = singular_values(m).sigma_max();
            const double lhs = two_to_inf_norm(model::block_forward(z1, w, v, m, act) -
                                               model::block_forward(z2, w, v, m, act));
            const double rhs = act.lipschitz() * c_m * c_v * (1.0 + 4.0 * c_qk * b * b) *
                               two_to_inf_norm(z1 - z2);
            block.check(lhs, rhs * (1.0 + 1e-9), 1e-9, inst);
        }

        // |f_out| <= |w|_2
        {
            model::TheoryWeights weights;
            weights.layers.push_back({random_matrix(rng, nd, nd, 0.4),
                                      random_matrix(rng, nd, nd, 0.4),
                                      random_matrix(rng, nd, nd, 0.4)});
            weights.readout = random_matrix(rng, nd, 1, 1.0).col(0);
            weights.cls_index = static_cast<Index>(t % tokens);
            const double out = model::scalar_output(x, weights, act);
            scalar.check(std::abs(out), weights.readout.norm(), 1e-12, inst);
        }
    }
    return make_suite("lipschitz", {rowsum, softmax_vec, projection, head, block, scalar});
}

// ----------------------------------------------------------- allocation ----

/// Exhaustive search over the constraint simplex: z_i = c t_i / b_i with t on
/// a grid summing to one. The objective is strictly convex on the simplex, so
/// a coarse pass followed by zoomed box refinements around the running argmin
/// stays a pure grid enumeration (about 1e6 evaluations total) yet resolves
/// the optimum far below the coarse cell width. Independent of the closed
/// form.
double allocation_grid_minimum(const std::vector<double>& a, const std::vector<double>& b,
                               double c, double nu, long long budget) {
    const std::size_t m = a.size();
    std::vector<double> coeff(m);
    for (std::size_t i = 0; i < m; ++i) {
        coeff[i] = a[i] * std::pow(c / b[i], -nu);
    }
    if (m == 1) {
        return coeff[0];
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_t(m, 1.0 / static_cast<double>(m));

    if (m == 2) {
        const long long grid = budget;
        for (long long k = 1; k < grid; ++k) {
            const double t0 = static_cast<double>(k) / static_cast<double>(grid);
            const double v = coeff[0] * std::pow(t0, -nu) + coeff[1] * std::pow(1.0 - t0, -nu);
            if (v < best) {
                best = v;
                best_t = {t0, 1.0 - t0};
            }
        }
        return best;
    }

    // coarse composition pass
    const long long grid = m == 3 ? 1000 : 90;
    std::vector<double> table(static_cast<std::size_t>(grid) + 1, 0.0);
    for (long long k = 1; k <= grid; ++k) {
        table[static_cast<std::size_t>(k)] =
            std::pow(static_cast<double>(k) / static_cast<double>(grid), -nu);
    }
    if (m == 3) {
        for (long long k1 = 1; k1 < grid - 1; ++k1) {
            for (long long k2 = 1; k1 + k2 < grid; ++k2) {
                const double v = coeff[0] * table[static_cast<std::size_t>(k1)] +
                                 coeff[1] * table[static_cast<std::size_t>(k2)] +
                                 coeff[2] * table[static_cast<std::size_t>(grid - k1 - k2)];
                if (v < best) {
                    best = v;
                    best_t = {double(k1) / grid, double(k2) / grid,
                              double(grid - k1 - k2) / grid};
                }
            }
        }
    } else {
        for (long long k1 = 1; k1 < grid - 2; ++k1) {
            for (long long k2 = 1; k1 + k2 < grid - 1; ++k2) {
                for (long long k3 = 1; k1 + k2 + k3 < grid; ++k3) {
                    const double v =
                        coeff[0] * table[static_cast<std::size_t>(k1)] +
                        coeff[1] * table[static_cast<std::size_t>(k2)] +
                        coeff[2] * table[static_cast<std::size_t>(k3)] +
                        coeff[3] * table[static_cast<std::size_t>(grid - k1 - k2 - k3)];
                    if (v < best) {
                        best = v;
                        best_t = {double(k1) / grid, double(k2) / grid, double(k3) / grid,
                                  double(grid - k1 - k2 - k3) / grid};
                    }
                }
            }
        }
    }

    // zoom levels: box grids over the free coordinates around the incumbent
    double step = 1.0 / static_cast<double>(grid);
    const int levels = m == 3 ? 2 : 4;
    const long long g = m == 3 ? 500 : 60;
    std::vector<std::vector<double>> axis(m - 1);
    std::vector<std::vector<double>> powed(m - 1);
    for (int level = 0; level < levels; ++level) {
        for (std::size_t d = 0; d + 1 < m; ++d) {
            axis[d].clear();
            powed[d].clear();
            for (long long k = 0; k <= g; ++k) {
                const double t =
                    best_t[d] - 2.0 * step + 4.0 * step * static_cast<double>(k) / g;
                if (t > 1e-12 && t < 1.0) {
                    axis[d].push_back(t);
                    powed[d].push_back(coeff[d] * std::pow(t, -nu));
                }
            }
        }
        std::vector<std::size_t> idx(m - 1, 0);
        for (;;) {
            double rest = 1.0;
            double partial = 0.0;
            for (std::size_t d = 0; d + 1 < m; ++d) {
                rest -= axis[d][idx[d]];
                partial += powed[d][idx[d]];
            }
            if (rest > 1e-12) {
                const double v = partial + coeff[m - 1] * std::pow(rest, -nu);
                if (v < best) {
                    best = v;
                    for (std::size_t d = 0; d + 1 < m; ++d) {
                        best_t[d] = axis[d][idx[d]];
                    }
                    best_t[m - 1] = rest;
                }
            }
            std::size_t pos = 0;
            while (pos + 1 < m && ++idx[pos] == axis[pos].size()) {
                idx[pos++] = 0;
            }
            if (pos + 1 == m) break;
        }
        step = 4.0 * step / static_cast<double>(g);
    }
    return best;
}

SuiteResult suite_allocation(long long trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Property feasibility("allocation_constraint_feasible");
    Property optimality("allocation_matches_grid_search");
    Property value_identity("allocation_value_identity");

    std::uniform_int_distribution<int> msize(1, 4);
    std::lognormal_distribution<double> logn(0.0, 0.7);
    std::uniform_real_distribution<double> nudist(0.3, 2.5);
    for (long long t = 0; t < trials; ++t) {
        const int m = msize(rng);
        std::vector<double> a(static_cast<std::size_t>(m)), b(static_cast<std::size_t>(m));
        for (auto& v : a) v = logn(rng);
        for (auto& v : b) v = logn(rng);
        const double c = logn(rng) + 0.5;
        const double nu = nudist(rng);
        const auto alloc = bounds::allocate_radii(a, b, c, nu);

        json inst = {{"a", a}, {"b", b}, {"c", c}, {"nu", nu}};
        double lhs_c = 0.0, direct = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            lhs_c += b[i] * alloc.z[i];
            direct += a[i] * std::pow(alloc.z[i], -nu);
        }
        feasibility.check(std::abs(lhs_c - c), 1e-12 * c, 0.0, inst.dump());
        value_identity.check(std::abs(direct - alloc.value), 1e-12 * alloc.value, 0.0,
                             inst.dump());

        const double grid_min = allocation_grid_minimum(a, b, c, nu, 1000000);
        // the closed form is the true optimum: it can only undercut the grid
        optimality.check(alloc.value, grid_min, 1e-12 * grid_min, inst.dump());
        optimality.check(grid_min, alloc.value * (1.0 + 1e-4), 0.0, inst.dump());
    }
    return make_suite("allocation", {feasibility, optimality, value_identity});
}

// -------------------------------------------------------------- posthoc ----

Spectrum synthetic_spectrum(std::mt19937_64& rng, Index n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Spectrum s;
    s.rows = s.cols = n;
    s.rank_tol = default_rank_tol(n, n);
    s.values.resize(static_cast<std::size_t>(n));
    double v = std::pow(4.0, unit(rng) * 2.0 - 1.0);
    for (auto& x : s.values) {
        x = v;
        v *= 0.5 + 0.5 * unit(rng);
    }
    return s;
}

SuiteResult suite_posthoc(long long trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Property separability("grid_argmin_separable");
    Property scale0("rank_term_scale_invariant");
    Property scale2("frobenius_term_scale_half_power");
    Property omega_perm("omega_permutation_invariant");
    Property refinement("finer_grid_never_worse");
    Property shell_tail("shell_weight_tail_sum");

    std::uniform_int_distribution<int> depth_dist(1, 2);
    std::uniform_int_distribution<int> m_dist(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (long long t = 0; t < trials; ++t) {
        const std::int64_t depth = depth_dist(rng);
        const int m = m_dist(rng);
        bounds::BoundConfig cfg;
        cfg.depth = depth;
        cfg.hidden_dim = 16;
        cfg.act_lipschitz = 1.0;

        posthoc::WeightSpectra spectra;
        for (std::int64_t ell = 1; ell <= depth; ++ell) {
            spectra.push_back({bounds::MatrixKind::qk, ell, synthetic_spectrum(rng, 16)});
            spectra.push_back({bounds::MatrixKind::v, ell, synthetic_spectrum(rng, 16)});
            spectra.push_back({bounds::MatrixKind::m, ell, synthetic_spectrum(rng, 16)});
        }
        const bounds::LayerRadii radii = posthoc::measured_radii(spectra, depth);
        const auto selected = posthoc::select_indices(spectra, radii, cfg, m);

        // exhaustive joint minimization over the full grid, enumerating every
        // index combination in ascending lexicographic order
        const posthoc::IndexGrid grid(m);
        const auto pts = grid.points();
        const std::size_t count = spectra.size();
        std::vector<std::vector<double>> term(count);
        for (std::size_t i = 0; i < count; ++i) {
            for (double p : pts) {
                std::vector<double> pv(count, 0.0);
                pv[i] = p;
                const auto rep = posthoc::complexity_B(spectra, pv, radii, cfg);
                term[i].push_back(rep.per_matrix[i].term);
            }
        }
        std::vector<std::size_t> idx(count, 0);
        double joint_best = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> joint_idx(count, 0);
        for (;;) {
            double total = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                total += term[i][idx[i]];
            }
            if (total < joint_best * (1.0 - 1e-12)) {
                joint_best = total;
                joint_idx = idx;
            }
            std::size_t pos = count;
            while (pos > 0 && ++idx[pos - 1] == pts.size()) {
                idx[--pos] = 0;
            }
            if (pos == 0) break;
        }
        json inst = {{"depth", depth}, {"m", m}};
        separability.check_true(joint_best == selected.complexity, inst.dump());
        bool same_indices = true;
        for (std::size_t i = 0; i < count; ++i) {
            if (pts[joint_idx[i]] != selected.per_matrix[i].p) {
                same_indices = false;
            }
        }
        separability.check_true(same_indices, inst.dump());

        // scale covariance of single terms
        {
            Spectrum s = synthetic_spectrum(rng, 16);
            Spectrum sc = s;
            const double cmul = 0.25 + 4.0 * unit(rng);
            for (auto& v : sc.values) v *= cmul;
            const double t0 = posthoc::complexity_term(s, 0.0, 7.0, 16);
            const double t0c = posthoc::complexity_term(sc, 0.0, 7.0, 16);
            scale0.check(std::abs(t0 - t0c), 1e-12 * t0, 0.0, inst.dump());
            const double t2 = posthoc::complexity_term(s, 2.0, 7.0, 16);
            const double t2c = posthoc::complexity_term(sc, 2.0, 7.0, 16);
            scale2.check(std::abs(t2c - std::sqrt(cmul) * t2), 1e-12 * t2c, 0.0, inst.dump());
        }

        // omega invariance under permuting the per-layer kind triple
        {
            std::vector<double> powers;
            for (const auto& ws : spectra) {
                powers.push_back(schatten_power(ws.spectrum, 1.0));
            }
            const double om1 = posthoc::penalty_omega(powers, depth, m);
            for (std::int64_t ell = 0; ell < depth; ++ell) {
                std::swap(powers[static_cast<std::size_t>(3 * ell)],
                          powers[static_cast<std::size_t>(3 * ell + 2)]);
            }
            const double om2 = posthoc::penalty_omega(powers, depth, m);
            omega_perm.check(std::abs(om1 - om2), 1e-12 * om1, 0.0, inst.dump());
        }

        // divisible refinement: infimum over P_{km} <= infimum over P_m
        {
            const int mult = 1 + static_cast<int>(t % 3);
            const auto finer = posthoc::select_indices(spectra, radii, cfg, m * mult);
            refinement.check(finer.complexity, selected.complexity,
                             1e-12 * selected.complexity, inst.dump());
        }
    }

    {
        // 1 - sum_{|j|<=J} omega_j - omega_bot <= 2 * 3/(pi^2 J)
        const long long big = 1000000;
        double sum = posthoc::shell_weight(std::nullopt) + posthoc::shell_weight(std::int64_t{0});
        for (long long j = 1; j <= big; ++j) {
            sum += 2.0 * posthoc::shell_weight(j);
        }
        const double tail = 1.0 - sum;
        const double cap =
            2.0 * 3.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(big));
        shell_tail.check(tail, cap, 0.0, "{}");
        shell_tail.check(0.0, tail, 1e-12, "{}");  // tail must be nonnegative
    }

    return make_suite("posthoc",
                      {separability, scale0, scale2, omega_perm, refinement, shell_tail});
}

// --------------------------------------------------------------- parser ----

ingest::TensorTable random_table(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> ntensors(0, 6);
    std::uniform_int_distribution<int> dim(0, 12);
    std::uniform_int_distribution<int> dtype_pick(0, 3);
    std::uniform_int_distribution<int> namelen(1, 12);
    std::uniform_int_distribution<int> charpick(0, 25);
    std::uniform_int_distribution<int> byte(0, 255);

    ingest::TensorTable table;
    const int count = ntensors(rng);
    for (int i = 0; i < count; ++i) {
        std::string name;
        const int len = namelen(rng);
        for (int c = 0; c < len; ++c) {
            name.push_back(static_cast<char>('a' + charpick(rng)));
        }
        name += "." + std::to_string(i);
        const auto dt = static_cast<ingest::Dtype>(dtype_pick(rng));
        std::vector<std::int64_t> shape{dim(rng), dim(rng)};
        const std::size_t bytes =
            static_cast<std::size_t>(shape[0] * shape[1]) * ingest::dtype_size(dt);
        std::vector<std::uint8_t> data(bytes);
        for (auto& b : data) {
            b = static_cast<std::uint8_t>(byte(rng));
        }
        table.add_raw(name, dt, std::move(shape), std::move(data));
    }
    if (count % 2 == 0) {
        table.metadata["origin"] = "random";
    }
    return table;
}

SuiteResult suite_parser(long long trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Property roundtrip("write_parse_round_trip");
    Property canonical("canonical_rewrite_fixed_point");
    Property fuzz("mutation_fuzz_clean");

    for (long long t = 0; t < std::max<long long>(trials / 100, 100); ++t) {
        const ingest::TensorTable table = random_table(rng);
        const auto bytes = ingest::write_safetensors(table);
        try {
            const ingest::TensorTable back = ingest::parse_safetensors(bytes);
            roundtrip.check_true(ingest::tables_equal(table, back),
                                 "{\"tensors\": " + std::to_string(table.tensors.size()) + "}");
            canonical.check_true(ingest::write_safetensors(back) == bytes,
                                 "{\"tensors\": " + std::to_string(table.tensors.size()) + "}");
        } catch (const ingest::ParseError& e) {
            roundtrip.check_true(false, std::string("{\"error\": \"") + e.what() + "\"}");
        }
    }

    // mutation fuzzing over a known-good file
    ingest::SynthSpec spec;
    spec.L = 1;
    spec.N = 8;
    spec.d_h = 4;
    spec.I = 16;
    spec.qk = ingest::SpectrumLaw::gaussian_law(0.5);
    spec.vtilde = ingest::SpectrumLaw::gaussian_law(0.5);
    spec.ffn_in = ingest::SpectrumLaw::gaussian_law(0.5);
    spec.ffn_out = ingest::SpectrumLaw::gaussian_law(0.5);
    spec.seed = seed;
    const auto base = ingest::write_safetensors(ingest::synth_checkpoint(spec));

    std::uniform_int_distribution<int> mutation(0, 3);
    std::uniform_int_distribution<int> byte(0, 255);
    for (long long t = 0; t < trials; ++t) {
        std::vector<std::uint8_t> buf = base;
        std::uniform_int_distribution<std::size_t> pos(0, buf.size() - 1);
        switch (mutation(rng)) {
            case 0:
                buf[pos(rng)] ^= static_cast<std::uint8_t>(1 + byte(rng) % 255);
                break;
            case 1:
                buf.resize(pos(rng));
                break;
            case 2: {
                const std::size_t extra = 1 + pos(rng) % 64;
                for (std::size_t i = 0; i < extra; ++i) {
                    buf.push_back(static_cast<std::uint8_t>(byte(rng)));
                }
                break;
            }
            default: {
                // clobber a window inside the header region
                const std::size_t at = 8 + pos(rng) % std::max<std::size_t>(buf.size() - 8, 1);
                for (std::size_t i = at; i < std::min(buf.size(), at + 16); ++i) {
                    buf[i] = static_cast<std::uint8_t>(byte(rng));
                }
                break;
            }
        }
        try {
            (void)ingest::parse_safetensors(buf);
            fuzz.check_true(true, "{}");
        } catch (const ingest::ParseError&) {
            fuzz.check_true(true, "{}");  // classified rejection is a pass
        } catch (const std::exception& e) {
            fuzz.check_true(false, std::string("{\"unclassified\": \"") + e.what() + "\"}");
        }
    }
    return make_suite("parser", {roundtrip, canonical, fuzz});
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"norms", "lipschitz", "allocation", "posthoc", "parser"};
}

SuiteResult run_suite(const std::string& name, long long trials, std::uint64_t seed) {
    if (name == "norms") return suite_norms(trials, seed);
    if (name == "lipschitz") return suite_lipschitz(trials, seed);
    if (name == "allocation") return suite_allocation(trials, seed);
    if (name == "posthoc") return suite_posthoc(trials, seed);
    if (name == "parser") return suite_parser(trials, seed);
    throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace specproxy::verify
