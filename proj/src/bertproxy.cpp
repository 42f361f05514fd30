#include "specproxy/bertproxy.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace specproxy::bertproxy {

void BertCheckpoint::validate() const {
    if (L < 1 || N < 1 || d_h < 1 || I < 1) {
        throw std::invalid_argument("BertCheckpoint: positive dimensions required");
    }
    if (A_h * d_h != N) {
        throw std::invalid_argument("BertCheckpoint: A_h * d_h must equal N");
    }
    if (static_cast<std::int64_t>(layers.size()) != L) {
        throw std::invalid_argument("BertCheckpoint: layer count mismatch");
    }
    for (const auto& layer : layers) {
        if (static_cast<std::int64_t>(layer.w_qk.size()) != A_h ||
            static_cast<std::int64_t>(layer.w_vtilde.size()) != A_h) {
            throw std::invalid_argument("BertCheckpoint: head count mismatch");
        }
        for (const auto& w : layer.w_qk) {
            if (w.rows() != N || w.cols() != N) {
                throw std::invalid_argument("BertCheckpoint: composed head shape mismatch");
            }
        }
        if (layer.w_m_in.rows() != N || layer.w_m_in.cols() != I ||
            layer.w_m_out.rows() != I || layer.w_m_out.cols() != N) {
            throw std::invalid_argument("BertCheckpoint: feedforward shape mismatch");
        }
    }
}

Matrix compose_qk(const Matrix& q_slice, const Matrix& k_slice) {
    if (q_slice.rows() != k_slice.rows() || q_slice.cols() != k_slice.cols()) {
        throw std::invalid_argument("compose_qk: slice shape mismatch");
    }
    return q_slice.transpose() * k_slice;
}

Matrix compose_value_output(const Matrix& v_slice, const Matrix& o_slice) {
    if (v_slice.cols() != o_slice.rows() || v_slice.rows() != o_slice.cols()) {
        throw std::invalid_argument("compose_value_output: slice shape mismatch");
    }
    return v_slice * o_slice;
}

const char* bert_kind_name(BertKind k) {
    switch (k) {
        case BertKind::qk: return "qk";
        case BertKind::vtilde: return "vtilde";
        case BertKind::ffn_in: return "ffn_in";
        case BertKind::ffn_out: return "ffn_out";
    }
    return "?";
}

std::string BertMatrixRecord::label() const {
    std::string s = "layer" + std::to_string(layer - 1) + "." + bert_kind_name(kind);
    if (head >= 0) {
        s += ".h" + std::to_string(head);
    }
    return s;
}

namespace {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    unsigned hw = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
    hw = std::max(1u, std::min<unsigned>(hw, static_cast<unsigned>(count)));
    if (hw <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(hw);
    for (unsigned t = 0; t < hw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

double BertAnalysis::c2_m_in(std::int64_t ell) const {
    return record(BertKind::ffn_in, ell, -1).c2;
}

double BertAnalysis::c2_m_out(std::int64_t ell) const {
    return record(BertKind::ffn_out, ell, -1).c2;
}

const BertMatrixRecord& BertAnalysis::record(BertKind kind, std::int64_t ell,
                                             std::int64_t head) const {
    // layer-major layout: A_h qk, A_h vtilde, ffn_in, ffn_out
    const std::size_t per_layer = static_cast<std::size_t>(2 * A_h + 2);
    const std::size_t base = static_cast<std::size_t>(ell - 1) * per_layer;
    std::size_t off = 0;
    switch (kind) {
        case BertKind::qk: off = static_cast<std::size_t>(head); break;
        case BertKind::vtilde: off = static_cast<std::size_t>(A_h + head); break;
        case BertKind::ffn_in: off = static_cast<std::size_t>(2 * A_h); break;
        case BertKind::ffn_out: off = static_cast<std::size_t>(2 * A_h + 1); break;
    }
    const std::size_t idx = base + off;
    if (ell < 1 || ell > L || idx >= matrices.size()) {
        throw std::out_of_range("BertAnalysis::record: index out of range");
    }
    return matrices[idx];
}

double BertAnalysis::alpha_tilde(std::int64_t ell) const {
    if (ell < 1 || ell > L) {
        throw std::out_of_range("alpha_tilde: layer index out of range");
    }
    double prod = 1.0;
    for (std::int64_t k = ell + 1; k <= L; ++k) {
        double head_sum = 0.0;
        for (std::int64_t h = 0; h < A_h; ++h) {
            head_sum += record(BertKind::vtilde, k, h).c2 *
                        (1.0 + 4.0 * record(BertKind::qk, k, h).c2);
        }
        prod *= act_lipschitz * c2_m_in(k) * c2_m_out(k) * head_sum;
    }
    return prod;
}

double BertAnalysis::gamma_tilde(const BertMatrixRecord& rec) const {
    switch (rec.kind) {
        case BertKind::qk:
            return 2.0 * record(BertKind::vtilde, rec.layer, rec.head).c2 *
                   c2_m_out(rec.layer) * c2_m_in(rec.layer);
        case BertKind::vtilde:
            return c2_m_out(rec.layer) * c2_m_in(rec.layer);
        case BertKind::ffn_in:
            return c2_m_out(rec.layer);
        case BertKind::ffn_out:
            return 1.0;
    }
    return 0.0;
}

double BertAnalysis::arch_factor(const BertMatrixRecord& rec) const {
    return gamma_tilde(rec) * alpha_tilde(rec.layer) * static_cast<double>(L);
}

BertAnalysis analyze(const BertCheckpoint& ckpt, double act_lipschitz, double rank_tol,
                     int threads) {
    ckpt.validate();
    BertAnalysis a;
    a.L = ckpt.L;
    a.N = ckpt.N;
    a.A_h = ckpt.A_h;
    a.d_h = ckpt.d_h;
    a.I = ckpt.I;
    a.act_lipschitz = act_lipschitz;

    struct Task {
        const Matrix* w;
        BertKind kind;
        std::int64_t layer;
        std::int64_t head;
    };
    std::vector<Task> tasks;
    for (std::int64_t ell = 1; ell <= ckpt.L; ++ell) {
        const auto& layer = ckpt.layers[static_cast<std::size_t>(ell - 1)];
        for (std::int64_t h = 0; h < ckpt.A_h; ++h) {
            tasks.push_back({&layer.w_qk[static_cast<std::size_t>(h)], BertKind::qk, ell, h});
        }
        for (std::int64_t h = 0; h < ckpt.A_h; ++h) {
            tasks.push_back(
                {&layer.w_vtilde[static_cast<std::size_t>(h)], BertKind::vtilde, ell, h});
        }
        tasks.push_back({&layer.w_m_in, BertKind::ffn_in, ell, -1});
        tasks.push_back({&layer.w_m_out, BertKind::ffn_out, ell, -1});
    }

    a.matrices.resize(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const Task& t = tasks[i];
        BertMatrixRecord rec;
        rec.kind = t.kind;
        rec.layer = t.layer;
        rec.head = t.head;
        rec.rows = t.w->rows();
        rec.cols = t.w->cols();
        rec.spectrum = singular_values(*t.w, rank_tol);
        rec.c2 = rec.spectrum.sigma_max();
        rec.c21 = t.kind == BertKind::qk ? mixed_norm(t.w->transpose(), 2.0, 1.0)
                                         : mixed_norm(*t.w, 2.0, 1.0);
        rec.c11 = mixed_norm(*t.w, 1.0, 1.0);
        rec.frob = frobenius_norm(*t.w);
        a.matrices[i] = std::move(rec);
    });
    return a;
}

double bert_matrix_term(const BertAnalysis& a, const BertMatrixRecord& rec, double p) {
    return posthoc::complexity_term(rec.spectrum, p, a.arch_factor(rec), a.N);
}

BoursResult b_ours(const BertAnalysis& a, int m) {
    BoursResult out;
    out.m = m > 0 ? m : posthoc::IndexGrid::default_m(a.L, a.N);
    const posthoc::IndexGrid grid(out.m);
    const std::vector<double> pts = grid.points();

    std::vector<double> powers;
    powers.reserve(a.matrices.size());
    for (const auto& rec : a.matrices) {
        const double h = a.arch_factor(rec);
        BoursChoice best;
        best.kind = rec.kind;
        best.layer = rec.layer;
        best.head = rec.head;
        bool have = false;
        for (double p : pts) {
            const double term = posthoc::complexity_term(rec.spectrum, p, h, a.N);
            if (!have || term < best.term * (1.0 - 1e-12)) {
                best.p = p;
                best.term = term;
                best.schatten = schatten_power(rec.spectrum, p);
                have = true;
            }
        }
        out.complexity += best.term;
        powers.push_back(best.schatten);
        out.choices.push_back(best);
    }
    out.value = out.complexity + std::sqrt(static_cast<double>(a.L));

    double omega = static_cast<double>(powers.size()) * std::log(2.0 * out.m + 1.0);
    for (double v : powers) {
        omega += std::log(1.0 / posthoc::shell_weight(posthoc::shell_index(v)));
    }
    out.omega = omega;

    double chi = 0.0;
    for (const auto& rec : a.matrices) {
        if (rec.c2 <= 0.0) continue;
        const double h = a.gamma_tilde(rec) * a.alpha_tilde(rec.layer);
        if (h > 0.0) {
            chi = std::max(chi, std::abs(std::log(rec.c2)) + std::abs(std::log(h)));
        }
    }
    out.chi = chi;
    return out;
}

double b_edelman(const BertAnalysis& a) {
    double acc = 1.0;
    for (std::int64_t ell = 1; ell <= a.L; ++ell) {
        const double in2 = a.c2_m_in(ell);
        const double out2 = a.c2_m_out(ell);
        double xi = 0.0;
        for (std::int64_t h = 0; h < a.A_h; ++h) {
            const auto& qk = a.record(BertKind::qk, ell, h);
            const auto& vt = a.record(BertKind::vtilde, ell, h);
            xi += std::pow(out2 * in2 * vt.c2 * qk.c21, 2.0 / 3.0);
            xi += std::pow(out2 * in2 * vt.c21, 2.0 / 3.0);
        }
        xi += std::pow(out2 * a.record(BertKind::ffn_in, ell, -1).c21, 2.0 / 3.0);
        xi += std::pow(a.record(BertKind::ffn_out, ell, -1).c21, 2.0 / 3.0);
        acc += std::pow(a.alpha_tilde(ell), 2.0 / 3.0) * xi;
    }
    return std::pow(acc, 1.5);
}

ScalingCurve normalize_curves(std::vector<CurvePoint> points) {
    if (points.empty()) {
        throw std::invalid_argument("normalize_curves: no points");
    }
    ScalingCurve out;
    out.points = std::move(points);
    out.base_index = 0;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        const auto& p = out.points[i];
        const auto& b = out.points[out.base_index];
        if (p.L < b.L || (p.L == b.L && p.N < b.N)) {
            out.base_index = i;
        }
    }
    const double base = out.points[out.base_index].value;
    if (base == 0.0) {
        throw std::invalid_argument("normalize_curves: base value is zero");
    }
    out.normalized.reserve(out.points.size());
    for (const auto& p : out.points) {
        out.normalized.push_back(p.value / base);
    }
    out.normalized[out.base_index] = 1.0;
    return out;
}

std::vector<SweepCurve> p_sweep(const BertAnalysis& a, const std::vector<double>& grid) {
    std::vector<SweepCurve> out;
    out.reserve(a.matrices.size());
    for (const auto& rec : a.matrices) {
        SweepCurve c;
        c.kind = rec.kind;
        c.layer = rec.layer;
        c.head = rec.head;
        const double base = bert_matrix_term(a, rec, 0.0);
        if (base <= 0.0) {
            c.defined = false;
            out.push_back(std::move(c));
            continue;
        }
        c.ratios.reserve(grid.size());
        for (double p : grid) {
            c.ratios.push_back(bert_matrix_term(a, rec, p) / base);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace specproxy::bertproxy
