#include "specproxy/report.hpp"

#include "specproxy/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace specproxy::report {

using json = nlohmann::json;

double AnalyzeConfig::act_lipschitz() const {
    return model::Activation::from_name(activation).lipschitz();
}

json AnalyzeConfig::echo() const {
    json j;
    j["n"] = bound.n;
    j["token_len"] = bound.token_len;
    j["delta"] = bound.delta;
    j["loss_lipschitz"] = bound.loss_lipschitz;
    j["loss_bound"] = bound.loss_bound;
    j["readout_radius"] = bound.readout_radius;
    j["input_row_bound"] = bound.input_row_bound;
    j["univ_const"] = bound.univ_const;
    j["activation"] = activation;
    j["act_lipschitz"] = act_lipschitz();
    j["rank_tol"] = rank_tol;
    j["grid_m"] = grid_m;
    j["prefix"] = prefix;
    j["head_dim"] = head_dim;
    return j;
}

AnalyzeConfig AnalyzeConfig::from_json(const json& j) {
    AnalyzeConfig cfg;
    cfg.bound.n = j.value("n", cfg.bound.n);
    cfg.bound.token_len = j.value("token_len", cfg.bound.token_len);
    cfg.bound.delta = j.value("delta", cfg.bound.delta);
    cfg.bound.loss_lipschitz = j.value("loss_lipschitz", cfg.bound.loss_lipschitz);
    cfg.bound.loss_bound = j.value("loss_bound", cfg.bound.loss_bound);
    cfg.bound.readout_radius = j.value("readout_radius", cfg.bound.readout_radius);
    cfg.bound.input_row_bound = j.value("input_row_bound", cfg.bound.input_row_bound);
    cfg.bound.univ_const = j.value("univ_const", cfg.bound.univ_const);
    cfg.activation = j.value("activation", cfg.activation);
    cfg.rank_tol = j.value("rank_tol", cfg.rank_tol);
    cfg.grid_m = j.value("grid_m", cfg.grid_m);
    cfg.prefix = j.value("prefix", cfg.prefix);
    cfg.head_dim = j.value("head_dim", cfg.head_dim);
    cfg.threads = j.value("threads", cfg.threads);
    return cfg;
}

AnalyzeConfig AnalyzeConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    json j;
    in >> j;
    return from_json(j);
}

std::string fnv1a64_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ingest::ParseError(ingest::ParseError::Kind::io, "cannot open file: " + path);
    }
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<std::uint8_t>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

FileAnalysis analyze_table(const ingest::TensorTable& table, const AnalyzeConfig& cfg,
                           const std::string& path_label, const std::string& file_hash) {
    ingest::LayoutOptions opts;
    opts.prefix = cfg.prefix;
    opts.head_dim = cfg.head_dim;
    const bertproxy::BertCheckpoint ckpt = ingest::map_bert_layout(table, opts);

    FileAnalysis fa;
    fa.path = path_label;
    fa.file_hash = file_hash;
    fa.cfg = cfg;
    fa.analysis = bertproxy::analyze(ckpt, cfg.act_lipschitz(), cfg.rank_tol, cfg.threads);
    fa.ours = bertproxy::b_ours(fa.analysis, cfg.grid_m);
    fa.edelman = bertproxy::b_edelman(fa.analysis);
    return fa;
}

FileAnalysis analyze_checkpoint_file(const std::string& path, const AnalyzeConfig& cfg) {
    const ingest::TensorTable table = ingest::read_checkpoint(path);
    return analyze_table(table, cfg, path, fnv1a64_hex(path));
}

json report_json(const FileAnalysis& fa) {
    const auto& a = fa.analysis;
    json j;
    j["schema"] = kSchemaVersion;
    j["config"] = fa.cfg.echo();
    j["checkpoint"] = {{"path", fa.path},   {"L", a.L}, {"N", a.N},
                       {"A_h", a.A_h},      {"d_h", a.d_h}, {"I", a.I}};
    j["provenance"] = {{"tool_version", kToolVersion},
                       {"file_hash", fa.file_hash},
                       {"rank_tol",
                        fa.cfg.rank_tol > 0.0 ? fa.cfg.rank_tol : -1.0},
                       {"bounds_are_proxies", fa.cfg.bound.univ_const == 1.0},
                       {"selection_objective",
                        "per-matrix main term; omega evaluated at the selection, not optimized"}};

    json matrices = json::array();
    double term_sum = 0.0;
    for (std::size_t i = 0; i < a.matrices.size(); ++i) {
        const auto& rec = a.matrices[i];
        const auto& choice = fa.ours.choices[i];
        json entry;
        entry["name"] = rec.label();
        entry["layer"] = rec.layer - 1;
        entry["kind"] = bertproxy::bert_kind_name(rec.kind);
        entry["head"] = rec.head;
        entry["rows"] = rec.rows;
        entry["cols"] = rec.cols;
        entry["sigma_max"] = rec.spectrum.sigma_max();
        entry["sigma_min"] = rec.spectrum.values.empty() ? 0.0 : rec.spectrum.values.back();
        entry["rank"] = numerical_rank(rec.spectrum);
        entry["rank_tol"] = rec.spectrum.rank_tol;
        entry["frobenius"] = rec.frob;
        entry["mixed21"] = rec.c21;
        entry["mixed11"] = rec.c11;
        entry["chosen_p"] = choice.p;
        entry["schatten_at_p"] = choice.schatten;
        entry["term"] = choice.term;
        term_sum += choice.term;
        matrices.push_back(std::move(entry));
    }
    j["matrices"] = std::move(matrices);

    // smallness-floor diagnostic: nonzero weights below exp(-(L + log N))
    // weaken the simplified rounding-penalty absorption (reported, never
    // enforced)
    std::int64_t floor_violations = 0;
    const double floor = std::exp(-(static_cast<double>(a.L) +
                                    std::log(static_cast<double>(a.N))));
    for (const auto& rec : a.matrices) {
        const double s1 = rec.spectrum.sigma_max();
        if (s1 > 0.0 && s1 < floor) {
            ++floor_violations;
        }
    }

    j["totals"] = {{"b_ours", fa.ours.value},
                   {"b_ours_complexity", fa.ours.complexity},
                   {"b_ours_sqrt_depth", std::sqrt(static_cast<double>(a.L))},
                   {"b_ours_grid_m", fa.ours.m},
                   {"b_edelman", fa.edelman},
                   {"omega", fa.ours.omega},
                   {"chi", fa.ours.chi},
                   {"floor_violations", floor_violations},
                   {"term_sum_check", term_sum}};
    return j;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct ComparePoint {
    std::int64_t L, N;
    double ours_raw, edelman_raw;
    double ours_norm, edelman_norm;
};

std::vector<ComparePoint> compare_points(const std::vector<FileAnalysis>& files) {
    if (files.size() < 2) {
        throw std::invalid_argument("compare: at least two checkpoints required");
    }
    std::set<std::int64_t> depths, widths;
    for (const auto& f : files) {
        depths.insert(f.analysis.L);
        widths.insert(f.analysis.N);
    }
    if (depths.size() > 1 && widths.size() > 1) {
        throw std::invalid_argument("compare: checkpoints must share a sweep axis (fixed L or fixed N)");
    }
    std::vector<bertproxy::CurvePoint> ours, edelman;
    for (const auto& f : files) {
        ours.push_back({f.analysis.L, f.analysis.N, f.ours.value});
        edelman.push_back({f.analysis.L, f.analysis.N, f.edelman});
    }
    const bertproxy::ScalingCurve co = bertproxy::normalize_curves(ours);
    const bertproxy::ScalingCurve ce = bertproxy::normalize_curves(edelman);

    std::vector<ComparePoint> pts;
    for (std::size_t i = 0; i < files.size(); ++i) {
        pts.push_back({co.points[i].L, co.points[i].N, co.points[i].value, ce.points[i].value,
                       co.normalized[i], ce.normalized[i]});
    }
    std::sort(pts.begin(), pts.end(), [](const ComparePoint& a, const ComparePoint& b) {
        return a.L != b.L ? a.L < b.L : a.N < b.N;
    });
    return pts;
}

}  // namespace

std::string csv_compare(const std::vector<FileAnalysis>& files) {
    const auto pts = compare_points(files);
    std::ostringstream out;
    out << "L,N,b_ours_raw,b_edelman_raw,b_ours_norm,b_edelman_norm\n";
    for (const auto& p : pts) {
        out << p.L << ',' << p.N << ',' << fmt(p.ours_raw) << ',' << fmt(p.edelman_raw) << ','
            << fmt(p.ours_norm) << ',' << fmt(p.edelman_norm) << '\n';
    }
    return out.str();
}

std::string svg_compare(const std::vector<FileAnalysis>& files, bool log_y, bool normalized) {
    const auto pts = compare_points(files);
    std::set<std::int64_t> depths;
    for (const auto& p : pts) {
        depths.insert(p.L);
    }
    const bool sweep_depth = depths.size() > 1;
    const char* tag = normalized ? " (normalized)" : " (raw)";
    ChartSeries ours{std::string("b_ours") + tag, "#1f77b4", {}, {}};
    ChartSeries edelman{std::string("b_edelman") + tag, "#d62728", {}, {}};
    for (const auto& p : pts) {
        const double x = static_cast<double>(sweep_depth ? p.L : p.N);
        ours.x.push_back(x);
        ours.y.push_back(normalized ? p.ours_norm : p.ours_raw);
        edelman.x.push_back(x);
        edelman.y.push_back(normalized ? p.edelman_norm : p.edelman_raw);
    }
    return svg_line_chart(normalized ? "normalized proxy scaling" : "proxy scaling",
                          sweep_depth ? "L" : "N",
                          normalized ? "proxy / proxy(base)" : "proxy", {ours, edelman}, log_y);
}

std::string csv_sweep(const FileAnalysis& fa) {
    const posthoc::IndexGrid grid(fa.ours.m);
    const std::vector<double> pts = grid.points();
    const auto curves = bertproxy::p_sweep(fa.analysis, pts);
    std::ostringstream out;
    out << "layer,kind,head,p,ratio\n";
    for (const auto& c : curves) {
        if (!c.defined) {
            continue;  // zero matrices are flagged absent
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out << (c.layer - 1) << ',' << bertproxy::bert_kind_name(c.kind) << ',' << c.head
                << ',' << fmt(pts[i]) << ',' << fmt(c.ratios[i]) << '\n';
        }
    }
    return out.str();
}

std::string csv_spectra(const FileAnalysis& fa) {
    std::ostringstream out;
    out << "layer,kind,head,index,sigma\n";
    for (const auto& rec : fa.analysis.matrices) {
        for (std::size_t i = 0; i < rec.spectrum.values.size(); ++i) {
            out << (rec.layer - 1) << ',' << bertproxy::bert_kind_name(rec.kind) << ','
                << rec.head << ',' << i << ',' << fmt(rec.spectrum.values[i]) << '\n';
        }
    }
    return out.str();
}

std::string csv_norm_scaling(const std::vector<FileAnalysis>& files) {
    std::ostringstream out;
    out << "L,N,layer,kind,head,mixed21,mixed11\n";
    for (const auto& f : files) {
        for (const auto& rec : f.analysis.matrices) {
            out << f.analysis.L << ',' << f.analysis.N << ',' << (rec.layer - 1) << ','
                << bertproxy::bert_kind_name(rec.kind) << ',' << rec.head << ','
                << fmt(rec.c21) << ',' << fmt(rec.c11) << '\n';
        }
    }
    return out.str();
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<ChartSeries>& series,
                           bool log_y) {
    constexpr double width = 800.0, height = 600.0;
    constexpr double ml = 80.0, mr = 40.0, mt = 50.0, mb = 60.0;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double y = log_y ? std::log10(std::max(s.y[i], 1e-300)) : s.y[i];
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = y;
                first = false;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (xmax == xmin) {
        xmax = xmin + 1.0;
    }
    if (ymax == ymin) {
        ymax = ymin + 1.0;
    }
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * plot_w; };
    const auto py = [&](double yv) {
        const double y = log_y ? std::log10(std::max(yv, 1e-300)) : yv;
        return mt + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" "
           "height=\"600\" viewBox=\"0 0 800 600\">\n"
        << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
        << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">" << title
        << "</text>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w
        << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << mt + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label << "</text>\n";
    svg << "<text x=\"20\" y=\"" << mt + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
        << mt + plot_h / 2 << ")\">" << y_label << (log_y ? " (log scale)" : "") << "</text>\n";
    // ticks
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        svg << "<text x=\"" << px(fx) << "\" y=\"" << mt + plot_h + 20
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        const double yval = log_y ? std::pow(10.0, fy) : fy;
        svg << "<text x=\"" << ml - 8 << "\" y=\"" << mt + plot_h - plot_h * t / 4.0 + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yval) << "</text>\n";
    }
    // series
    double legend_y = mt + 10.0;
    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        svg << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i])
                << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
        svg << "<rect x=\"" << ml + plot_w - 220 << "\" y=\"" << legend_y - 9
            << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n"
            << "<text x=\"" << ml + plot_w - 202 << "\" y=\"" << legend_y + 1
            << "\" font-size=\"12\">" << s.label << "</text>\n";
        legend_y += 20.0;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace specproxy::report
