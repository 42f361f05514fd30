#include "specproxy/report.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace specproxy;
using namespace specproxy::report;

namespace {

FileAnalysis analyze_synth(std::int64_t L, std::int64_t N, std::uint64_t seed,
                           AnalyzeConfig cfg = {}) {
    const auto table = ingest::synth_checkpoint(ingest::SynthSpec::miniatures(L, N, seed));
    return analyze_table(table, cfg, "synthetic", "0");
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SPECPROXY_CLI_PATH) + " " + args;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("report totals recompute from per-matrix records") {
    const FileAnalysis fa = analyze_synth(2, 128, 3);
    const auto j = report_json(fa);

    CHECK(j["schema"] == 1);
    CHECK(j["checkpoint"]["L"] == 2);
    CHECK(j["checkpoint"]["N"] == 128);

    double sum = 0.0;
    for (const auto& m : j["matrices"]) {
        sum += m["term"].get<double>();
    }
    CHECK(sum == doctest::Approx(j["totals"]["b_ours_complexity"].get<double>()).epsilon(1e-12));
    const double total = j["totals"]["b_ours"].get<double>();
    CHECK(total == doctest::Approx(j["totals"]["b_ours_complexity"].get<double>() +
                                   j["totals"]["b_ours_sqrt_depth"].get<double>())
                       .epsilon(1e-12));

    // plumbing identity with the library-level proxy
    const auto table = ingest::synth_checkpoint(ingest::SynthSpec::miniatures(2, 128, 3));
    const auto ckpt = ingest::map_bert_layout(table);
    const auto direct = bertproxy::b_ours(bertproxy::analyze(ckpt, 1.13));
    CHECK(total == doctest::Approx(direct.value).epsilon(1e-12));
}

TEST_CASE("reports are deterministic") {
    const FileAnalysis a = analyze_synth(2, 128, 5);
    const FileAnalysis b = analyze_synth(2, 128, 5);
    CHECK(report_json(a).dump() == report_json(b).dump());
    CHECK(csv_spectra(a) == csv_spectra(b));
    CHECK(csv_sweep(a) == csv_sweep(b));
}

TEST_CASE("compare CSV and sweep axis validation") {
    const FileAnalysis a = analyze_synth(2, 128, 7);
    const FileAnalysis b = analyze_synth(4, 128, 8);
    const std::string csv = csv_compare({a, b});

    std::istringstream lines(csv);
    std::string header, row1, row2, extra;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    CHECK(!std::getline(lines, extra));
    CHECK(header == "L,N,b_ours_raw,b_edelman_raw,b_ours_norm,b_edelman_norm");
    CHECK(row1.substr(0, 6) == "2,128,");
    // base row is normalized to exactly one
    CHECK(row1.find(",1,1") != std::string::npos);

    const FileAnalysis c = analyze_synth(4, 256, 9);
    CHECK_THROWS_AS(csv_compare({a, c}), std::invalid_argument);  // both axes move
}

TEST_CASE("svg chart structure") {
    const FileAnalysis a = analyze_synth(2, 128, 11);
    const FileAnalysis b = analyze_synth(4, 128, 12);
    const std::string svg = svg_compare({a, b});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("b_ours (normalized)") != std::string::npos);
    CHECK(svg.find("b_edelman (normalized)") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
}

TEST_CASE("spectra CSV row count matches the spectrum sizes") {
    const FileAnalysis a = analyze_synth(2, 128, 13);
    std::int64_t expect = 0;
    for (const auto& rec : a.analysis.matrices) {
        expect += static_cast<std::int64_t>(rec.spectrum.values.size());
    }
    const std::string csv = csv_spectra(a);
    const std::int64_t rows = std::count(csv.begin(), csv.end(), '\n') - 1;
    CHECK(rows == expect);
}

TEST_CASE("sweep CSV is one at p = 0") {
    const FileAnalysis a = analyze_synth(2, 128, 15);
    std::istringstream lines(csv_sweep(a));
    std::string line;
    std::getline(lines, line);  // header
    bool saw_zero = false;
    while (std::getline(lines, line)) {
        const auto last_comma = line.rfind(',');
        const auto prev_comma = line.rfind(',', last_comma - 1);
        const std::string p = line.substr(prev_comma + 1, last_comma - prev_comma - 1);
        if (p == "0") {
            CHECK(line.substr(last_comma + 1) == "1");
            saw_zero = true;
        }
    }
    CHECK(saw_zero);
}

TEST_CASE("norm scaling of identity feedforward weights") {
    // craft two checkpoints whose FFN-in weight is the identity corner so the
    // (2,1) norm equals N exactly
    auto make = [](std::int64_t nd) {
        ingest::TensorTable table;
        ingest::SynthSpec spec = ingest::SynthSpec::miniatures(1, nd, 17);
        table = ingest::synth_checkpoint(spec);
        Matrix eye_in = Matrix::Zero(4 * nd, nd);  // stored (out, in)
        eye_in.topLeftCorner(nd, nd) = Matrix::Identity(nd, nd);
        table.tensors.erase("encoder.layer.0.intermediate.dense.weight");
        table.add_matrix("encoder.layer.0.intermediate.dense.weight", ingest::Dtype::f32,
                         eye_in);
        return table;
    };
    AnalyzeConfig cfg;
    const FileAnalysis a = analyze_table(make(128), cfg, "a", "0");
    const FileAnalysis b = analyze_table(make(256), cfg, "b", "0");
    const std::string csv = csv_norm_scaling({a, b});
    CHECK(csv.find("1,128,0,ffn_in,-1,128,") != std::string::npos);
    CHECK(csv.find("1,256,0,ffn_in,-1,256,") != std::string::npos);
}

TEST_CASE("rank tolerance override changes only rank-derived quantities") {
    const auto table = ingest::synth_checkpoint(ingest::SynthSpec::miniatures(2, 128, 19));
    AnalyzeConfig strict;  // per-shape default tolerance
    AnalyzeConfig coarse;
    coarse.rank_tol = 0.05;  // cuts deep into the power-law tail
    const FileAnalysis a = analyze_table(table, strict, "x", "0");
    const FileAnalysis b = analyze_table(table, coarse, "x", "0");

    CHECK(a.edelman == b.edelman);  // mixed and spectral norms are tol-free
    REQUIRE(a.analysis.matrices.size() == b.analysis.matrices.size());
    bool some_rank_changed = false;
    for (std::size_t i = 0; i < a.analysis.matrices.size(); ++i) {
        const auto& ra = a.analysis.matrices[i];
        const auto& rb = b.analysis.matrices[i];
        CHECK(ra.c2 == rb.c2);
        CHECK(ra.c21 == rb.c21);
        CHECK(ra.frob == rb.frob);
        const auto rank_a = numerical_rank(ra.spectrum);
        const auto rank_b = numerical_rank(rb.spectrum);
        CHECK(rank_b <= rank_a);
        some_rank_changed = some_rank_changed || rank_b != rank_a;
        // selection stays at the rank endpoint; the term tracks the new rank
        CHECK(b.ours.choices[i].p == 0.0);
        CHECK(b.ours.choices[i].term ==
              doctest::Approx(std::sqrt(double(rank_b) * 128.0)).epsilon(1e-12));
    }
    CHECK(some_rank_changed);
    CHECK(b.ours.value < a.ours.value);
}

TEST_CASE("config file round trip and defaults") {
    AnalyzeConfig cfg;
    CHECK(cfg.bound.delta == 0.01);
    CHECK(cfg.bound.input_row_bound == 1.0);
    CHECK(cfg.bound.univ_const == 1.0);
    CHECK(cfg.activation == "gelu");
    CHECK(cfg.act_lipschitz() == 1.13);

    const auto echoed = cfg.echo();
    const AnalyzeConfig back = AnalyzeConfig::from_json(echoed);
    CHECK(back.bound.delta == cfg.bound.delta);
    CHECK(back.activation == cfg.activation);
    CHECK(back.head_dim == cfg.head_dim);
}

TEST_CASE("cli exit codes") {
    // corrupt file: parse error surfaces as exit 2
    {
        std::ofstream out("corrupt.safetensors", std::ios::binary | std::ios::trunc);
        out << "notatensorfile";
    }
    CHECK(run_cli("analyze corrupt.safetensors >/dev/null 2>&1") == 2);

    // unknown verify suite: usage error 64
    CHECK(run_cli("verify --suite nosuch >/dev/null 2>&1") == 64);

    // missing subcommand: usage error 64
    CHECK(run_cli(">/dev/null 2>&1") == 64);

    // happy path: exit 0
    CHECK(run_cli("synth --preset-L 1 --preset-N 128 --out tiny.safetensors >/dev/null 2>&1") ==
          0);
    CHECK(run_cli("analyze tiny.safetensors >/dev/null 2>&1") == 0);
    CHECK(run_cli("regime-table --regime rank >/dev/null 2>&1") == 0);

    // repeated runs emit byte-identical reports
    CHECK(run_cli("analyze tiny.safetensors --out rep1.json 2>/dev/null") == 0);
    CHECK(run_cli("analyze tiny.safetensors --out rep2.json 2>/dev/null") == 0);
    const auto slurp = [](const char* path) {
        std::ifstream in(path, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const std::string rep1 = slurp("rep1.json");
    CHECK(!rep1.empty());
    CHECK(rep1 == slurp("rep2.json"));

    // generation from a spec file
    {
        std::ofstream out("tiny_spec.json");
        out << ingest::SynthSpec::miniatures(1, 128, 5).to_json();
    }
    CHECK(run_cli("synth --spec tiny_spec.json --out from_spec.safetensors >/dev/null 2>&1") ==
          0);
    CHECK(run_cli("spectra from_spec.safetensors >/dev/null 2>&1") == 0);

    for (const char* f : {"corrupt.safetensors", "tiny.safetensors", "rep1.json", "rep2.json",
                          "tiny_spec.json", "from_spec.safetensors"}) {
        std::remove(f);
    }
}
