#include "specproxy/baselines.hpp"
#include "specproxy/ingest.hpp"
#include "specproxy/report.hpp"
#include "specproxy/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace specproxy;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitUsage = 64;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    out << text;
}

struct CommonOpts {
    std::string config_path;
    double rank_tol = -1.0;
    int grid_m = 0;
    std::string activation;
    std::string prefix;
    std::int64_t head_dim = 0;
    int threads = 0;

    report::AnalyzeConfig resolve() const {
        report::AnalyzeConfig cfg;
        if (!config_path.empty()) {
            cfg = report::AnalyzeConfig::from_file(config_path);
        }
        if (rank_tol > 0.0) cfg.rank_tol = rank_tol;
        if (grid_m > 0) cfg.grid_m = grid_m;
        if (!activation.empty()) cfg.activation = activation;
        if (!prefix.empty()) cfg.prefix = prefix;
        if (head_dim > 0) cfg.head_dim = head_dim;
        if (threads > 0) cfg.threads = threads;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file with bound constants");
    cmd->add_option("--rank-tol", opts.rank_tol, "relative rank tolerance override");
    cmd->add_option("--grid", opts.grid_m, "Schatten index grid resolution m");
    cmd->add_option("--activation", opts.activation, "feedforward activation (relu|gelu)");
    cmd->add_option("--prefix", opts.prefix, "tensor name prefix");
    cmd->add_option("--head-dim", opts.head_dim, "attention head dimension");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

int run(int argc, char** argv) {
    CLI::App app{"spectrum-adaptive complexity proxies for transformer checkpoints"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- analyze
    auto* analyze = app.add_subcommand("analyze", "full spectral analysis of one checkpoint");
    std::string analyze_path, analyze_out;
    CommonOpts analyze_opts;
    analyze->add_option("path", analyze_path, "checkpoint file")->required();
    analyze->add_option("--out", analyze_out, "output file (default stdout)");
    add_common(analyze, analyze_opts);

    // ------------------------------------------------------------- compare
    auto* compare = app.add_subcommand("compare", "proxy scaling across checkpoints");
    std::vector<std::string> compare_paths;
    std::string compare_out, compare_plot;
    bool compare_linear_y = false;
    bool compare_normalize = true;
    CommonOpts compare_opts;
    compare->add_option("paths", compare_paths, "checkpoint files sharing a sweep axis")
        ->required()
        ->expected(-2);
    compare->add_option("--out", compare_out, "CSV output file (default stdout)");
    compare->add_option("--plot", compare_plot, "also write an SVG chart here");
    compare->add_flag("--linear-y", compare_linear_y, "linear instead of log y axis");
    compare->add_flag("--normalize,!--raw", compare_normalize,
                      "plot base-normalized curves (default) or raw values");
    add_common(compare, compare_opts);

    // ------------------------------------------------------------- sweep-p
    auto* sweep = app.add_subcommand("sweep-p", "per-matrix term(p)/term(0) over the grid");
    std::string sweep_path, sweep_out;
    CommonOpts sweep_opts;
    sweep->add_option("path", sweep_path, "checkpoint file")->required();
    sweep->add_option("--out", sweep_out, "CSV output file (default stdout)");
    add_common(sweep, sweep_opts);

    // ------------------------------------------------------------- spectra
    auto* spectra = app.add_subcommand("spectra", "singular values of every composed matrix");
    std::string spectra_path, spectra_out;
    CommonOpts spectra_opts;
    spectra->add_option("path", spectra_path, "checkpoint file")->required();
    spectra->add_option("--out", spectra_out, "CSV output file (default stdout)");
    add_common(spectra, spectra_opts);

    // -------------------------------------------------------- norm-scaling
    auto* norms = app.add_subcommand("norm-scaling", "mixed-norm growth across checkpoints");
    std::vector<std::string> norms_paths;
    std::string norms_out;
    CommonOpts norms_opts;
    norms->add_option("paths", norms_paths, "checkpoint files")->required()->expected(-1);
    norms->add_option("--out", norms_out, "CSV output file (default stdout)");
    add_common(norms, norms_opts);

    // -------------------------------------------------------- regime-table
    auto* regime = app.add_subcommand("regime-table", "leading-factor comparison in a regime");
    std::string regime_name = "rank";
    std::int64_t regime_N = 128, regime_L = 2;
    double regime_c = 64.0, regime_prop = 2.0;
    regime->add_option("--regime", regime_name, "frobenius | rank | spectral-only");
    regime->add_option("--N", regime_N, "hidden dimension");
    regime->add_option("--L", regime_L, "depth");
    regime->add_option("--c", regime_c, "radius constant (C_F or r)");
    regime->add_option("--prop", regime_prop, "layerwise propagation constant C");

    // --------------------------------------------------------------- synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic checkpoint");
    std::string synth_spec_path, synth_out = "synthetic.safetensors";
    std::int64_t synth_L = 0, synth_N = 0;
    std::uint64_t synth_seed = 1;
    bool synth_f64 = false;
    synth->add_option("--spec", synth_spec_path, "JSON spec file");
    synth->add_option("--preset-L", synth_L, "miniatures preset: depth");
    synth->add_option("--preset-N", synth_N, "miniatures preset: hidden dimension");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_flag("--f64", synth_f64, "store 64-bit payload");
    synth->add_option("--out", synth_out, "output checkpoint path");

    // -------------------------------------------------------------- verify
    auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
    std::string verify_suite;
    long long verify_trials = 200;
    std::uint64_t verify_seed = 20240901;
    verify_cmd->add_option("--suite", verify_suite, "norms|lipschitz|allocation|posthoc|parser")
        ->required();
    verify_cmd->add_option("--trials", verify_trials, "trial count");
    verify_cmd->add_option("--seed", verify_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*analyze) {
            const auto fa = report::analyze_checkpoint_file(analyze_path, analyze_opts.resolve());
            write_text(analyze_out, report::report_json(fa).dump(2) + "\n");
        } else if (*compare) {
            const auto cfg = compare_opts.resolve();
            std::vector<report::FileAnalysis> files;
            files.reserve(compare_paths.size());
            for (const auto& p : compare_paths) {
                files.push_back(report::analyze_checkpoint_file(p, cfg));
            }
            write_text(compare_out, report::csv_compare(files));
            if (!compare_plot.empty()) {
                write_text(compare_plot,
                           report::svg_compare(files, !compare_linear_y, compare_normalize));
            }
        } else if (*sweep) {
            const auto fa = report::analyze_checkpoint_file(sweep_path, sweep_opts.resolve());
            write_text(sweep_out, report::csv_sweep(fa));
        } else if (*spectra) {
            const auto fa = report::analyze_checkpoint_file(spectra_path, spectra_opts.resolve());
            write_text(spectra_out, report::csv_spectra(fa));
        } else if (*norms) {
            const auto cfg = norms_opts.resolve();
            std::vector<report::FileAnalysis> files;
            for (const auto& p : norms_paths) {
                files.push_back(report::analyze_checkpoint_file(p, cfg));
            }
            write_text(norms_out, report::csv_norm_scaling(files));
        } else if (*regime) {
            const auto row = baselines::regime_table(baselines::regime_from_name(regime_name),
                                                     regime_N, regime_L, regime_c, regime_prop);
            json j = {{"regime", regime_name},
                      {"N", regime_N},
                      {"L", regime_L},
                      {"c", regime_c},
                      {"prop", regime_prop},
                      {"ours", {{"value", row.ours.value}, {"formula", row.ours.formula}}},
                      {"edelman",
                       {{"value", row.edelman.value}, {"formula", row.edelman.formula}}},
                      {"trauger",
                       {{"value", row.trauger.value}, {"formula", row.trauger.formula}}}};
            std::cout << j.dump(2) << "\n";
        } else if (*synth) {
            ingest::SynthSpec spec;
            if (!synth_spec_path.empty()) {
                std::ifstream in(synth_spec_path);
                if (!in) {
                    throw std::runtime_error("cannot open spec file: " + synth_spec_path);
                }
                std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
                spec = ingest::SynthSpec::from_json(text);
            } else if (synth_L > 0 && synth_N > 0) {
                spec = ingest::SynthSpec::miniatures(synth_L, synth_N, synth_seed);
            } else {
                std::cerr << "synth: either --spec or both --preset-L and --preset-N required\n";
                return kExitUsage;
            }
            if (synth_seed != 1) spec.seed = synth_seed;
            if (synth_f64) spec.dtype = ingest::Dtype::f64;
            ingest::write_checkpoint(synth_out, ingest::synth_checkpoint(spec));
            std::cout << "wrote " << synth_out << "\n";
        } else if (*verify_cmd) {
            const auto result = verify::run_suite(verify_suite, verify_trials, verify_seed);
            for (const auto& prop : result.properties) {
                std::printf("%-40s checks=%-8lld violations=%-6lld worst_slack=%.3e\n",
                            prop.name.c_str(), prop.checks, prop.violations, prop.worst_slack);
                if (!prop.passed()) {
                    std::cerr << "failing instance (" << prop.name << "): " << prop.failing
                              << "\n";
                }
            }
            std::printf("suite %s: %s\n", result.suite.c_str(),
                        result.passed() ? "pass" : "FAIL");
            return result.passed() ? kExitOk : kExitViolation;
        }
    } catch (const ingest::ParseError& e) {
        const auto error_class = [&] {
            switch (e.kind()) {
                case ingest::ParseError::Kind::missing_tensor:
                case ingest::ParseError::Kind::layout:
                    return "layout";
                case ingest::ParseError::Kind::io:
                    return "io";
                default:
                    return "parse";
            }
        }();
        json err = {{"error",
                     {{"class", error_class}, {"kind", e.kind_name()}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        // unknown suite names and similar argument mistakes are usage errors
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        json err = {{"error", {{"kind", "runtime"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return kExitInput;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
