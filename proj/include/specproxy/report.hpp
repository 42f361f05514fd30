#ifndef SPECPROXY_REPORT_HPP
#define SPECPROXY_REPORT_HPP

#include "specproxy/bertproxy.hpp"
#include "specproxy/ingest.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace specproxy::report {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Analysis configuration; every field is echoed into the report so the
/// Theta(1) constants are auditable.
struct AnalyzeConfig {
    bounds::BoundConfig bound;   // depth/hidden_dim/act_lipschitz filled per checkpoint
    std::string activation = "gelu";
    double rank_tol = -1.0;      // <= 0 selects the per-shape default
    int grid_m = 0;              // 0 selects ceil(L + log N)
    std::string prefix;
    std::int64_t head_dim = 64;
    int threads = 0;

    double act_lipschitz() const;
    nlohmann::json echo() const;
    static AnalyzeConfig from_json(const nlohmann::json& j);
    static AnalyzeConfig from_file(const std::string& path);
};

/// Everything the report emitters need about one analyzed checkpoint.
struct FileAnalysis {
    std::string path;
    std::string file_hash;  // fnv1a64 of the raw bytes
    AnalyzeConfig cfg;
    bertproxy::BertAnalysis analysis;
    bertproxy::BoursResult ours;
    double edelman = 0.0;
};

FileAnalysis analyze_checkpoint_file(const std::string& path, const AnalyzeConfig& cfg);
FileAnalysis analyze_table(const ingest::TensorTable& table, const AnalyzeConfig& cfg,
                           const std::string& path_label, const std::string& file_hash);

nlohmann::json report_json(const FileAnalysis& fa);

/// CSV rows (L, N, raw and normalized proxies); inputs must share exactly one
/// sweep axis.
std::string csv_compare(const std::vector<FileAnalysis>& files);
std::string svg_compare(const std::vector<FileAnalysis>& files, bool log_y = true,
                        bool normalized = true);

std::string csv_sweep(const FileAnalysis& fa);
std::string csv_spectra(const FileAnalysis& fa);
std::string csv_norm_scaling(const std::vector<FileAnalysis>& files);

std::string fnv1a64_hex(const std::string& path);

/// Minimal SVG 1.1 line chart, 800x600 fixed viewport.
struct ChartSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<ChartSeries>& series,
                           bool log_y);

}  // namespace specproxy::report

#endif
