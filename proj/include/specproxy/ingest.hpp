#ifndef SPECPROXY_INGEST_HPP
#define SPECPROXY_INGEST_HPP

#include "specproxy/bertproxy.hpp"
#include "specproxy/spectral.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace specproxy::ingest {

enum class Dtype { f64, f32, f16, bf16 };

std::size_t dtype_size(Dtype d);
const char* dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name);

class ParseError : public std::runtime_error {
  public:
    enum class Kind {
        truncated_header,
        header_out_of_range,
        bad_json,
        unknown_dtype,
        bad_shape,
        bad_offsets,
        overlap,
        missing_tensor,
        layout,
        io
    };

    ParseError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }
    const char* kind_name() const;

  private:
    Kind kind_;
};

struct TensorInfo {
    Dtype dtype = Dtype::f32;
    std::vector<std::int64_t> shape;
    std::uint64_t begin = 0;
    std::uint64_t end = 0;

    std::int64_t numel() const;
};

/// In-memory view of a checkpoint container: name -> (dtype, shape, byte
/// range into the shared payload), plus free-form string metadata. Tensors
/// materialize on demand as 64-bit reals.
struct TensorTable {
    std::map<std::string, TensorInfo> tensors;
    std::map<std::string, std::string> metadata;
    std::vector<std::uint8_t> payload;

    const TensorInfo& info(const std::string& name) const;
    std::vector<double> tensor_data(const std::string& name) const;
    /// 2-D tensor in its stored row-major orientation.
    Matrix tensor_matrix(const std::string& name) const;

    /// Append a 2-D tensor, converting from f64 row-major values.
    void add_matrix(const std::string& name, Dtype dtype, const Matrix& stored);
    /// Append raw bytes (length must match dtype and shape).
    void add_raw(const std::string& name, Dtype dtype, std::vector<std::int64_t> shape,
                 std::vector<std::uint8_t> bytes);
};

bool tables_equal(const TensorTable& a, const TensorTable& b);

TensorTable parse_safetensors(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> write_safetensors(const TensorTable& table);

TensorTable read_checkpoint(const std::string& path);
void write_checkpoint(const std::string& path, const TensorTable& table);

struct LayoutOptions {
    std::string prefix;           // prepended to encoder.layer.{i}....
    std::int64_t head_dim = 64;   // d_h
};

/// Map standard encoder tensor names into composed per-head and feedforward
/// matrices. Stored (out, in) weights acting by x W^T are transposed once so
/// everything acts on row vectors as X W; heads are contiguous d_h blocks
/// along the projection output dimension.
bertproxy::BertCheckpoint map_bert_layout(const TensorTable& table,
                                          const LayoutOptions& opts = {});

struct SpectrumLaw {
    enum class Kind { exact_rank, power_law, gaussian };
    Kind kind = Kind::gaussian;
    std::int64_t rank = 0;   // exact_rank
    double sigma = 1.0;      // exact_rank: common singular value
    double sigma1 = 1.0;     // power_law: leading singular value
    double beta = 0.7;       // power_law: decay exponent
    double scale = 1.0;      // gaussian: entry standard deviation

    static SpectrumLaw exact_rank_law(std::int64_t r, double sigma);
    static SpectrumLaw power_law_law(double sigma1, double beta);
    static SpectrumLaw gaussian_law(double scale);

    /// Prescribed singular values (exact_rank / power_law only).
    std::vector<double> sigmas(std::int64_t count) const;
};

struct SynthSpec {
    std::int64_t L = 2;
    std::int64_t N = 128;
    std::int64_t d_h = 64;
    std::int64_t I = 0;  // 0 selects 4N
    SpectrumLaw qk = SpectrumLaw::exact_rank_law(64, 1.0);
    SpectrumLaw vtilde = SpectrumLaw::exact_rank_law(64, 1.0);
    SpectrumLaw ffn_in = SpectrumLaw::power_law_law(20.0, 0.7);
    SpectrumLaw ffn_out = SpectrumLaw::power_law_law(20.0, 0.7);
    std::uint64_t seed = 1;
    Dtype dtype = Dtype::f32;

    std::int64_t intermediate() const { return I > 0 ? I : 4 * N; }
    void validate() const;

    /// Miniatures-like preset: unit-spectrum rank-64 composed attention and
    /// power-law feedforward spectra with leading value 20.
    static SynthSpec miniatures(std::int64_t L, std::int64_t N, std::uint64_t seed);

    std::string to_json() const;
    static SynthSpec from_json(const std::string& text);
};

/// Deterministic synthetic checkpoint in BERT layout and orientation, so that
/// map_bert_layout recovers the prescribed spectra.
TensorTable synth_checkpoint(const SynthSpec& spec);

}  // namespace specproxy::ingest

#endif
