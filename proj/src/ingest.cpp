#include "specproxy/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

namespace specproxy::ingest {

using json = nlohmann::json;

std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::f64: return 8;
        case Dtype::f32: return 4;
        case Dtype::f16: return 2;
        case Dtype::bf16: return 2;
    }
    return 0;
}

const char* dtype_name(Dtype d) {
    switch (d) {
        case Dtype::f64: return "F64";
        case Dtype::f32: return "F32";
        case Dtype::f16: return "F16";
        case Dtype::bf16: return "BF16";
    }
    return "?";
}

Dtype dtype_from_name(const std::string& name) {
    if (name == "F64") return Dtype::f64;
    if (name == "F32") return Dtype::f32;
    if (name == "F16") return Dtype::f16;
    if (name == "BF16") return Dtype::bf16;
    throw ParseError(ParseError::Kind::unknown_dtype, "unknown dtype: " + name);
}

const char* ParseError::kind_name() const {
    switch (kind_) {
        case Kind::truncated_header: return "truncated_header";
        case Kind::header_out_of_range: return "header_out_of_range";
        case Kind::bad_json: return "bad_json";
        case Kind::unknown_dtype: return "unknown_dtype";
        case Kind::bad_shape: return "bad_shape";
        case Kind::bad_offsets: return "bad_offsets";
        case Kind::overlap: return "overlap";
        case Kind::missing_tensor: return "missing_tensor";
        case Kind::layout: return "layout";
        case Kind::io: return "io";
    }
    return "?";
}

std::int64_t TensorInfo::numel() const {
    std::int64_t n = 1;
    for (std::int64_t s : shape) {
        if (s < 0) {
            throw ParseError(ParseError::Kind::bad_shape, "negative shape entry");
        }
        if (s != 0 && n > std::numeric_limits<std::int64_t>::max() / s) {
            throw ParseError(ParseError::Kind::bad_shape, "shape product overflows");
        }
        n *= s;
    }
    return n;
}

namespace {

double decode_f16(std::uint16_t bits) {
    const std::uint16_t sign = bits >> 15;
    const std::uint16_t exp = (bits >> 10) & 0x1f;
    const std::uint16_t frac = bits & 0x3ff;
    double v;
    if (exp == 0) {
        v = std::ldexp(static_cast<double>(frac), -24);  // subnormal
    } else if (exp == 31) {
        v = frac == 0 ? std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::quiet_NaN();
    } else {
        v = std::ldexp(1.0 + static_cast<double>(frac) / 1024.0, exp - 15);
    }
    return sign ? -v : v;
}

double decode_bf16(std::uint16_t bits) {
    const std::uint32_t widened = static_cast<std::uint32_t>(bits) << 16;
    float f;
    std::memcpy(&f, &widened, 4);
    return static_cast<double>(f);
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | p[i];
    }
    return v;
}

void write_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

}  // namespace

const TensorInfo& TensorTable::info(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw ParseError(ParseError::Kind::missing_tensor, "missing tensor: " + name);
    }
    return it->second;
}

std::vector<double> TensorTable::tensor_data(const std::string& name) const {
    const TensorInfo& ti = info(name);
    const std::int64_t n = ti.numel();
    std::vector<double> out(static_cast<std::size_t>(n));
    const std::uint8_t* p = payload.data() + ti.begin;
    switch (ti.dtype) {
        case Dtype::f64:
            for (std::int64_t i = 0; i < n; ++i) {
                double v;
                std::memcpy(&v, p + 8 * i, 8);
                out[static_cast<std::size_t>(i)] = v;
            }
            break;
        case Dtype::f32:
            for (std::int64_t i = 0; i < n; ++i) {
                float v;
                std::memcpy(&v, p + 4 * i, 4);
                out[static_cast<std::size_t>(i)] = static_cast<double>(v);
            }
            break;
        case Dtype::f16:
        case Dtype::bf16:
            for (std::int64_t i = 0; i < n; ++i) {
                std::uint16_t bits;
                std::memcpy(&bits, p + 2 * i, 2);
                out[static_cast<std::size_t>(i)] =
                    ti.dtype == Dtype::f16 ? decode_f16(bits) : decode_bf16(bits);
            }
            break;
    }
    return out;
}

Matrix TensorTable::tensor_matrix(const std::string& name) const {
    const TensorInfo& ti = info(name);
    if (ti.shape.size() != 2) {
        throw ParseError(ParseError::Kind::layout, "tensor is not 2-D: " + name);
    }
    const std::vector<double> data = tensor_data(name);
    Matrix m(ti.shape[0], ti.shape[1]);
    for (std::int64_t r = 0; r < ti.shape[0]; ++r) {
        for (std::int64_t c = 0; c < ti.shape[1]; ++c) {
            m(r, c) = data[static_cast<std::size_t>(r * ti.shape[1] + c)];
        }
    }
    return m;
}

void TensorTable::add_matrix(const std::string& name, Dtype dtype, const Matrix& stored) {
    std::vector<std::uint8_t> bytes;
    const std::int64_t rows = stored.rows();
    const std::int64_t cols = stored.cols();
    bytes.reserve(static_cast<std::size_t>(rows * cols) * dtype_size(dtype));
    for (std::int64_t r = 0; r < rows; ++r) {
        for (std::int64_t c = 0; c < cols; ++c) {
            const double v = stored(r, c);
            if (dtype == Dtype::f64) {
                std::uint8_t buf[8];
                std::memcpy(buf, &v, 8);
                bytes.insert(bytes.end(), buf, buf + 8);
            } else if (dtype == Dtype::f32) {
                const float f = static_cast<float>(v);
                std::uint8_t buf[4];
                std::memcpy(buf, &f, 4);
                bytes.insert(bytes.end(), buf, buf + 4);
            } else {
                throw std::invalid_argument("add_matrix: f16/bf16 writing not supported");
            }
        }
    }
    add_raw(name, dtype, {rows, cols}, std::move(bytes));
}

void TensorTable::add_raw(const std::string& name, Dtype dtype,
                          std::vector<std::int64_t> shape, std::vector<std::uint8_t> bytes) {
    TensorInfo ti;
    ti.dtype = dtype;
    ti.shape = std::move(shape);
    const std::uint64_t expect = static_cast<std::uint64_t>(ti.numel()) * dtype_size(dtype);
    if (bytes.size() != expect) {
        throw std::invalid_argument("add_raw: byte length does not match shape");
    }
    if (tensors.count(name)) {
        throw std::invalid_argument("add_raw: duplicate tensor name " + name);
    }
    ti.begin = payload.size();
    payload.insert(payload.end(), bytes.begin(), bytes.end());
    ti.end = payload.size();
    tensors.emplace(name, std::move(ti));
}

bool tables_equal(const TensorTable& a, const TensorTable& b) {
    if (a.metadata != b.metadata || a.tensors.size() != b.tensors.size()) {
        return false;
    }
    for (const auto& [name, ti] : a.tensors) {
        auto it = b.tensors.find(name);
        if (it == b.tensors.end()) return false;
        const TensorInfo& tb = it->second;
        if (ti.dtype != tb.dtype || ti.shape != tb.shape) return false;
        const std::uint64_t len = ti.end - ti.begin;
        if (len != tb.end - tb.begin) return false;
        if (std::memcmp(a.payload.data() + ti.begin, b.payload.data() + tb.begin, len) != 0) {
            return false;
        }
    }
    return true;
}

TensorTable parse_safetensors(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8) {
        throw ParseError(ParseError::Kind::truncated_header, "file shorter than the header length field");
    }
    const std::uint64_t header_len = read_u64_le(bytes.data());
    if (header_len > bytes.size() - 8) {
        throw ParseError(ParseError::Kind::header_out_of_range,
                         "declared header length exceeds the file");
    }
    const char* header_begin = reinterpret_cast<const char*>(bytes.data() + 8);
    const json header = json::parse(header_begin, header_begin + header_len, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw ParseError(ParseError::Kind::bad_json, "malformed JSON header");
    }

    TensorTable table;
    const std::uint64_t payload_len = bytes.size() - 8 - header_len;
    table.payload.assign(bytes.begin() + 8 + static_cast<std::ptrdiff_t>(header_len), bytes.end());

    for (const auto& [name, entry] : header.items()) {
        if (name == "__metadata__") {
            if (!entry.is_object()) {
                throw ParseError(ParseError::Kind::bad_json, "__metadata__ must be an object");
            }
            for (const auto& [k, v] : entry.items()) {
                if (!v.is_string()) {
                    throw ParseError(ParseError::Kind::bad_json, "__metadata__ values must be strings");
                }
                table.metadata[k] = v.get<std::string>();
            }
            continue;
        }
        if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
            !entry.contains("data_offsets")) {
            throw ParseError(ParseError::Kind::bad_json,
                             "tensor entry missing dtype/shape/data_offsets: " + name);
        }
        TensorInfo ti;
        if (!entry["dtype"].is_string()) {
            throw ParseError(ParseError::Kind::bad_json, "dtype must be a string: " + name);
        }
        ti.dtype = dtype_from_name(entry["dtype"].get<std::string>());
        if (!entry["shape"].is_array()) {
            throw ParseError(ParseError::Kind::bad_shape, "shape must be an array: " + name);
        }
        for (const auto& s : entry["shape"]) {
            if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
                throw ParseError(ParseError::Kind::bad_shape,
                                 "shape entries must be nonnegative integers: " + name);
            }
            ti.shape.push_back(s.get<std::int64_t>());
        }
        const auto& off = entry["data_offsets"];
        if (!off.is_array() || off.size() != 2 || !off[0].is_number_unsigned() ||
            !off[1].is_number_unsigned()) {
            throw ParseError(ParseError::Kind::bad_offsets, "bad data_offsets: " + name);
        }
        ti.begin = off[0].get<std::uint64_t>();
        ti.end = off[1].get<std::uint64_t>();
        if (ti.begin > ti.end || ti.end > payload_len) {
            throw ParseError(ParseError::Kind::bad_offsets,
                             "data_offsets outside the payload: " + name);
        }
        const std::uint64_t count = static_cast<std::uint64_t>(ti.numel());
        if (count > std::numeric_limits<std::uint64_t>::max() / dtype_size(ti.dtype)) {
            throw ParseError(ParseError::Kind::bad_shape, "shape product overflows: " + name);
        }
        if (ti.end - ti.begin != count * dtype_size(ti.dtype)) {
            throw ParseError(ParseError::Kind::bad_shape,
                             "byte range does not match shape: " + name);
        }
        table.tensors.emplace(name, std::move(ti));
    }

    // reject overlapping ranges
    std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
    ranges.reserve(table.tensors.size());
    for (const auto& [name, ti] : table.tensors) {
        if (ti.end > ti.begin) {
            ranges.emplace_back(ti.begin, ti.end);
        }
    }
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first < ranges[i - 1].second) {
            throw ParseError(ParseError::Kind::overlap, "overlapping tensor byte ranges");
        }
    }
    return table;
}

std::vector<std::uint8_t> write_safetensors(const TensorTable& table) {
    // canonical layout: lexicographic tensor order, contiguous offsets
    json header = json::object();
    if (!table.metadata.empty()) {
        header["__metadata__"] = table.metadata;
    }
    std::vector<std::uint8_t> payload;
    for (const auto& [name, ti] : table.tensors) {
        const std::uint64_t begin = payload.size();
        payload.insert(payload.end(), table.payload.begin() + static_cast<std::ptrdiff_t>(ti.begin),
                       table.payload.begin() + static_cast<std::ptrdiff_t>(ti.end));
        const std::uint64_t end = payload.size();
        header[name] = {
            {"dtype", dtype_name(ti.dtype)}, {"shape", ti.shape}, {"data_offsets", {begin, end}}};
    }
    const std::string text = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(8 + text.size() + payload.size());
    write_u64_le(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

TensorTable read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError(ParseError::Kind::io, "cannot open file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return parse_safetensors(bytes);
}

void write_checkpoint(const std::string& path, const TensorTable& table) {
    const std::vector<std::uint8_t> bytes = write_safetensors(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ParseError(ParseError::Kind::io, "cannot open file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw ParseError(ParseError::Kind::io, "write failed: " + path);
    }
}

namespace {

std::string layer_name(const LayoutOptions& opts, std::int64_t ell, const char* suffix) {
    return opts.prefix + "encoder.layer." + std::to_string(ell) + "." + suffix;
}

}  // namespace

bertproxy::BertCheckpoint map_bert_layout(const TensorTable& table, const LayoutOptions& opts) {
    // depth = number of consecutive layers starting at 0
    std::int64_t depth = 0;
    while (table.tensors.count(layer_name(opts, depth, "attention.self.query.weight"))) {
        ++depth;
    }
    if (depth == 0) {
        throw ParseError(ParseError::Kind::layout,
                         "no encoder layers found (checked " +
                             layer_name(opts, 0, "attention.self.query.weight") + ")");
    }

    static const char* kRequired[] = {
        "attention.self.query.weight",   "attention.self.key.weight",
        "attention.self.value.weight",   "attention.output.dense.weight",
        "intermediate.dense.weight",     "output.dense.weight",
    };

    bertproxy::BertCheckpoint ckpt;
    ckpt.L = depth;
    ckpt.d_h = opts.head_dim;

    for (std::int64_t ell = 0; ell < depth; ++ell) {
        for (const char* suffix : kRequired) {
            if (!table.tensors.count(layer_name(opts, ell, suffix))) {
                throw ParseError(ParseError::Kind::missing_tensor,
                                 "missing tensor: " + layer_name(opts, ell, suffix));
            }
        }
        const Matrix q_stored = table.tensor_matrix(layer_name(opts, ell, "attention.self.query.weight"));
        const Matrix k_stored = table.tensor_matrix(layer_name(opts, ell, "attention.self.key.weight"));
        const Matrix v_stored = table.tensor_matrix(layer_name(opts, ell, "attention.self.value.weight"));
        const Matrix o_stored = table.tensor_matrix(layer_name(opts, ell, "attention.output.dense.weight"));
        const Matrix in_stored = table.tensor_matrix(layer_name(opts, ell, "intermediate.dense.weight"));
        const Matrix out_stored = table.tensor_matrix(layer_name(opts, ell, "output.dense.weight"));

        const std::int64_t nd = q_stored.cols();
        if (ell == 0) {
            ckpt.N = nd;
            if (nd % opts.head_dim != 0) {
                throw ParseError(ParseError::Kind::layout,
                                 "hidden dimension not divisible by the head dimension");
            }
            ckpt.A_h = nd / opts.head_dim;
            ckpt.I = in_stored.rows();
        }
        if (q_stored.rows() != ckpt.N || q_stored.cols() != ckpt.N ||
            k_stored.rows() != ckpt.N || k_stored.cols() != ckpt.N ||
            v_stored.rows() != ckpt.N || v_stored.cols() != ckpt.N ||
            o_stored.rows() != ckpt.N || o_stored.cols() != ckpt.N ||
            in_stored.rows() != ckpt.I || in_stored.cols() != ckpt.N ||
            out_stored.rows() != ckpt.N || out_stored.cols() != ckpt.I) {
            throw ParseError(ParseError::Kind::layout,
                             "inconsistent tensor shapes at layer " + std::to_string(ell));
        }

        // orientation normalization: row form W acts as X * W
        const Matrix v_row = v_stored.transpose();
        const Matrix o_row = o_stored.transpose();

        bertproxy::BertLayer layer;
        for (std::int64_t h = 0; h < ckpt.A_h; ++h) {
            const std::int64_t at = h * ckpt.d_h;
            // stored (out, in) rows of query/key are already the d_h x N slices
            const Matrix q_slice = q_stored.middleRows(at, ckpt.d_h);
            const Matrix k_slice = k_stored.middleRows(at, ckpt.d_h);
            layer.w_qk.push_back(bertproxy::compose_qk(q_slice, k_slice));
            const Matrix v_slice = v_row.middleCols(at, ckpt.d_h);
            const Matrix o_slice = o_row.middleRows(at, ckpt.d_h);
            layer.w_vtilde.push_back(bertproxy::compose_value_output(v_slice, o_slice));
        }
        layer.w_m_in = in_stored.transpose();
        layer.w_m_out = out_stored.transpose();
        ckpt.layers.push_back(std::move(layer));
    }
    ckpt.validate();
    return ckpt;
}

SpectrumLaw SpectrumLaw::exact_rank_law(std::int64_t r, double sigma) {
    SpectrumLaw law;
    law.kind = Kind::exact_rank;
    law.rank = r;
    law.sigma = sigma;
    return law;
}

SpectrumLaw SpectrumLaw::power_law_law(double sigma1, double beta) {
    SpectrumLaw law;
    law.kind = Kind::power_law;
    law.sigma1 = sigma1;
    law.beta = beta;
    return law;
}

SpectrumLaw SpectrumLaw::gaussian_law(double scale) {
    SpectrumLaw law;
    law.kind = Kind::gaussian;
    law.scale = scale;
    return law;
}

std::vector<double> SpectrumLaw::sigmas(std::int64_t count) const {
    std::vector<double> out(static_cast<std::size_t>(count), 0.0);
    switch (kind) {
        case Kind::exact_rank:
            for (std::int64_t i = 0; i < std::min(rank, count); ++i) {
                out[static_cast<std::size_t>(i)] = sigma;
            }
            break;
        case Kind::power_law:
            for (std::int64_t i = 0; i < count; ++i) {
                out[static_cast<std::size_t>(i)] =
                    sigma1 * std::pow(static_cast<double>(i + 1), -beta);
            }
            break;
        case Kind::gaussian:
            throw std::logic_error("SpectrumLaw::sigmas: gaussian law has no prescribed spectrum");
    }
    return out;
}

void SynthSpec::validate() const {
    if (L < 1 || N < 1 || d_h < 1) {
        throw std::invalid_argument("SynthSpec: positive dimensions required");
    }
    if (N % d_h != 0) {
        throw std::invalid_argument("SynthSpec: d_h must divide N");
    }
    if (dtype == Dtype::f16 || dtype == Dtype::bf16) {
        throw std::invalid_argument("SynthSpec: payload dtype must be F32 or F64");
    }
}

SynthSpec SynthSpec::miniatures(std::int64_t L, std::int64_t N, std::uint64_t seed) {
    SynthSpec spec;
    spec.L = L;
    spec.N = N;
    spec.d_h = 64;
    spec.qk = SpectrumLaw::exact_rank_law(64, 1.0);
    spec.vtilde = SpectrumLaw::exact_rank_law(64, 1.0);
    spec.ffn_in = SpectrumLaw::power_law_law(20.0, 0.7);
    spec.ffn_out = SpectrumLaw::power_law_law(20.0, 0.7);
    spec.seed = seed;
    spec.dtype = Dtype::f32;
    return spec;
}

namespace {

json law_to_json(const SpectrumLaw& law) {
    switch (law.kind) {
        case SpectrumLaw::Kind::exact_rank:
            return {{"kind", "exact_rank"}, {"rank", law.rank}, {"sigma", law.sigma}};
        case SpectrumLaw::Kind::power_law:
            return {{"kind", "power_law"}, {"sigma1", law.sigma1}, {"beta", law.beta}};
        case SpectrumLaw::Kind::gaussian:
            return {{"kind", "gaussian"}, {"scale", law.scale}};
    }
    return {};
}

SpectrumLaw law_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "exact_rank") {
        return SpectrumLaw::exact_rank_law(j.at("rank").get<std::int64_t>(),
                                           j.at("sigma").get<double>());
    }
    if (kind == "power_law") {
        return SpectrumLaw::power_law_law(j.at("sigma1").get<double>(),
                                          j.at("beta").get<double>());
    }
    if (kind == "gaussian") {
        return SpectrumLaw::gaussian_law(j.at("scale").get<double>());
    }
    throw std::invalid_argument("unknown spectrum law: " + kind);
}

}  // namespace

std::string SynthSpec::to_json() const {
    json j;
    j["L"] = L;
    j["N"] = N;
    j["d_h"] = d_h;
    j["I"] = intermediate();
    j["qk"] = law_to_json(qk);
    j["vtilde"] = law_to_json(vtilde);
    j["ffn_in"] = law_to_json(ffn_in);
    j["ffn_out"] = law_to_json(ffn_out);
    j["seed"] = seed;
    j["dtype"] = dtype_name(dtype);
    return j.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
    const json j = json::parse(text);
    SynthSpec spec;
    spec.L = j.at("L").get<std::int64_t>();
    spec.N = j.at("N").get<std::int64_t>();
    spec.d_h = j.value("d_h", std::int64_t{64});
    spec.I = j.value("I", std::int64_t{0});
    if (j.contains("qk")) spec.qk = law_from_json(j["qk"]);
    if (j.contains("vtilde")) spec.vtilde = law_from_json(j["vtilde"]);
    if (j.contains("ffn_in")) spec.ffn_in = law_from_json(j["ffn_in"]);
    if (j.contains("ffn_out")) spec.ffn_out = law_from_json(j["ffn_out"]);
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.dtype = dtype_from_name(j.value("dtype", std::string("F32")));
    spec.validate();
    return spec;
}

namespace {

/// Orthonormal columns from a fixed orthogonal mix of the standard frame:
/// the thin identity hit by a sequence of random Householder reflections.
Matrix orthonormal_columns(std::int64_t rows, std::int64_t cols, std::mt19937_64& rng) {
    Matrix q = Matrix::Identity(rows, cols);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int reflections = 48;
    Eigen::VectorXd v(rows);
    for (int r = 0; r < reflections; ++r) {
        for (std::int64_t i = 0; i < rows; ++i) {
            v(i) = gauss(rng);
        }
        v.normalize();
        q -= 2.0 * v * (v.transpose() * q);
    }
    return q;
}

Matrix factored_matrix(std::int64_t rows, std::int64_t cols, const SpectrumLaw& law,
                       std::mt19937_64& rng) {
    if (law.kind == SpectrumLaw::Kind::gaussian) {
        Matrix m(rows, cols);
        std::normal_distribution<double> gauss(0.0, law.scale);
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                m(r, c) = gauss(rng);
            }
        }
        return m;
    }
    const std::int64_t k = std::min(rows, cols);
    const std::vector<double> sig = law.sigmas(k);
    const Matrix u = orthonormal_columns(rows, k, rng);
    const Matrix v = orthonormal_columns(cols, k, rng);
    Matrix scaled = u;
    for (std::int64_t i = 0; i < k; ++i) {
        scaled.col(i) *= sig[static_cast<std::size_t>(i)];
    }
    return scaled * v.transpose();
}

/// Factor pair (a: rows x k, b: k x cols) whose product has the prescribed
/// spectrum: a = U sqrt(S), b = sqrt(S) V^T.
std::pair<Matrix, Matrix> factored_pair(std::int64_t rows, std::int64_t cols, std::int64_t k,
                                        const SpectrumLaw& law, std::mt19937_64& rng) {
    if (law.kind == SpectrumLaw::Kind::gaussian) {
        Matrix a(rows, k), b(k, cols);
        std::normal_distribution<double> gauss(0.0, law.scale);
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < k; ++c) {
                a(r, c) = gauss(rng);
            }
        }
        for (std::int64_t r = 0; r < k; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                b(r, c) = gauss(rng);
            }
        }
        return {a, b};
    }
    const std::vector<double> sig = law.sigmas(k);
    Matrix a = orthonormal_columns(rows, k, rng);
    Matrix bt = orthonormal_columns(cols, k, rng);
    for (std::int64_t i = 0; i < k; ++i) {
        const double root = std::sqrt(sig[static_cast<std::size_t>(i)]);
        a.col(i) *= root;
        bt.col(i) *= root;
    }
    return {a, Matrix(bt.transpose())};
}

}  // namespace

TensorTable synth_checkpoint(const SynthSpec& spec) {
    spec.validate();
    const std::int64_t nd = spec.N;
    const std::int64_t dh = spec.d_h;
    const std::int64_t heads = nd / dh;
    const std::int64_t id = spec.intermediate();
    std::mt19937_64 rng(spec.seed);

    TensorTable table;
    table.metadata["format"] = "synthetic";
    table.metadata["generator"] = "specproxy";

    const LayoutOptions opts;
    for (std::int64_t ell = 0; ell < spec.L; ++ell) {
        Matrix q_stored(nd, nd), k_stored(nd, nd), v_row(nd, nd), o_row(nd, nd);
        for (std::int64_t h = 0; h < heads; ++h) {
            // composed qk = q_slice^T k_slice with prescribed spectrum
            auto [qt, k_slice] = factored_pair(nd, nd, dh, spec.qk, rng);
            q_stored.middleRows(h * dh, dh) = qt.transpose();
            k_stored.middleRows(h * dh, dh) = k_slice;
            // composed vtilde = v_slice o_slice
            auto [v_slice, o_slice] = factored_pair(nd, nd, dh, spec.vtilde, rng);
            v_row.middleCols(h * dh, dh) = v_slice;
            o_row.middleRows(h * dh, dh) = o_slice;
        }
        const Matrix m_in = factored_matrix(nd, id, spec.ffn_in, rng);    // row form N x I
        const Matrix m_out = factored_matrix(id, nd, spec.ffn_out, rng);  // row form I x N

        table.add_matrix(layer_name(opts, ell, "attention.self.query.weight"), spec.dtype, q_stored);
        table.add_matrix(layer_name(opts, ell, "attention.self.key.weight"), spec.dtype, k_stored);
        table.add_matrix(layer_name(opts, ell, "attention.self.value.weight"), spec.dtype,
                         v_row.transpose());
        table.add_matrix(layer_name(opts, ell, "attention.output.dense.weight"), spec.dtype,
                         o_row.transpose());
        table.add_matrix(layer_name(opts, ell, "intermediate.dense.weight"), spec.dtype,
                         m_in.transpose());
        table.add_matrix(layer_name(opts, ell, "output.dense.weight"), spec.dtype,
                         m_out.transpose());
    }
    return table;
}

}  // namespace specproxy::ingest
