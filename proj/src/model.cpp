#include "specproxy/model.hpp"

#include <cmath>
#include <stdexcept>

namespace specproxy::model {

double Activation::operator()(double x) const {
    if (kind == Kind::relu) {
        return x > 0.0 ? x : 0.0;
    }
    // exact Gaussian-CDF form: x * Phi(x)
    return x * 0.5 * std::erfc(-x / std::sqrt(2.0));
}

Activation Activation::from_name(const std::string& name) {
    if (name == "relu") {
        return {Kind::relu};
    }
    if (name == "gelu") {
        return {Kind::gelu};
    }
    throw std::invalid_argument("unknown activation: " + name);
}

Matrix softmax_rows(const Matrix& z) {
    require_finite(z, "softmax_rows");
    Matrix out(z.rows(), z.cols());
    for (Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        double sum = 0.0;
        for (Index j = 0; j < z.cols(); ++j) {
            const double e = std::exp(z(i, j) - m);
            out(i, j) = e;
            sum += e;
        }
        out.row(i) /= sum;
    }
    return out;
}

Matrix project_rows(const Matrix& z) {
    require_finite(z, "project_rows");
    Matrix out = z;
    for (Index i = 0; i < z.rows(); ++i) {
        const double n = out.row(i).norm();
        if (n > 1.0) {
            out.row(i) /= n;
        }
    }
    return out;
}

namespace {

void check_square(const Matrix& w, Index n, const char* what) {
    if (w.rows() != n || w.cols() != n) {
        throw std::invalid_argument(std::string(what) + ": expected square matrix matching the hidden dimension");
    }
}

}  // namespace

Matrix head_forward(const Matrix& x, const Matrix& w_qk, const Matrix& w_v) {
    check_square(w_qk, x.cols(), "head_forward(w_qk)");
    check_square(w_v, x.cols(), "head_forward(w_v)");
    const Matrix scores = x * w_qk * x.transpose();
    return softmax_rows(scores) * (x * w_v);
}

Matrix block_forward(const Matrix& x, const Matrix& w_qk, const Matrix& w_v,
                     const Matrix& w_m, const Activation& act) {
    check_square(w_m, x.cols(), "block_forward(w_m)");
    Matrix h = project_rows(head_forward(x, w_qk, w_v));
    h = h.unaryExpr([&act](double v) { return act(v); });
    return project_rows(h * w_m);
}

Matrix transformer_forward(const Matrix& x, const TheoryWeights& w, const Activation& act) {
    if (w.layers.empty()) {
        throw std::invalid_argument("transformer_forward: at least one layer required");
    }
    Matrix z = x;
    for (const auto& layer : w.layers) {
        z = block_forward(z, layer.w_qk, layer.w_v, layer.w_m, act);
    }
    return z;
}

double scalar_output(const Matrix& x, const TheoryWeights& w, const Activation& act) {
    if (w.cls_index < 0 || w.cls_index >= x.rows()) {
        throw std::invalid_argument("scalar_output: cls_index out of range");
    }
    if (w.readout.size() != x.cols()) {
        throw std::invalid_argument("scalar_output: readout dimension mismatch");
    }
    const Matrix z = transformer_forward(x, w, act);
    return w.readout.dot(z.row(w.cls_index));
}

}  // namespace specproxy::model
