#ifndef SPECPROXY_MODEL_HPP
#define SPECPROXY_MODEL_HPP

#include "specproxy/spectral.hpp"

#include <string>
#include <vector>

namespace specproxy::model {

/// Feedforward activation. Both choices vanish at zero; the Lipschitz
/// constant for gelu is the fixed 1.13 envelope rather than a recomputed one.
struct Activation {
    enum class Kind { relu, gelu };
    Kind kind = Kind::relu;

    double lipschitz() const { return kind == Kind::relu ? 1.0 : 1.13; }
    double operator()(double x) const;
    static Activation from_name(const std::string& name);
    const char* name() const { return kind == Kind::relu ? "relu" : "gelu"; }
};

/// Weights of the simplified single-head model: L layers of square
/// (W_qk, W_v, W_m) triples plus a readout vector and the CLS row index.
struct TheoryWeights {
    struct Layer {
        Matrix w_qk;
        Matrix w_v;
        Matrix w_m;
    };
    std::vector<Layer> layers;
    Eigen::VectorXd readout;
    Index cls_index = 0;

    Index depth() const { return static_cast<Index>(layers.size()); }
    Index hidden_dim() const { return readout.size(); }
};

/// Rowwise softmax with row-max stabilization; every output row is a
/// probability vector.
Matrix softmax_rows(const Matrix& z);

/// Rowwise projection onto the unit l2 ball: r -> r / max(1, |r|).
Matrix project_rows(const Matrix& z);

/// softmax(X W_qk X^T) X W_v
Matrix head_forward(const Matrix& x, const Matrix& w_qk, const Matrix& w_v);

/// Pi(phi(Pi(head(X))) W_m); output rows have norm at most one.
Matrix block_forward(const Matrix& x, const Matrix& w_qk, const Matrix& w_v,
                     const Matrix& w_m, const Activation& act);

Matrix transformer_forward(const Matrix& x, const TheoryWeights& w, const Activation& act);

/// Readout applied to the CLS row of the final layer; bounded by |readout|_2.
double scalar_output(const Matrix& x, const TheoryWeights& w, const Activation& act);

}  // namespace specproxy::model

#endif
