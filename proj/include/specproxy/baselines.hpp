#ifndef SPECPROXY_BASELINES_HPP
#define SPECPROXY_BASELINES_HPP

#include "specproxy/bounds.hpp"
#include "specproxy/spectral.hpp"

#include <string>
#include <vector>

namespace specproxy::baselines {

using bounds::BoundConfig;
using bounds::LayerRadii;

/// Observed or prescribed mixed-norm radii per layer. The query-key entry is
/// the (2,1)-norm of the transposed matrix, matching the class the baseline
/// bound is stated for.
struct MixedRadii {
    struct Entry {
        double c21_qk = 0.0, c21_v = 0.0, c21_m = 0.0;
        double c11_qk = 0.0, c11_v = 0.0, c11_m = 0.0;
    };
    std::vector<Entry> layers;

    std::int64_t depth() const { return static_cast<std::int64_t>(layers.size()); }
    static MixedRadii measured(const std::vector<std::array<Matrix, 3>>& weights);
};

struct BaselineResult {
    double leading = 0.0;  // dimensionless leading complexity factor
    double full = 0.0;     // full proxy including sample-size and confidence terms
};

/// Mixed-(2,1)-norm baseline: leading factor (1 + sum_l alpha^(2/3) xi)^{3/2}.
BaselineResult edelman_factor(const MixedRadii& mixed, const LayerRadii& radii,
                              const BoundConfig& cfg);

/// Mixed-(1,1)-norm baseline with layer-uniform spectral radii.
BaselineResult trauger_factor(double c11, double c2_qk, double c2_v, double c2_m,
                              const BoundConfig& cfg);

/// The two norm-conversion chains for a square matrix:
/// |W|_{2,1} <= sqrt(N) |W|_F <= sqrt(N rank) |W|_2 and
/// |W|_{1,1} <= N |W|_F <= N sqrt(rank) |W|_2.
struct ConversionBounds {
    double mixed21 = 0.0;
    double sqrtN_frob = 0.0;
    double sqrtNrank_spec = 0.0;
    double mixed11 = 0.0;
    double N_frob = 0.0;
    double Nsqrtrank_spec = 0.0;
};

ConversionBounds conversion_bounds(const Matrix& m);

enum class Regime { frobenius, rank, spectral_only };

Regime regime_from_name(const std::string& name);

/// One leading-factor cell: a numeric value plus its canonical formula text.
struct RegimeCell {
    double value = 0.0;
    std::string formula;
};

struct RegimeRow {
    RegimeCell ours;
    RegimeCell edelman;
    RegimeCell trauger;
};

/// Leading complexity factors in the three matched-constraint regimes.
/// `c` is the radius constant of the regime (Frobenius radius C_F or rank r;
/// ignored for spectral-only), and `prop` the worst-case layerwise
/// propagation constant of the norm-based baselines.
RegimeRow regime_table(Regime regime, std::int64_t hidden_dim, std::int64_t depth,
                       double c, double prop);

}  // namespace specproxy::baselines

#endif
