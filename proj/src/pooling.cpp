#include "svypool/pooling.hpp"

#include <cmath>
#include <limits>

#include "svypool/errors.hpp"
#include "svypool/linearization.hpp"

namespace svypool {

std::string to_string(WeightMode mode) {
    switch (mode) {
        case WeightMode::sampling: return "sampling";
        case WeightMode::own_alignment: return "own-alignment";
        case WeightMode::median_alignment: return "median-alignment";
    }
    return "unknown";
}

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "sampling" || name == "sw") return WeightMode::sampling;
    if (name == "own-alignment" || name == "own" || name == "oa")
        return WeightMode::own_alignment;
    if (name == "median-alignment" || name == "median" || name == "m")
        return WeightMode::median_alignment;
    throw config_error("unknown weight mode: " + name);
}

std::string to_string(CombineMode mode) {
    return mode == CombineMode::simple ? "simple" : "optimal";
}

CombineMode combine_mode_from_string(const std::string& name) {
    if (name == "simple") return CombineMode::simple;
    if (name == "optimal") return CombineMode::optimal;
    throw config_error("unknown combine mode: " + name);
}

CombineResult combine(double theta1, double var1, double theta2, double var2,
                      CombineMode mode) {
    if (var1 < 0.0 || var2 < 0.0)
        throw numeric_error("combine: negative variance input");
    CombineResult out;
    if (mode == CombineMode::simple) {
        out.delta = 0.5;
    } else if (var1 + var2 > 0.0) {
        out.delta = var2 / (var1 + var2);
    } else {
        out.delta = 0.5;
        out.degenerate_fallback = true;
    }
    out.combined = out.delta * theta1 + (1.0 - out.delta) * theta2;
    out.combined_var = out.delta * out.delta * var1 +
                       (1.0 - out.delta) * (1.0 - out.delta) * var2;
    return out;
}

PoolingWeights alignment_weights_for(IndicatorKind align_on,
                                     const SampleDraw& s1, const CalibrationSpec& spec1,
                                     const SampleDraw& s2, const CalibrationSpec& spec2) {
    const LinearizedVariable z1 = linearize(align_on, s1.design_series());
    const LinearizedVariable z2 = linearize(align_on, s2.design_series());
    AlignmentResult aligned = align(s1, spec1, z1.z, s2, spec2, z2.z);
    return {std::move(aligned.a1), std::move(aligned.a2), aligned.gamma,
            aligned.negative_weights1, aligned.negative_weights2};
}

PooledPair evaluate_pair(const SampleDraw& s1, const SampleDraw& s2,
                         const PoolingWeights& weights, IndicatorKind target,
                         WeightMode weight_mode) {
    const WeightTag tag =
        weight_mode == WeightMode::sampling ? WeightTag::design : WeightTag::aligned;
    const WeightedSeries series1 = s1.series_with(weights.a1);
    const WeightedSeries series2 = s2.series_with(weights.a2);

    PooledPair out;
    out.theta1 = indicator_value(target, series1);
    out.theta2 = indicator_value(target, series2);

    // Variances use the design's inclusion probabilities with the linearized
    // variable recomputed under the evaluation weights.
    const LinearizedVariable z1 = linearize(target, series1, tag);
    const LinearizedVariable z2 = linearize(target, series2, tag);
    out.var1 = clamped_variance(deville_variance_block(z1, s1));
    out.var2 = clamped_variance(deville_variance_block(z2, s2));
    return out;
}

PooledEstimate pool_with_weights(const SampleDraw& s1, const SampleDraw& s2,
                                 const PoolingWeights& weights,
                                 IndicatorKind target, WeightMode weight_mode,
                                 CombineMode combine_mode) {
    PooledEstimate out;
    out.indicator = target;
    out.weight_mode = weight_mode;
    out.combine_mode = combine_mode;
    out.gamma = weight_mode == WeightMode::sampling
                    ? std::numeric_limits<double>::quiet_NaN()
                    : weights.gamma;
    out.negative_weights1 = weights.negative_weights1;
    out.negative_weights2 = weights.negative_weights2;

    const PooledPair pair = evaluate_pair(s1, s2, weights, target, weight_mode);
    out.theta1 = pair.theta1;
    out.theta2 = pair.theta2;
    out.var1 = pair.var1;
    out.var2 = pair.var2;

    const CombineResult comb =
        combine(out.theta1, out.var1, out.theta2, out.var2, combine_mode);
    out.delta = comb.delta;
    out.combined = comb.combined;
    out.combined_var = comb.combined_var;
    out.delta_fallback = comb.degenerate_fallback;
    return out;
}

PooledEstimate pool(const SampleDraw& s1, const CalibrationSpec& spec1,
                    const SampleDraw& s2, const CalibrationSpec& spec2,
                    IndicatorKind target, WeightMode weight_mode,
                    CombineMode combine_mode) {
    PoolingWeights weights;
    switch (weight_mode) {
        case WeightMode::sampling:
            weights.a1 = s1.weight;
            weights.a2 = s2.weight;
            weights.gamma = std::numeric_limits<double>::quiet_NaN();
            break;
        case WeightMode::own_alignment:
            weights = alignment_weights_for(target, s1, spec1, s2, spec2);
            break;
        case WeightMode::median_alignment:
            weights = alignment_weights_for(IndicatorKind::median, s1, spec1, s2, spec2);
            break;
    }
    return pool_with_weights(s1, s2, weights, target, weight_mode, combine_mode);
}

} // namespace svypool
