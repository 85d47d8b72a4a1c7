#pragma once

#include <string>

#include "svypool/alignment.hpp"

namespace svypool {

enum class WeightMode { sampling, own_alignment, median_alignment };
enum class CombineMode { simple, optimal };

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);
std::string to_string(CombineMode mode);
CombineMode combine_mode_from_string(const std::string& name);

struct CombineResult {
    double delta = 0.5;
    double combined = 0.0;
    double combined_var = 0.0;
    /// Optimal mode fell back to 0.5 because both variances were zero.
    bool degenerate_fallback = false;
};

/// delta = 0.5 (simple) or V2/(V1+V2) (optimal); combined variance
/// delta^2 V1 + (1-delta)^2 V2.
CombineResult combine(double theta1, double var1, double theta2, double var2,
                      CombineMode mode);

struct PooledEstimate {
    IndicatorKind indicator;
    WeightMode weight_mode;
    CombineMode combine_mode;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double var1 = 0.0;
    double var2 = 0.0;
    double delta = 0.5;
    double combined = 0.0;
    double combined_var = 0.0;
    double gamma = 0.0; // NaN under sampling weights
    int negative_weights1 = 0;
    int negative_weights2 = 0;
    bool delta_fallback = false;
};

/// Step 1-2 of the pooling algorithm: linearize align_on under design weights
/// and derive the alignment weights.
struct PoolingWeights {
    std::vector<double> a1;
    std::vector<double> a2;
    double gamma = 0.0;
    int negative_weights1 = 0;
    int negative_weights2 = 0;
};
PoolingWeights alignment_weights_for(IndicatorKind align_on,
                                     const SampleDraw& s1, const CalibrationSpec& spec1,
                                     const SampleDraw& s2, const CalibrationSpec& spec2);

/// Step 3 given the weights: the target indicator per sample, its linearized
/// variable recomputed under those weights, and both variances with the
/// design's inclusion probabilities.
struct PooledPair {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double var1 = 0.0;
    double var2 = 0.0;
};
PooledPair evaluate_pair(const SampleDraw& s1, const SampleDraw& s2,
                         const PoolingWeights& weights, IndicatorKind target,
                         WeightMode weight_mode);

/// Steps 3-4 given the weights.
PooledEstimate pool_with_weights(const SampleDraw& s1, const SampleDraw& s2,
                                 const PoolingWeights& weights,
                                 IndicatorKind target, WeightMode weight_mode,
                                 CombineMode combine_mode);

/// Full pipeline. sampling mode skips alignment (a = w); own_alignment aligns
/// on the target's linearized variable, median_alignment on the median's.
PooledEstimate pool(const SampleDraw& s1, const CalibrationSpec& spec1,
                    const SampleDraw& s2, const CalibrationSpec& spec2,
                    IndicatorKind target, WeightMode weight_mode,
                    CombineMode combine_mode);

} // namespace svypool
