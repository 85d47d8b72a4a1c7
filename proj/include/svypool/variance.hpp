#pragma once

#include <span>

#include "svypool/design.hpp"
#include "svypool/linearization.hpp"

namespace svypool {

enum class VariancePath { naive, block };

/// Design-based variance of the weighted total of a linearized variable.
/// value may come out marginally negative from cancellation; standard_error
/// applies the clamp rule. Block and naive paths agree to 1e-8 relative.
struct VarianceEstimate {
    double value = 0.0;
    VariancePath path = VariancePath::block;
    IndicatorKind indicator = IndicatorKind::median;
    /// Magnitude of the accumulated terms, the scale reference for the
    /// negative-value clamp.
    double gross_scale = 0.0;
};

/// Literal double sum over unit pairs with delta-tilde coefficients.
/// O(n^2); kept as the permanent reference path for the block evaluation.
VarianceEstimate deville_variance_naive(const LinearizedVariable& z,
                                        const SampleDraw& sample);

/// Household-block evaluation in O(n): the pair coefficients take one value
/// within a household and one across households, so the double sum collapses
/// to household subtotals of z/pi.
VarianceEstimate deville_variance_block(const LinearizedVariable& z,
                                        const SampleDraw& sample);

/// sqrt of the estimate; negatives within -1e-9 of the gross term scale clamp
/// to zero, anything more negative raises a numerical-inconsistency error.
/// clamped (when non-null) reports whether the clamp fired.
double standard_error(const VarianceEstimate& v, bool* clamped = nullptr);

/// Variance value with the same clamp rule applied.
double clamped_variance(const VarianceEstimate& v, bool* clamped = nullptr);

/// c_within * sum_j T_j^2 + c_cross * (S^2 - sum_j T_j^2) with T_j the
/// household subtotals of v and S the grand total. Shared by the Eq.-2 block
/// path and the aligned-estimator variance, which use different coefficients.
double household_block_quadratic(std::span<const double> v,
                                 std::span<const std::size_t> household,
                                 std::size_t households,
                                 double coef_within, double coef_cross,
                                 double* gross_scale = nullptr);

} // namespace svypool
