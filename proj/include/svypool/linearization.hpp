#pragma once

#include <string>
#include <vector>

#include "svypool/indicators.hpp"

namespace svypool {

enum class WeightTag { design, calibrated, aligned };

std::string to_string(WeightTag tag);

/// Plug-in estimate of the linearized variable of an indicator, one entry per
/// sampled unit in the series' storage order. The weighted total of z
/// approximates the indicator's sampling error, which is what both the
/// variance estimator and the alignment constraints consume.
struct LinearizedVariable {
    std::vector<double> z;
    IndicatorKind indicator;
    WeightTag weights_used = WeightTag::design;
};

LinearizedVariable lin_median(const WeightedSeries& series,
                              WeightTag tag = WeightTag::design);
LinearizedVariable lin_qsr(const WeightedSeries& series,
                           WeightTag tag = WeightTag::design);
/// Percent scale, matching the Gini point estimate.
LinearizedVariable lin_gini(const WeightedSeries& series,
                            WeightTag tag = WeightTag::design);
LinearizedVariable lin_arpt(const WeightedSeries& series,
                            WeightTag tag = WeightTag::design);
/// Proportion scale, as displayed (the ARPR point estimate reports percent).
LinearizedVariable lin_arpr(const WeightedSeries& series,
                            WeightTag tag = WeightTag::design);
LinearizedVariable lin_poor_median(const WeightedSeries& series,
                                   WeightTag tag = WeightTag::design);
/// Percent scale, matching the RMPG point estimate.
LinearizedVariable lin_rmpg(const WeightedSeries& series,
                            WeightTag tag = WeightTag::design);

LinearizedVariable linearize(IndicatorKind kind, const WeightedSeries& series,
                             WeightTag tag = WeightTag::design);

} // namespace svypool
