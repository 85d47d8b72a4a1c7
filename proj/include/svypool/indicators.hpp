#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace svypool {

enum class IndicatorKind { median, qsr, gini, rmpg, arpt, arpr };

std::string to_string(IndicatorKind kind);
IndicatorKind indicator_from_string(const std::string& name);

/// Income values paired with estimation weights, plus the ascending-income
/// ordering used by every quantile-type computation.
///
/// Weights are usually design or calibration weights; alignment weights may
/// contain isolated negative entries, so only finiteness and a positive
/// weight total are enforced here.
class WeightedSeries {
public:
    WeightedSeries(std::vector<double> values, std::vector<double> weights);

    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::span<const double> weights() const { return weights_; }
    /// Permutation such that values()[order()[0..n)] is ascending.
    std::span<const std::size_t> order() const { return order_; }

    double value_at_rank(std::size_t rank) const { return values_[order_[rank]]; }
    double weight_at_rank(std::size_t rank) const { return weights_[order_[rank]]; }

    /// N-hat = sum of weights.
    double weight_total() const { return weight_total_; }
    /// Y-hat = weighted income total.
    double income_total() const { return income_total_; }

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<std::size_t> order_;
    double weight_total_ = 0.0;
    double income_total_ = 0.0;
};

struct IndicatorResult {
    IndicatorKind kind;
    /// Gini, RMPG and ARPR are on the percent scale; median, QSR and ARPT in
    /// natural units.
    double value = 0.0;
    double nhat = 0.0;
    double total = 0.0;
    std::map<std::string, double> extras;
    std::vector<std::string> warnings;
};

double ht_total(const WeightedSeries& series);
double ht_size(const WeightedSeries& series);

/// Weighted a-quantile: midpoint of adjacent order statistics when a
/// cumulative weight hits a*N-hat exactly, otherwise the next order statistic.
double weighted_quantile(const WeightedSeries& series, double a);

/// Weighted standard deviation with denominator N-hat.
double weighted_sd(const WeightedSeries& series);

/// Plug-in bandwidth h = sd * N-hat^(-0.2).
double kde_bandwidth(const WeightedSeries& series);

/// Gaussian-kernel density estimate at x with the plug-in bandwidth.
double kde_density(const WeightedSeries& series, double x);
/// Same with an explicit bandwidth.
double kde_density(const WeightedSeries& series, double x, double bandwidth);

IndicatorResult median(const WeightedSeries& series);
IndicatorResult qsr(const WeightedSeries& series);
IndicatorResult gini(const WeightedSeries& series);

/// At-risk-of-poverty threshold, 0.6 * median.
double arpt(const WeightedSeries& series);
IndicatorResult arpr(const WeightedSeries& series);
/// Weighted median of the units strictly below the ARPT.
double poor_median(const WeightedSeries& series);
IndicatorResult rmpg(const WeightedSeries& series);

IndicatorResult compute_indicator(IndicatorKind kind, const WeightedSeries& series);

/// Point value only, skipping density extras; usable on frames where the
/// kernel bandwidth would degenerate (for population truth values).
double indicator_value(IndicatorKind kind, const WeightedSeries& series);

} // namespace svypool
