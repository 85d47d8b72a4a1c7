#include "svypool/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svypool/errors.hpp"

namespace svypool {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014326779;

// Equality tolerance for the exact-boundary quantile branch; absorbs pure
// round-off in cumulative sums without capturing genuinely distinct weights.
double boundary_tol(double target) {
    return 1e-9 * std::max(1.0, std::abs(target));
}

} // namespace

std::string to_string(IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::median: return "median";
        case IndicatorKind::qsr: return "qsr";
        case IndicatorKind::gini: return "gini";
        case IndicatorKind::rmpg: return "rmpg";
        case IndicatorKind::arpt: return "arpt";
        case IndicatorKind::arpr: return "arpr";
    }
    return "unknown";
}

IndicatorKind indicator_from_string(const std::string& name) {
    if (name == "median") return IndicatorKind::median;
    if (name == "qsr") return IndicatorKind::qsr;
    if (name == "gini") return IndicatorKind::gini;
    if (name == "rmpg") return IndicatorKind::rmpg;
    if (name == "arpt") return IndicatorKind::arpt;
    if (name == "arpr") return IndicatorKind::arpr;
    throw config_error("unknown indicator: " + name);
}

WeightedSeries::WeightedSeries(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.empty()) throw config_error("weighted series: empty input");
    if (values_.size() != weights_.size())
        throw config_error("weighted series: value/weight length mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]) || !std::isfinite(weights_[i]))
            throw data_error("weighted series: non-finite entry at position " +
                             std::to_string(i));
    }
    order_.resize(values_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return values_[a] < values_[b];
    });
    for (std::size_t i = 0; i < values_.size(); ++i) {
        weight_total_ += weights_[i];
        income_total_ += weights_[i] * values_[i];
    }
    if (!(weight_total_ > 0.0))
        throw numeric_error("weighted series: nonpositive weight total");
}

double ht_total(const WeightedSeries& series) { return series.income_total(); }
double ht_size(const WeightedSeries& series) { return series.weight_total(); }

double weighted_quantile(const WeightedSeries& series, double a) {
    if (!(a > 0.0 && a < 1.0))
        throw config_error("quantile order must lie in (0,1)");
    const std::size_t n = series.size();
    const double target = a * series.weight_total();
    const double tol = boundary_tol(target);
    double cum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        cum += series.weight_at_rank(r);
        if (cum >= target - tol) {
            if (std::abs(cum - target) <= tol && r + 1 < n)
                return 0.5 * (series.value_at_rank(r) + series.value_at_rank(r + 1));
            return series.value_at_rank(r);
        }
    }
    return series.value_at_rank(n - 1);
}

double weighted_sd(const WeightedSeries& series) {
    const double nhat = series.weight_total();
    const double mean = series.income_total() / nhat;
    double ss = 0.0;
    auto y = series.values();
    auto w = series.weights();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - mean;
        ss += w[i] * d * d;
    }
    const double var = ss / nhat;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

double kde_bandwidth(const WeightedSeries& series) {
    const double sd = weighted_sd(series);
    if (!(sd > 0.0))
        throw numeric_error("kernel density: degenerate distribution (zero weighted sd)");
    return sd * std::pow(series.weight_total(), -0.2);
}

double kde_density(const WeightedSeries& series, double x, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw numeric_error("kernel density: bandwidth must be positive");
    const double nhat = series.weight_total();
    auto y = series.values();
    auto w = series.weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double u = (x - y[i]) / bandwidth;
        acc += w[i] * inv_sqrt_2pi * std::exp(-0.5 * u * u);
    }
    return acc / (bandwidth * nhat);
}

double kde_density(const WeightedSeries& series, double x) {
    return kde_density(series, x, kde_bandwidth(series));
}

IndicatorResult median(const WeightedSeries& series) {
    IndicatorResult r;
    r.kind = IndicatorKind::median;
    r.nhat = series.weight_total();
    r.total = series.income_total();
    r.value = weighted_quantile(series, 0.5);
    r.extras["density_at_median"] = kde_density(series, r.value);
    return r;
}

namespace {

struct QsrParts {
    double q20, q80, y20, y80;
};

QsrParts qsr_parts(const WeightedSeries& series) {
    QsrParts p{};
    p.q20 = weighted_quantile(series, 0.2);
    p.q80 = weighted_quantile(series, 0.8);
    auto y = series.values();
    auto w = series.weights();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double wy = w[i] * y[i];
        if (y[i] <= p.q20) p.y20 += wy;
        if (y[i] <= p.q80) p.y80 += wy;
    }
    return p;
}

bool all_values_equal(const WeightedSeries& series) {
    return series.value_at_rank(0) == series.value_at_rank(series.size() - 1);
}

} // namespace

IndicatorResult qsr(const WeightedSeries& series) {
    IndicatorResult r;
    r.kind = IndicatorKind::qsr;
    r.nhat = series.weight_total();
    r.total = series.income_total();
    const QsrParts p = qsr_parts(series);
    if (!(p.y20 > 0.0))
        throw numeric_error("qsr: nonpositive bottom-quintile income total");
    r.value = (r.total - p.y80) / p.y20;
    r.extras["q20"] = p.q20;
    r.extras["q80"] = p.q80;
    r.extras["y20"] = p.y20;
    r.extras["y80"] = p.y80;
    if (all_values_equal(series))
        r.warnings.push_back("tie-degenerate: all incomes equal, plug-in QSR is 0");
    return r;
}

IndicatorResult gini(const WeightedSeries& series) {
    IndicatorResult r;
    r.kind = IndicatorKind::gini;
    r.nhat = series.weight_total();
    r.total = series.income_total();
    if (!(r.total > 0.0))
        throw numeric_error("gini: nonpositive income total");
    // Pairwise form via one sorted pass:
    // sum_kl w_k w_l |y_k - y_l| = 2 sum_k w_k (y_k W_k^- - S_k^-)
    // with W^-, S^- the weight and income sums strictly before rank k.
    double cum_w = 0.0, cum_wy = 0.0, pair_sum = 0.0;
    for (std::size_t rank = 0; rank < series.size(); ++rank) {
        const double y = series.value_at_rank(rank);
        const double w = series.weight_at_rank(rank);
        pair_sum += w * (y * cum_w - cum_wy);
        cum_w += w;
        cum_wy += w * y;
    }
    r.value = 100.0 * pair_sum / (r.nhat * r.total);
    return r;
}

double arpt(const WeightedSeries& series) {
    return 0.6 * weighted_quantile(series, 0.5);
}

IndicatorResult arpr(const WeightedSeries& series) {
    IndicatorResult r;
    r.kind = IndicatorKind::arpr;
    r.nhat = series.weight_total();
    r.total = series.income_total();
    const double threshold = arpt(series);
    auto y = series.values();
    auto w = series.weights();
    double below = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] <= threshold) below += w[i];
    r.value = 100.0 * below / r.nhat;
    r.extras["arpt"] = threshold;
    return r;
}

namespace {

WeightedSeries poor_subseries(const WeightedSeries& series, double threshold) {
    std::vector<double> y, w;
    auto yy = series.values();
    auto ww = series.weights();
    for (std::size_t i = 0; i < yy.size(); ++i) {
        if (yy[i] < threshold) { // strictly below the threshold
            y.push_back(yy[i]);
            w.push_back(ww[i]);
        }
    }
    if (y.empty())
        throw numeric_error("poverty-degenerate: no units below ARPT=" +
                            std::to_string(threshold));
    return WeightedSeries(std::move(y), std::move(w));
}

} // namespace

double poor_median(const WeightedSeries& series) {
    const double threshold = arpt(series);
    return weighted_quantile(poor_subseries(series, threshold), 0.5);
}

IndicatorResult rmpg(const WeightedSeries& series) {
    IndicatorResult r;
    r.kind = IndicatorKind::rmpg;
    r.nhat = series.weight_total();
    r.total = series.income_total();
    const double threshold = arpt(series);
    const double mp = weighted_quantile(poor_subseries(series, threshold), 0.5);
    r.value = 100.0 * (threshold - mp) / threshold;
    r.extras["arpt"] = threshold;
    r.extras["poor_median"] = mp;
    return r;
}

IndicatorResult compute_indicator(IndicatorKind kind, const WeightedSeries& series) {
    switch (kind) {
        case IndicatorKind::median: return median(series);
        case IndicatorKind::qsr: return qsr(series);
        case IndicatorKind::gini: return gini(series);
        case IndicatorKind::rmpg: return rmpg(series);
        case IndicatorKind::arpr: return arpr(series);
        case IndicatorKind::arpt: {
            IndicatorResult r;
            r.kind = IndicatorKind::arpt;
            r.nhat = series.weight_total();
            r.total = series.income_total();
            r.value = arpt(series);
            return r;
        }
    }
    throw config_error("unknown indicator kind");
}

double indicator_value(IndicatorKind kind, const WeightedSeries& series) {
    switch (kind) {
        case IndicatorKind::median: return weighted_quantile(series, 0.5);
        case IndicatorKind::qsr: return qsr(series).value;
        case IndicatorKind::gini: return gini(series).value;
        case IndicatorKind::rmpg: return rmpg(series).value;
        case IndicatorKind::arpt: return arpt(series);
        case IndicatorKind::arpr: return arpr(series).value;
    }
    throw config_error("unknown indicator kind");
}

} // namespace svypool
