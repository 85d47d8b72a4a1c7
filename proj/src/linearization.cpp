#include "svypool/linearization.hpp"

#include <cmath>

#include "svypool/errors.hpp"

namespace svypool {

std::string to_string(WeightTag tag) {
    switch (tag) {
        case WeightTag::design: return "design";
        case WeightTag::calibrated: return "calibrated";
        case WeightTag::aligned: return "aligned";
    }
    return "unknown";
}

namespace {

double density_or_throw(const WeightedSeries& series, double x, const char* where) {
    const double f = kde_density(series, x);
    if (!(f > 0.0))
        throw numeric_error(std::string("degenerate density at ") + where);
    return f;
}

// z_k = -(1/f(Q_a)) (1/N) [1(y_k <= Q_a) - a], the quantile influence bracket
// shared by the median and the ARPT.
std::vector<double> quantile_linearized(const WeightedSeries& series, double a,
                                        const char* where) {
    const double q = weighted_quantile(series, a);
    const double f = density_or_throw(series, q, where);
    const double nhat = series.weight_total();
    auto y = series.values();
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        z[i] = -(1.0 / f) * (1.0 / nhat) * ((y[i] <= q ? 1.0 : 0.0) - a);
    return z;
}

} // namespace

LinearizedVariable lin_median(const WeightedSeries& series, WeightTag tag) {
    return {quantile_linearized(series, 0.5, "median"), IndicatorKind::median, tag};
}

LinearizedVariable lin_qsr(const WeightedSeries& series, WeightTag tag) {
    const double q20 = weighted_quantile(series, 0.2);
    const double q80 = weighted_quantile(series, 0.8);
    const double total = series.income_total();
    auto y = series.values();
    auto w = series.weights();
    double y20 = 0.0, y80 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double wy = w[i] * y[i];
        if (y[i] <= q20) y20 += wy;
        if (y[i] <= q80) y80 += wy;
    }
    if (!(y20 > 0.0))
        throw numeric_error("qsr linearization: nonpositive bottom-quintile total");
    const double top = total - y80;
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool below80 = y[i] <= q80;
        const bool below20 = y[i] <= q20;
        const double t1 =
            (y[i] - 0.8 * q80 + (below80 ? (q80 - y[i]) : 0.0)) / y20;
        const double t2 =
            top * (0.2 * q20 - (below20 ? (q20 - y[i]) : 0.0)) / (y20 * y20);
        z[i] = t1 - t2;
    }
    return {std::move(z), IndicatorKind::qsr, tag};
}

LinearizedVariable lin_gini(const WeightedSeries& series, WeightTag tag) {
    const double nhat = series.weight_total();
    const double total = series.income_total();
    if (!(total > 0.0))
        throw numeric_error("gini linearization: nonpositive income total");
    const double g = gini(series).value / 100.0;
    const std::size_t n = series.size();

    // Tie-grouped cumulative weight and income: N_k and Y_k cover every unit
    // with y <= y_k, so equal incomes share the same cumulants.
    std::vector<double> cum_n(n), cum_y(n);
    {
        double cw = 0.0, cy = 0.0;
        std::size_t rank = 0;
        while (rank < n) {
            std::size_t end = rank;
            const double value = series.value_at_rank(rank);
            while (end < n && series.value_at_rank(end) == value) {
                cw += series.weight_at_rank(end);
                cy += series.weight_at_rank(end) * value;
                ++end;
            }
            for (std::size_t r = rank; r < end; ++r) {
                const std::size_t i = series.order()[r];
                cum_n[i] = cw;
                cum_y[i] = cy;
            }
            rank = end;
        }
    }

    // Exact derivative of the pairwise form: the mean inside the first term
    // is the cumulative partial mean Y_k / N_k, not the overall mean.
    auto y = series.values();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double bracket = 2.0 * cum_n[i] * y[i] - 2.0 * cum_y[i] + total -
                               nhat * y[i] - g * (total + y[i] * nhat);
        z[i] = 100.0 * bracket / (nhat * total);
    }
    return {std::move(z), IndicatorKind::gini, tag};
}

LinearizedVariable lin_arpt(const WeightedSeries& series, WeightTag tag) {
    LinearizedVariable base = lin_median(series, tag);
    for (double& v : base.z) v *= 0.6;
    base.indicator = IndicatorKind::arpt;
    return base;
}

namespace {

struct ArprParts {
    std::vector<double> z;
    double arpr_proportion;
    double threshold;
};

ArprParts arpr_linearized(const WeightedSeries& series, WeightTag tag) {
    const LinearizedVariable z_arpt = lin_arpt(series, tag);
    const double threshold = arpt(series);
    const double nhat = series.weight_total();
    auto y = series.values();
    auto w = series.weights();
    double below = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] <= threshold) below += w[i];
    const double rate = below / nhat;
    const double f_arpt = density_or_throw(series, threshold, "arpt");
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double indicator = y[i] <= threshold ? 1.0 : 0.0;
        z[i] = (indicator - rate) / nhat + f_arpt * z_arpt.z[i];
    }
    return {std::move(z), rate, threshold};
}

} // namespace

LinearizedVariable lin_arpr(const WeightedSeries& series, WeightTag tag) {
    return {arpr_linearized(series, tag).z, IndicatorKind::arpr, tag};
}

LinearizedVariable lin_poor_median(const WeightedSeries& series, WeightTag tag) {
    ArprParts parts = arpr_linearized(series, tag);
    const double nhat = series.weight_total();
    auto y = series.values();
    auto w = series.weights();

    std::vector<double> py, pw;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < parts.threshold) {
            py.push_back(y[i]);
            pw.push_back(w[i]);
        }
    }
    if (py.empty())
        throw numeric_error("poverty-degenerate: no units below ARPT=" +
                            std::to_string(parts.threshold));
    const WeightedSeries poor(std::move(py), std::move(pw));
    const double mp = weighted_quantile(poor, 0.5);
    const double f_mp = density_or_throw(series, mp, "poor median");

    // Weighted empirical CDF of the full series at the poor median.
    double cdf_mp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] <= mp) cdf_mp += w[i];
    cdf_mp /= nhat;

    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double indicator = y[i] <= mp ? 1.0 : 0.0;
        z[i] = (1.0 / f_mp) * parts.z[i] / 2.0 - (indicator - cdf_mp) / nhat;
    }
    return {std::move(z), IndicatorKind::rmpg, tag};
}

LinearizedVariable lin_rmpg(const WeightedSeries& series, WeightTag tag) {
    const double threshold = arpt(series);
    const LinearizedVariable z_arpt = lin_arpt(series, tag);
    const LinearizedVariable z_mp = lin_poor_median(series, tag);
    const double mp = poor_median(series);
    std::vector<double> z(series.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = 100.0 * (mp * z_arpt.z[i] - threshold * z_mp.z[i]) /
               (threshold * threshold);
    return {std::move(z), IndicatorKind::rmpg, tag};
}

LinearizedVariable linearize(IndicatorKind kind, const WeightedSeries& series,
                             WeightTag tag) {
    switch (kind) {
        case IndicatorKind::median: return lin_median(series, tag);
        case IndicatorKind::qsr: return lin_qsr(series, tag);
        case IndicatorKind::gini: return lin_gini(series, tag);
        case IndicatorKind::rmpg: return lin_rmpg(series, tag);
        case IndicatorKind::arpt: return lin_arpt(series, tag);
        case IndicatorKind::arpr: return lin_arpr(series, tag);
    }
    throw config_error("unknown indicator kind for linearization");
}

} // namespace svypool
