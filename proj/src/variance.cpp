#include "svypool/variance.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "svypool/errors.hpp"

namespace svypool {

double household_block_quadratic(std::span<const double> v,
                                 std::span<const std::size_t> household,
                                 std::size_t households,
                                 double coef_within, double coef_cross,
                                 double* gross_scale) {
    std::vector<double> subtotal(households, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        subtotal[household[i]] += v[i];
        grand += v[i];
    }
    double within = 0.0;
    for (double t : subtotal) within += t * t;
    const double cross = grand * grand - within;
    if (gross_scale)
        *gross_scale = std::abs(coef_within) * within + std::abs(coef_cross) * std::abs(cross);
    return coef_within * within + coef_cross * cross;
}

VarianceEstimate deville_variance_naive(const LinearizedVariable& z,
                                        const SampleDraw& sample) {
    if (z.z.size() != sample.size())
        throw std::invalid_argument(
            "variance: linearized variable length does not match the sample");
    const std::size_t n = sample.size();
    double value = 0.0, gross = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double term = delta_tilde(sample, k, l) * z.z[k] * z.z[l] /
                                (sample.pi[k] * sample.pi[l]);
            value += term;
            gross += std::abs(term);
        }
    }
    return {value, VariancePath::naive, z.indicator, gross};
}

VarianceEstimate deville_variance_block(const LinearizedVariable& z,
                                        const SampleDraw& sample) {
    if (z.z.size() != sample.size())
        throw std::invalid_argument(
            "variance: linearized variable length does not match the sample");
    const auto& design = sample.design;
    if (design.sample_households() < 2 &&
        design.sample_households() < design.population_households())
        throw numeric_error("variance: n_h=1 leaves cross-household delta-tilde undefined");

    std::vector<double> expanded(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
        expanded[i] = z.z[i] / sample.pi[i];

    double gross = 0.0;
    const double value = household_block_quadratic(
        expanded, sample.household, sample.household_count(),
        design.delta_tilde(true),
        design.sample_households() < design.population_households()
            ? design.delta_tilde(false)
            : 0.0, // census: every coefficient is zero
        &gross);
    return {value, VariancePath::block, z.indicator, gross};
}

double clamped_variance(const VarianceEstimate& v, bool* clamped) {
    if (clamped) *clamped = false;
    if (v.value >= 0.0) return v.value;
    const double tolerance = 1e-9 * std::max(1.0, v.gross_scale);
    if (v.value < -tolerance)
        throw numeric_error("variance estimate is negative beyond round-off: " +
                            std::to_string(v.value));
    if (clamped) *clamped = true;
    return 0.0;
}

double standard_error(const VarianceEstimate& v, bool* clamped) {
    return std::sqrt(clamped_variance(v, clamped));
}

} // namespace svypool
