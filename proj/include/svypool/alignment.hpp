#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "svypool/design.hpp"
#include "svypool/variance.hpp"

namespace svypool {

/// Auxiliary design matrix with known population totals for one sample.
/// q holds the per-unit positive constants of the generalized distance
/// (empty means all ones); design_effect is d_i.
struct CalibrationSpec {
    Eigen::MatrixXd X;       // n x p
    Eigen::VectorXd totals;  // p
    std::vector<double> q;   // empty or size n
    double design_effect = 1.0;
    std::vector<std::string> columns; // p names for error messages (optional)
};

/// X = [intercept, aux], totals = [N, population aux total].
CalibrationSpec default_calibration_spec(const SampleDraw& sample,
                                         double population_size,
                                         double population_aux_total,
                                         double design_effect = 1.0);

/// GREG calibration weights c = w + Pi X (X' Pi X)^-1 (t - X' w); the
/// calibrated totals X'c reproduce t to 1e-8 relative.
std::vector<double> greg_calibrate(const SampleDraw& sample, const CalibrationSpec& spec);

/// Generalized-regression coefficient beta = (X' Pi X)^-1 X' Pi y.
Eigen::VectorXd beta_hat(const SampleDraw& sample, const CalibrationSpec& spec,
                         std::span<const double> y);

/// Regression estimator Y^R = Y-hat + beta' (t - X'w); equals y'c.
double regression_estimate(const SampleDraw& sample, const CalibrationSpec& spec,
                           std::span<const double> y);

/// y' Xi y = y'Pi y - (X'Pi y)'(X'Pi X)^-1 (X'Pi y), the Pi-weighted residual
/// sum of squares of y on X. Never materializes the n x n Xi matrix.
double residual_quadratic(const SampleDraw& sample, const CalibrationSpec& spec,
                          std::span<const double> y);

/// phi = (n1/d1) / ((n1/d1) + (n2/d2)), the effective-size share of sample 1.
double phi_share(std::size_t n1, double d1, std::size_t n2, double d2);

/// gamma = phi q2 / ((1-phi) q1 + phi q2) with q_i the residual quadratics of
/// the common variable; the convex weight the alignment puts on sample 1's
/// regression estimate.
double gamma_hat(const SampleDraw& s1, const CalibrationSpec& spec1, std::span<const double> z1,
                 const SampleDraw& s2, const CalibrationSpec& spec2, std::span<const double> z2);

struct AlignmentResult {
    std::vector<double> a1; // alignment weights, sample 1
    std::vector<double> a2;
    double gamma = 0.0;
    double phi = 0.0;
    /// Common value z1'a1 = z2'a2 = gamma Z1^R + (1-gamma) Z2^R.
    double aligned_total = 0.0;
    double regression_estimate1 = 0.0;
    double regression_estimate2 = 0.0;
    /// max_i relative |X_i'a_i - t_i| over both samples' constraints.
    double max_calibration_residual = 0.0;
    /// Relative |z1'a1 - z2'a2|.
    double alignment_residual = 0.0;
    int negative_weights1 = 0;
    int negative_weights2 = 0;
};

/// One-step alignment of two samples on the common variable z: both samples
/// stay calibrated on their auxiliary totals and produce the identical
/// weighted total of z. Closed form; no n x n matrix is formed.
AlignmentResult align(const SampleDraw& s1, const CalibrationSpec& spec1,
                      std::span<const double> z1,
                      const SampleDraw& s2, const CalibrationSpec& spec2,
                      std::span<const double> z2);

/// Large-sample variance of the aligned estimator: Psi' Pi0 Psi with Psi the
/// gamma-weighted calibration residuals and Pi0 block-diagonal across the two
/// independent samples, each block evaluated by the O(n) household quadratic.
VarianceEstimate aligned_variance(const SampleDraw& s1, const CalibrationSpec& spec1,
                                  std::span<const double> z1,
                                  const SampleDraw& s2, const CalibrationSpec& spec2,
                                  std::span<const double> z2, double gamma,
                                  IndicatorKind kind = IndicatorKind::median);

} // namespace svypool
