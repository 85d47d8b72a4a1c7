#include "svypool/alignment.hpp"

#include <cmath>

#include "svypool/errors.hpp"

namespace svypool {

namespace {

constexpr double condition_limit = 1e12;

struct Workspace {
    Eigen::VectorXd pidiag; // w_k / q_k
    Eigen::MatrixXd xtpx;   // X' Pi X
    Eigen::LDLT<Eigen::MatrixXd> solver;
};

std::string column_name(const CalibrationSpec& spec, Eigen::Index j) {
    if (j >= 0 && static_cast<std::size_t>(j) < spec.columns.size())
        return spec.columns[static_cast<std::size_t>(j)];
    return "column " + std::to_string(j);
}

Workspace build(const SampleDraw& sample, const CalibrationSpec& spec) {
    const auto n = static_cast<Eigen::Index>(sample.size());
    if (spec.X.rows() != n)
        throw config_error("calibration: X has " + std::to_string(spec.X.rows()) +
                           " rows for a sample of " + std::to_string(sample.size()));
    if (spec.X.cols() < 1) throw config_error("calibration: X needs at least one column");
    if (spec.totals.size() != spec.X.cols())
        throw config_error("calibration: totals length does not match X columns");
    if (!spec.q.empty() && spec.q.size() != sample.size())
        throw config_error("calibration: q length does not match the sample");
    if (!(spec.design_effect > 0.0))
        throw config_error("calibration: design effect must be positive");

    Workspace ws;
    ws.pidiag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q = spec.q.empty() ? 1.0 : spec.q[static_cast<std::size_t>(i)];
        if (!(q > 0.0)) throw config_error("calibration: q entries must be positive");
        ws.pidiag[i] = sample.weight[static_cast<std::size_t>(i)] / q;
    }
    ws.xtpx = spec.X.transpose() * ws.pidiag.asDiagonal() * spec.X;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ws.xtpx, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smallest = sv[sv.size() - 1];
    if (!(smallest > 0.0) || sv[0] / smallest > condition_limit) {
        Eigen::Index worst = 0;
        svd.matrixV().col(sv.size() - 1).cwiseAbs().maxCoeff(&worst);
        throw numeric_error("calibration: X'PiX is numerically singular; offending column: " +
                            column_name(spec, worst));
    }
    ws.solver.compute(ws.xtpx);
    return ws;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

CalibrationSpec default_calibration_spec(const SampleDraw& sample, double population_size,
                                         double population_aux_total, double design_effect) {
    CalibrationSpec spec;
    const auto n = static_cast<Eigen::Index>(sample.size());
    spec.X.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        spec.X(i, 0) = 1.0;
        spec.X(i, 1) = sample.aux[static_cast<std::size_t>(i)];
    }
    spec.totals.resize(2);
    spec.totals << population_size, population_aux_total;
    spec.design_effect = design_effect;
    spec.columns = {"intercept", "aux"};
    return spec;
}

std::vector<double> greg_calibrate(const SampleDraw& sample, const CalibrationSpec& spec) {
    const Workspace ws = build(sample, spec);
    const auto w = as_vector(sample.weight);
    const Eigen::VectorXd gap = spec.totals - spec.X.transpose() * w;
    const Eigen::VectorXd adjustment = spec.X * ws.solver.solve(gap);
    std::vector<double> c(sample.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = sample.weight[i] +
               ws.pidiag[static_cast<Eigen::Index>(i)] * adjustment[static_cast<Eigen::Index>(i)];
    return c;
}

Eigen::VectorXd beta_hat(const SampleDraw& sample, const CalibrationSpec& spec,
                         std::span<const double> y) {
    const Workspace ws = build(sample, spec);
    const Eigen::VectorXd xtpy =
        spec.X.transpose() * (ws.pidiag.array() * as_vector(y).array()).matrix();
    return ws.solver.solve(xtpy);
}

double regression_estimate(const SampleDraw& sample, const CalibrationSpec& spec,
                           std::span<const double> y) {
    const auto w = as_vector(sample.weight);
    const auto yv = as_vector(y);
    const double ht = yv.dot(w);
    const Eigen::VectorXd beta = beta_hat(sample, spec, y);
    return ht + beta.dot(spec.totals - spec.X.transpose() * w);
}

double residual_quadratic(const SampleDraw& sample, const CalibrationSpec& spec,
                          std::span<const double> y) {
    const Workspace ws = build(sample, spec);
    const auto yv = as_vector(y);
    const Eigen::VectorXd piy = (ws.pidiag.array() * yv.array()).matrix();
    const Eigen::VectorXd xtpy = spec.X.transpose() * piy;
    const double full = yv.dot(piy);
    const double explained = xtpy.dot(ws.solver.solve(xtpy));
    return std::max(0.0, full - explained);
}

double phi_share(std::size_t n1, double d1, std::size_t n2, double d2) {
    if (n1 == 0 || n2 == 0) throw config_error("phi: empty sample");
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw config_error("phi: design effects must be positive");
    const double e1 = static_cast<double>(n1) / d1;
    const double e2 = static_cast<double>(n2) / d2;
    return e1 / (e1 + e2);
}

namespace {

struct SampleSide {
    Workspace ws;
    std::vector<double> calibrated;  // c_i
    Eigen::VectorXd xi_z;            // Xi_i z_i = Pi (z - X beta_z)
    Eigen::VectorXd residual;        // z - X beta_z
    double quadratic = 0.0;          // z' Xi z
    double regression = 0.0;         // Z_i^R = z' c_i
};

SampleSide prepare_side(const SampleDraw& sample, const CalibrationSpec& spec,
                        std::span<const double> z) {
    if (z.size() != sample.size())
        throw config_error("alignment: z length does not match the sample");
    SampleSide side{build(sample, spec), {}, {}, {}, 0.0, 0.0};
    const auto w = as_vector(sample.weight);
    const auto zv = as_vector(z);

    const Eigen::VectorXd gap = spec.totals - spec.X.transpose() * w;
    const Eigen::VectorXd adjustment = spec.X * side.ws.solver.solve(gap);
    side.calibrated.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
        side.calibrated[i] = sample.weight[i] + side.ws.pidiag[static_cast<Eigen::Index>(i)] *
                                                    adjustment[static_cast<Eigen::Index>(i)];

    const Eigen::VectorXd piz = (side.ws.pidiag.array() * zv.array()).matrix();
    const Eigen::VectorXd beta_z = side.ws.solver.solve(spec.X.transpose() * piz);
    side.residual = zv - spec.X * beta_z;
    side.xi_z = (side.ws.pidiag.array() * side.residual.array()).matrix();
    side.quadratic = std::max(0.0, zv.dot(side.xi_z));
    side.regression = zv.dot(as_vector(side.calibrated));
    return side;
}

} // namespace

double gamma_hat(const SampleDraw& s1, const CalibrationSpec& spec1, std::span<const double> z1,
                 const SampleDraw& s2, const CalibrationSpec& spec2, std::span<const double> z2) {
    const double q1 = residual_quadratic(s1, spec1, z1);
    const double q2 = residual_quadratic(s2, spec2, z2);
    const double phi = phi_share(s1.size(), spec1.design_effect, s2.size(), spec2.design_effect);
    const double denom = (1.0 - phi) * q1 + phi * q2;
    if (!(denom > 0.0))
        throw numeric_error("alignment degenerate: z is explained by X in both samples");
    return phi * q2 / denom;
}

AlignmentResult align(const SampleDraw& s1, const CalibrationSpec& spec1,
                      std::span<const double> z1,
                      const SampleDraw& s2, const CalibrationSpec& spec2,
                      std::span<const double> z2) {
    const SampleSide side1 = prepare_side(s1, spec1, z1);
    const SampleSide side2 = prepare_side(s2, spec2, z2);

    AlignmentResult out;
    out.phi = phi_share(s1.size(), spec1.design_effect, s2.size(), spec2.design_effect);
    const double denom = (1.0 - out.phi) * side1.quadratic + out.phi * side2.quadratic;
    if (!(denom > 0.0))
        throw numeric_error("alignment degenerate: z is explained by X in both samples");
    const double step = (side2.regression - side1.regression) / denom;
    out.gamma = out.phi * side2.quadratic / denom;
    out.regression_estimate1 = side1.regression;
    out.regression_estimate2 = side2.regression;

    out.a1.resize(s1.size());
    for (std::size_t i = 0; i < s1.size(); ++i)
        out.a1[i] = side1.calibrated[i] +
                    (1.0 - out.phi) * side1.xi_z[static_cast<Eigen::Index>(i)] * step;
    out.a2.resize(s2.size());
    for (std::size_t i = 0; i < s2.size(); ++i)
        out.a2[i] = side2.calibrated[i] -
                    out.phi * side2.xi_z[static_cast<Eigen::Index>(i)] * step;

    for (double a : out.a1)
        if (a < 0.0) ++out.negative_weights1;
    for (double a : out.a2)
        if (a < 0.0) ++out.negative_weights2;

    const double total1 = as_vector(z1).dot(as_vector(out.a1));
    const double total2 = as_vector(z2).dot(as_vector(out.a2));
    out.aligned_total = out.gamma * side1.regression + (1.0 - out.gamma) * side2.regression;
    out.alignment_residual = std::abs(total1 - total2) / std::max(1.0, std::abs(total1));

    double worst = 0.0;
    const Eigen::VectorXd hit1 = spec1.X.transpose() * as_vector(out.a1);
    for (Eigen::Index j = 0; j < hit1.size(); ++j)
        worst = std::max(worst, std::abs(hit1[j] - spec1.totals[j]) /
                                    std::max(1.0, std::abs(spec1.totals[j])));
    const Eigen::VectorXd hit2 = spec2.X.transpose() * as_vector(out.a2);
    for (Eigen::Index j = 0; j < hit2.size(); ++j)
        worst = std::max(worst, std::abs(hit2[j] - spec2.totals[j]) /
                                    std::max(1.0, std::abs(spec2.totals[j])));
    out.max_calibration_residual = worst;
    return out;
}

VarianceEstimate aligned_variance(const SampleDraw& s1, const CalibrationSpec& spec1,
                                  std::span<const double> z1,
                                  const SampleDraw& s2, const CalibrationSpec& spec2,
                                  std::span<const double> z2, double gamma,
                                  IndicatorKind kind) {
    // Pi0 entries (pi_kl - pi_k pi_l) / (pi_k pi_l) collapse to one
    // within-household and one cross-household value per sample; the two
    // samples are independent, so Pi0 is block diagonal across them.
    auto side_value = [](const SampleDraw& s, const CalibrationSpec& spec,
                         std::span<const double> z, double factor, double* gross) {
        const Eigen::VectorXd beta = beta_hat(s, spec, z);
        std::vector<double> psi(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            double fitted = 0.0;
            for (Eigen::Index j = 0; j < spec.X.cols(); ++j)
                fitted += spec.X(static_cast<Eigen::Index>(i), j) * beta[j];
            psi[i] = factor * (z[i] - fitted);
        }
        const double f = s.design.first_order();
        const double coef_within = (f - f * f) / (f * f);
        const double coef_cross =
            s.design.population_households() > 1
                ? (s.design.joint_inclusion(false) - f * f) / (f * f)
                : 0.0;
        return household_block_quadratic(psi, s.household, s.household_count(),
                                         coef_within, coef_cross, gross);
    };
    double gross1 = 0.0, gross2 = 0.0;
    const double v1 = side_value(s1, spec1, z1, gamma, &gross1);
    const double v2 = side_value(s2, spec2, z2, 1.0 - gamma, &gross2);
    return {v1 + v2, VariancePath::block, kind, gross1 + gross2};
}

} // namespace svypool
