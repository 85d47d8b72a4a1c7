// Test-only oracles: independent reference computations the fast paths are
// checked against. Everything here favors directness over speed.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "svypool/alignment.hpp"
#include "svypool/design.hpp"
#include "svypool/indicators.hpp"
#include "svypool/population.hpp"

namespace svypool::oracle {

// O(n^2) pairwise Gini, the normative definition (0-1 scale).
inline double pairwise_gini(const std::vector<double>& y, const std::vector<double>& w) {
    double num = 0.0, nhat = 0.0, total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        nhat += w[k];
        total += w[k] * y[k];
        for (std::size_t l = 0; l < y.size(); ++l)
            num += w[k] * w[l] * std::abs(y[k] - y[l]);
    }
    return num / (2.0 * nhat * total);
}

// Finite-population formula for unit weights (0-1 scale): ranks over sorted y.
inline double population_gini_formula(std::vector<double> y) {
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(y.size());
    double rank_sum = 0.0, total = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        rank_sum += static_cast<double>(k + 1) * y[k];
        total += y[k];
    }
    return 2.0 * rank_sum / (n * total) - (n + 1.0) / n;
}

// Visit every size-k subset of {0..n-1} in lexicographic order.
inline void for_each_combination(std::size_t n, std::size_t k,
                                 const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (idx[i] != i + n - k) {
                ++idx[i];
                for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                break;
            }
            if (i == 0) return;
        }
        if (k == 0) return;
    }
}

// A SampleDraw for an explicit household subset (ascending indices).
inline SampleDraw make_draw(const PopulationFrame& frame, const TwoStageDesign& design,
                            std::vector<std::size_t> selected) {
    SampleDraw draw{design, {}, {}, {}, {}, {}, {}, {}};
    const double pi = design.first_order();
    for (std::size_t local = 0; local < selected.size(); ++local) {
        const auto [begin, end] = frame.household_span(selected[local]);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& person = frame.persons()[i];
            draw.income.push_back(person.eq_income);
            draw.aux.push_back(person.aux);
            draw.weight.push_back(1.0 / pi);
            draw.pi.push_back(pi);
            draw.household.push_back(local);
            draw.person_index.push_back(i);
        }
    }
    draw.selected_households = std::move(selected);
    return draw;
}

// A frame whose incomes carry an arbitrary per-unit variable (aux = 0).
inline PopulationFrame frame_from_values(const std::vector<std::size_t>& household_sizes,
                                         const std::vector<double>& values) {
    std::vector<PersonRecord> records;
    std::size_t unit = 0;
    for (std::size_t j = 0; j < household_sizes.size(); ++j) {
        for (std::size_t m = 0; m < household_sizes[j]; ++m) {
            records.push_back({"p" + std::to_string(unit + 1), "h" + std::to_string(j + 1),
                               values[unit], 0.0});
            ++unit;
        }
    }
    return PopulationFrame::from_records(std::move(records));
}

// Exact design variance of the HT total of z: enumerate all C(H, n_h) samples.
inline double exact_ht_variance(const std::vector<std::size_t>& household_sizes,
                                const std::vector<double>& z, std::size_t n_h) {
    const PopulationFrame frame = frame_from_values(household_sizes, z);
    const TwoStageDesign design(household_sizes, n_h);
    std::vector<double> totals;
    for_each_combination(household_sizes.size(), n_h,
                         [&](const std::vector<std::size_t>& subset) {
                             const SampleDraw draw = make_draw(frame, design, subset);
                             double ht = 0.0;
                             for (std::size_t i = 0; i < draw.size(); ++i)
                                 ht += draw.income[i] * draw.weight[i];
                             totals.push_back(ht);
                         });
    double mean = 0.0;
    for (double t : totals) mean += t;
    mean /= static_cast<double>(totals.size());
    double var = 0.0;
    for (double t : totals) var += (t - mean) * (t - mean);
    return var / static_cast<double>(totals.size());
}

// Equality-constrained least-distance minimizer via the dense KKT system:
// min (a-w)' inv(Pi) (a-w)  s.t.  N'a = t.
inline Eigen::VectorXd constrained_least_distance(const Eigen::VectorXd& w,
                                                  const Eigen::VectorXd& pi_diag,
                                                  const Eigen::MatrixXd& constraints,
                                                  const Eigen::VectorXd& targets) {
    const Eigen::Index n = w.size();
    const Eigen::Index m = constraints.cols();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    for (Eigen::Index i = 0; i < n; ++i) kkt(i, i) = 1.0 / pi_diag[i];
    kkt.block(0, n, n, m) = constraints;
    kkt.block(n, 0, m, n) = constraints.transpose();
    Eigen::VectorXd rhs(n + m);
    for (Eigen::Index i = 0; i < n; ++i) rhs[i] = w[i] / pi_diag[i];
    rhs.tail(m) = targets;
    const Eigen::VectorXd solution = Eigen::FullPivLU<Eigen::MatrixXd>(kkt).solve(rhs);
    return solution.head(n);
}

// Dense n x n Xi = Pi - Pi X (X'PiX)^-1 X'Pi, then y'Xi y.
inline double dense_residual_quadratic(const Eigen::VectorXd& pi_diag,
                                       const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y) {
    const Eigen::MatrixXd pi = pi_diag.asDiagonal();
    const Eigen::MatrixXd inner = X.transpose() * pi * X;
    const Eigen::MatrixXd xi = pi - pi * X * inner.inverse() * X.transpose() * pi;
    return y.dot(xi * y);
}

// Dense Pi0 quadratic form for one sample: entries (pi_kl - pi_k pi_l) /
// (pi_k pi_l) from the draw's design.
inline double dense_pi0_quadratic(const SampleDraw& draw, const std::vector<double>& psi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < draw.size(); ++k) {
        for (std::size_t l = 0; l < draw.size(); ++l) {
            const double pkl = joint_inclusion(draw, k, l);
            const double coef =
                (pkl - draw.pi[k] * draw.pi[l]) / (draw.pi[k] * draw.pi[l]);
            acc += coef * psi[k] * psi[l];
        }
    }
    return acc;
}

} // namespace svypool::oracle
