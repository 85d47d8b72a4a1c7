#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "svypool/population.hpp"

namespace svypool {

/// Two-stage design: simple random sample of n_h households out of H, all
/// persons of a selected household included.
class TwoStageDesign {
public:
    TwoStageDesign(std::vector<std::size_t> household_sizes, std::size_t sample_households);

    std::size_t population_households() const { return sizes_.size(); }
    std::size_t sample_households() const { return sample_households_; }
    std::size_t population_size() const { return offsets_.back(); }
    const std::vector<std::size_t>& household_sizes() const { return sizes_; }

    /// pi_k = n_h / H, identical for every unit.
    double first_order() const;
    /// pi_kl for a unit pair, by household relation (k = l counts as same).
    double joint_inclusion(bool same_household) const;
    /// Population-unit-index overload.
    double joint_inclusion(std::size_t unit_k, std::size_t unit_l) const;

    /// Delta-tilde = (pi_kl - pi_k pi_l) / pi_kl.
    double delta_tilde(bool same_household) const;
    double delta_tilde(std::size_t unit_k, std::size_t unit_l) const;

    std::size_t household_of_unit(std::size_t unit) const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_; // size H+1
    std::size_t sample_households_;
};

/// A realized draw: selected persons in household-major order with their
/// design weights and inclusion probabilities.
struct SampleDraw {
    TwoStageDesign design;
    std::vector<double> income;
    std::vector<double> aux;
    std::vector<double> weight;           // H / n_h each
    std::vector<double> pi;               // n_h / H each
    std::vector<std::size_t> household;   // local household index per unit
    std::vector<std::size_t> person_index; // position in the source frame
    std::vector<std::size_t> selected_households; // frame household indices, ascending

    std::size_t size() const { return income.size(); }
    std::size_t household_count() const { return selected_households.size(); }

    WeightedSeries design_series() const { return WeightedSeries(income, weight); }
    WeightedSeries series_with(std::vector<double> weights) const {
        return WeightedSeries(income, std::move(weights));
    }
};

double joint_inclusion(const SampleDraw& draw, std::size_t k, std::size_t l);
double delta_tilde(const SampleDraw& draw, std::size_t k, std::size_t l);

/// Uniform SRS of households; deterministic in (seed, replicate).
SampleDraw draw_sample(const PopulationFrame& frame, const TwoStageDesign& design,
                       std::uint64_t seed, std::uint64_t replicate);

/// One uniform household permutation split into two disjoint draws; each draw
/// is marginally an SRS of its own size and carries its own marginal design.
std::pair<SampleDraw, SampleDraw> draw_two_disjoint_samples(
    const PopulationFrame& frame, const TwoStageDesign& design1,
    const TwoStageDesign& design2, std::uint64_t seed, std::uint64_t replicate);

} // namespace svypool
