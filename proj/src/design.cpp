#include "svypool/design.hpp"

#include <algorithm>
#include <numeric>

#include "svypool/errors.hpp"
#include "svypool/rng.hpp"

namespace svypool {

TwoStageDesign::TwoStageDesign(std::vector<std::size_t> household_sizes,
                               std::size_t sample_households)
    : sizes_(std::move(household_sizes)), sample_households_(sample_households) {
    if (sizes_.empty()) throw config_error("design: no households");
    if (sample_households_ < 1 || sample_households_ > sizes_.size())
        throw config_error("design: n_h must satisfy 1 <= n_h <= H (got n_h=" +
                           std::to_string(sample_households_) + ", H=" +
                           std::to_string(sizes_.size()) + ")");
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t s : sizes_) {
        if (s == 0) throw config_error("design: empty household");
        offsets_.push_back(offsets_.back() + s);
    }
}

double TwoStageDesign::first_order() const {
    return static_cast<double>(sample_households_) / static_cast<double>(sizes_.size());
}

double TwoStageDesign::joint_inclusion(bool same_household) const {
    const double f = first_order();
    if (same_household) return f;
    const double h = static_cast<double>(sizes_.size());
    const double n = static_cast<double>(sample_households_);
    return f * (n - 1.0) / (h - 1.0);
}

std::size_t TwoStageDesign::household_of_unit(std::size_t unit) const {
    if (unit >= offsets_.back()) throw config_error("design: unit index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), unit);
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

double TwoStageDesign::joint_inclusion(std::size_t unit_k, std::size_t unit_l) const {
    return joint_inclusion(household_of_unit(unit_k) == household_of_unit(unit_l));
}

double TwoStageDesign::delta_tilde(bool same_household) const {
    const double pkl = joint_inclusion(same_household);
    if (!(pkl > 0.0))
        throw numeric_error("delta-tilde undefined: zero joint inclusion probability "
                            "(n_h=1 cross-household pair)");
    const double f = first_order();
    return (pkl - f * f) / pkl;
}

double TwoStageDesign::delta_tilde(std::size_t unit_k, std::size_t unit_l) const {
    return delta_tilde(household_of_unit(unit_k) == household_of_unit(unit_l));
}

double joint_inclusion(const SampleDraw& draw, std::size_t k, std::size_t l) {
    return draw.design.joint_inclusion(draw.household[k] == draw.household[l]);
}

double delta_tilde(const SampleDraw& draw, std::size_t k, std::size_t l) {
    return draw.design.delta_tilde(draw.household[k] == draw.household[l]);
}

namespace {

// First `take` entries of a uniform permutation of [0, H).
std::vector<std::size_t> sample_household_indices(std::size_t population, std::size_t take,
                                                  RngStream& rng) {
    std::vector<std::size_t> order(population);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(population - i));
        std::swap(order[i], order[j]);
    }
    order.resize(take);
    return order;
}

SampleDraw materialize(const PopulationFrame& frame, const TwoStageDesign& design,
                       std::vector<std::size_t> selected) {
    std::sort(selected.begin(), selected.end());
    SampleDraw draw{design, {}, {}, {}, {}, {}, {}, {}};
    const double weight = 1.0 / design.first_order();
    const double pi = design.first_order();
    std::size_t total = 0;
    for (std::size_t h : selected) total += frame.household_span(h).second -
                                            frame.household_span(h).first;
    draw.income.reserve(total);
    draw.aux.reserve(total);
    draw.weight.reserve(total);
    draw.pi.reserve(total);
    draw.household.reserve(total);
    draw.person_index.reserve(total);
    for (std::size_t local = 0; local < selected.size(); ++local) {
        const auto [begin, end] = frame.household_span(selected[local]);
        for (std::size_t i = begin; i < end; ++i) {
            const auto& person = frame.persons()[i];
            draw.income.push_back(person.eq_income);
            draw.aux.push_back(person.aux);
            draw.weight.push_back(weight);
            draw.pi.push_back(pi);
            draw.household.push_back(local);
            draw.person_index.push_back(i);
        }
    }
    draw.selected_households = std::move(selected);
    return draw;
}

} // namespace

SampleDraw draw_sample(const PopulationFrame& frame, const TwoStageDesign& design,
                       std::uint64_t seed, std::uint64_t replicate) {
    if (design.population_households() != frame.household_count())
        throw config_error("design household count does not match the population frame");
    RngStream rng(seed, replicate, rng_stream::household_sampling);
    auto selected = sample_household_indices(frame.household_count(),
                                             design.sample_households(), rng);
    return materialize(frame, design, std::move(selected));
}

std::pair<SampleDraw, SampleDraw> draw_two_disjoint_samples(
    const PopulationFrame& frame, const TwoStageDesign& design1,
    const TwoStageDesign& design2, std::uint64_t seed, std::uint64_t replicate) {
    if (design1.population_households() != frame.household_count() ||
        design2.population_households() != frame.household_count())
        throw config_error("design household count does not match the population frame");
    const std::size_t n1 = design1.sample_households();
    const std::size_t n2 = design2.sample_households();
    if (n1 + n2 > frame.household_count())
        throw config_error("disjoint draws need n_h1 + n_h2 <= H (got " +
                           std::to_string(n1) + " + " + std::to_string(n2) + " > " +
                           std::to_string(frame.household_count()) + ")");
    RngStream rng(seed, replicate, rng_stream::household_sampling);
    auto head = sample_household_indices(frame.household_count(), n1 + n2, rng);
    std::vector<std::size_t> first(head.begin(), head.begin() + n1);
    std::vector<std::size_t> second(head.begin() + n1, head.end());
    return {materialize(frame, design1, std::move(first)),
            materialize(frame, design2, std::move(second))};
}

} // namespace svypool
