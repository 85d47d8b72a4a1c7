#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "svypool/indicators.hpp"

namespace svypool {

struct PersonRecord {
    std::string person_id;
    std::string household_id;
    /// Equivalized income, the study variable.
    double eq_income = 0.0;
    /// Auxiliary calibration variable (e.g. employee cash income), >= 0.
    double aux = 0.0;
};

/// Person-level microdata grouped by household. Persons of a household are
/// contiguous and global order is household-major; frames are immutable after
/// construction and safe to share across threads.
class PopulationFrame {
public:
    /// Groups records by household (order of first appearance), preserving
    /// within-household file order. Validates the record invariants.
    static PopulationFrame from_records(std::vector<PersonRecord> records);

    std::size_t person_count() const { return persons_.size(); }
    std::size_t household_count() const { return household_offsets_.size() - 1; }

    std::span<const PersonRecord> persons() const { return persons_; }
    /// [begin, end) positions of household j.
    std::pair<std::size_t, std::size_t> household_span(std::size_t j) const {
        return {household_offsets_[j], household_offsets_[j + 1]};
    }
    std::vector<std::size_t> household_sizes() const;

    std::vector<double> incomes() const;
    std::vector<double> aux_values() const;

private:
    std::vector<PersonRecord> persons_;
    std::vector<std::size_t> household_offsets_; // size H+1
};

struct ColumnMap {
    std::string person_id = "rb030";
    std::string household_id = "db030";
    std::string income = "eqIncome";
    std::string aux = "py010n";
    char delimiter = ',';
    /// Treat empty/NA aux cells as 0 (real eusilc has NA py010n for minors).
    bool aux_na_zero = false;
};

PopulationFrame load_population(const std::filesystem::path& path,
                                const ColumnMap& columns = {});

/// Inverse of load_population: header + one row per person, household-major.
void write_population_csv(const PopulationFrame& frame,
                          const std::filesystem::path& path,
                          const ColumnMap& columns = {});

/// Indicator evaluated on the whole frame with unit weights.
double population_truth(const PopulationFrame& frame, IndicatorKind kind);

/// Pearson correlation between aux and income over all persons.
double aux_income_correlation(const PopulationFrame& frame);

struct SyntheticConfig {
    std::uint64_t seed = 1;
    std::size_t households = 6000;
    /// Household-size distribution over sizes 1..5.
    std::array<double, 5> size_probs{0.26, 0.33, 0.17, 0.16, 0.08};
    /// Household-level log-normal income (every member carries the household
    /// value, as equivalized income does).
    double income_log_mean = 9.8;
    double income_log_sd = 0.47;
    /// Person-level log-normal auxiliary variable.
    double aux_log_mean = 9.4;
    double aux_log_sd = 0.8;
    /// Target Pearson correlation between aux and income.
    double aux_correlation = 0.36;
};

/// Deterministic synthetic fallback population; a pure function of its
/// configuration. Realized aux/income correlation lands within +-0.1 of the
/// target for H >= 1000.
PopulationFrame generate_synthetic_population(const SyntheticConfig& config);

} // namespace svypool
