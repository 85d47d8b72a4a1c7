#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "svypool/pooling.hpp"
#include "svypool/population.hpp"

namespace svypool {

enum class RunKind { single_sample, pooling };

/// One Monte Carlo experiment: population source, sample sizes, replication
/// count and the estimator grid. JSON config mirrors every field; CLI flags
/// override file values.
struct ScenarioConfig {
    std::optional<std::string> population_path;
    ColumnMap columns;
    SyntheticConfig synthetic;

    std::size_t households = 1000; // single-sample n_h
    std::size_t n1 = 500;
    std::size_t n2 = 1000;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: hardware concurrency

    std::vector<IndicatorKind> indicators{IndicatorKind::median, IndicatorKind::qsr,
                                          IndicatorKind::gini, IndicatorKind::rmpg};
    std::vector<WeightMode> weight_modes{WeightMode::sampling, WeightMode::own_alignment,
                                         WeightMode::median_alignment};
    std::vector<CombineMode> combine_modes{CombineMode::simple, CombineMode::optimal};

    double design_effect1 = 1.0;
    double design_effect2 = 1.0;

    std::string out_dir = "out";
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

/// Loads the configured CSV population or generates the synthetic fallback.
PopulationFrame scenario_population(const ScenarioConfig& config);

struct ReplicationRow {
    std::uint64_t replicate = 0;
    IndicatorKind indicator = IndicatorKind::median;
    WeightMode weight_mode = WeightMode::sampling;
    std::optional<CombineMode> combine_mode; // empty for single-sample runs
    // NaN marks cells that do not apply (single-sample runs).
    double theta1 = 0.0;
    double theta2 = 0.0;
    double delta = 0.0;
    double combined = 0.0;
    double var1 = 0.0;
    double var2 = 0.0;
    int neg_w1 = 0;
    int neg_w2 = 0;
};

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double fence_low = 0.0, fence_high = 0.0;
};

struct SummaryCell {
    IndicatorKind indicator;
    WeightMode weight_mode;
    std::optional<CombineMode> combine_mode;
    double mean = 0.0;
    double mc_sd = 0.0;       // across replications, denominator R-1
    double mean_lin_se = 0.0; // mean linearization SE of the combined estimate
    FiveNumber combined;
};

struct BoxplotRow {
    IndicatorKind indicator;
    WeightMode weight_mode;
    std::optional<CombineMode> combine_mode; // empty for per-sample series
    std::string series;                      // sample1 | sample2 | combined
    FiveNumber stats;
};

struct SimulationReport {
    RunKind kind = RunKind::single_sample;
    ScenarioConfig config;
    std::vector<double> truth; // per config.indicators entry
    std::vector<ReplicationRow> rows;
    std::vector<SummaryCell> summary;
    std::vector<BoxplotRow> boxplot;
};

/// Table-1 style experiment: one sample per replication, every indicator with
/// its linearization SE.
SimulationReport run_single_sample(const ScenarioConfig& config);
SimulationReport run_single_sample(const ScenarioConfig& config,
                                   const PopulationFrame& frame);

/// Two disjoint samples per replication and the full
/// indicator x weight-mode x combine-mode grid.
SimulationReport run_pooling_scenario(const ScenarioConfig& config);
SimulationReport run_pooling_scenario(const ScenarioConfig& config,
                                      const PopulationFrame& frame);

/// Writes replications.csv, summary.csv, summary.json and boxplot_data.csv.
/// Deterministic bytes for a given report.
void emit_report(const SimulationReport& report, const std::filesystem::path& out_dir);

} // namespace svypool
