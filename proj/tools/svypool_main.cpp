#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svypool/errors.hpp"
#include "svypool/simulation.hpp"
#include "svypool/version.hpp"

using namespace svypool;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string population;
    std::string out_dir;
    std::string indicators;
    long long replications = -1;
    long long seed = -1;
    long long threads = -1;
};

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

ScenarioConfig load_config(const CommonFlags& flags) {
    ScenarioConfig config;
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw config_error("cannot open config file: " + flags.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw config_error("config file is not valid JSON: " + std::string(e.what()));
        }
        config = scenario_from_json(j);
    }
    // flags override file values
    if (!flags.population.empty()) config.population_path = flags.population;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.replications >= 0) config.replications = static_cast<std::size_t>(flags.replications);
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.threads >= 0) config.threads = static_cast<unsigned>(flags.threads);
    if (!flags.indicators.empty()) {
        config.indicators.clear();
        for (const auto& name : split_list(flags.indicators))
            config.indicators.push_back(indicator_from_string(name));
    }
    if (config.replications < 1) throw config_error("replications must be >= 1");
    return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override it");
    cmd->add_option("--population", flags.population,
                    "population CSV (synthetic fallback when absent)");
    cmd->add_option("--out", flags.out_dir, "output directory for report files");
    cmd->add_option("--replications", flags.replications, "Monte Carlo replications")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", flags.seed, "RNG seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--indicators", flags.indicators,
                    "comma list: median,qsr,gini,rmpg");
}

void print_summary(const SimulationReport& report) {
    std::cout << "indicator        weight-mode        combine   mean          mc-sd         mean-lin-se\n";
    for (const auto& cell : report.summary) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-16s %-18s %-9s %-13.6g %-13.6g %-13.6g",
                      to_string(cell.indicator).c_str(),
                      to_string(cell.weight_mode).c_str(),
                      cell.combine_mode ? to_string(*cell.combine_mode).c_str() : "",
                      cell.mean, cell.mc_sd, cell.mean_lin_se);
        std::cout << line << '\n';
    }
}

int run_estimate(const CommonFlags& flags, long long households) {
    ScenarioConfig config = load_config(flags);
    if (households >= 0) config.households = static_cast<std::size_t>(households);
    const SimulationReport report = run_single_sample(config);
    emit_report(report, config.out_dir);
    print_summary(report);
    std::cout << "report written to " << config.out_dir << '\n';
    return exit_code::ok;
}

int run_pool(const CommonFlags& flags, long long n1, long long n2,
             const std::string& align_on, const std::string& weights,
             const std::string& combine) {
    ScenarioConfig config = load_config(flags);
    if (n1 >= 0) config.n1 = static_cast<std::size_t>(n1);
    if (n2 >= 0) config.n2 = static_cast<std::size_t>(n2);
    if (!weights.empty()) {
        config.weight_modes.clear();
        for (const auto& name : split_list(weights)) {
            // the generic "alignment" token resolves through --align-on
            if (name == "alignment") {
                config.weight_modes.push_back(align_on == "median"
                                                  ? WeightMode::median_alignment
                                                  : WeightMode::own_alignment);
            } else {
                config.weight_modes.push_back(weight_mode_from_string(name));
            }
        }
    } else if (align_on == "median") {
        // --align-on median narrows the default grid to the median's weights
        config.weight_modes = {WeightMode::sampling, WeightMode::median_alignment};
    }
    if (!align_on.empty() && align_on != "median" && align_on != "indicator")
        throw config_error("--align-on expects 'indicator' or 'median'");
    if (!combine.empty()) {
        config.combine_modes.clear();
        for (const auto& name : split_list(combine))
            config.combine_modes.push_back(combine_mode_from_string(name));
    }
    const SimulationReport report = run_pooling_scenario(config);
    emit_report(report, config.out_dir);
    print_summary(report);
    std::cout << "report written to " << config.out_dir << '\n';
    return exit_code::ok;
}

int run_truth(const CommonFlags& flags, bool as_json) {
    ScenarioConfig config = load_config(flags);
    const PopulationFrame frame = scenario_population(config);
    const double correlation = aux_income_correlation(frame);
    if (as_json) {
        json j;
        j["persons"] = frame.person_count();
        j["households"] = frame.household_count();
        j["aux_income_correlation"] = correlation;
        for (IndicatorKind kind : config.indicators)
            j[to_string(kind)] = population_truth(frame, kind);
        std::cout << j.dump(2) << '\n';
        return exit_code::ok;
    }
    std::cout << "persons:     " << frame.person_count() << '\n'
              << "households:  " << frame.household_count() << '\n'
              << "corr(aux,y): " << correlation << '\n';
    for (IndicatorKind kind : config.indicators)
        std::cout << to_string(kind) << ": " << population_truth(frame, kind) << '\n';
    return exit_code::ok;
}

int run_synth(const std::string& config_path, long long seed, long long households,
              double correlation, const std::string& out_csv) {
    CommonFlags flags;
    flags.config_path = config_path;
    ScenarioConfig config = load_config(flags);
    SyntheticConfig synth = config.synthetic;
    if (seed >= 0) synth.seed = static_cast<std::uint64_t>(seed);
    if (households >= 0) synth.households = static_cast<std::size_t>(households);
    if (correlation > -2.0) synth.aux_correlation = correlation;
    const PopulationFrame frame = generate_synthetic_population(synth);
    write_population_csv(frame, out_csv, config.columns);
    std::cout << "wrote " << frame.person_count() << " persons in "
              << frame.household_count() << " households to " << out_csv << '\n';
    return exit_code::ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"svypool: design-based indicator estimation, variance by "
                 "linearization, and two-sample pooling via aligned weights"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    CommonFlags estimate_flags, pool_flags, truth_flags;
    long long households = -1, n1 = -1, n2 = -1, synth_households = -1, synth_seed = -1;
    double synth_correlation = -3.0;
    std::string align_on = "indicator", weights, combine;
    std::string synth_out = "population.csv", synth_config;
    bool truth_json = false;

    auto* estimate = app.add_subcommand(
        "estimate", "single-sample Monte Carlo: indicators with linearization SEs");
    add_common(estimate, estimate_flags);
    estimate->add_option("--households", households, "households per sample (n_h)")
        ->check(CLI::NonNegativeNumber);

    auto* pool = app.add_subcommand(
        "pool", "two-sample pooling scenario over weight and combine modes");
    add_common(pool, pool_flags);
    pool->add_option("--n1", n1, "households in sample 1")->check(CLI::NonNegativeNumber);
    pool->add_option("--n2", n2, "households in sample 2")->check(CLI::NonNegativeNumber);
    pool->add_option("--align-on", align_on,
                     "'indicator' (each target aligns on itself) or 'median'");
    pool->add_option("--weights", weights,
                     "comma list: sampling,own-alignment,median-alignment");
    pool->add_option("--combine", combine, "comma list: simple,optimal");

    auto* truth = app.add_subcommand("truth", "population truth values");
    add_common(truth, truth_flags);
    truth->add_flag("--json", truth_json, "emit JSON");

    auto* synth = app.add_subcommand("synth", "write a synthetic population CSV");
    synth->add_option("--config", synth_config, "JSON config file; flags override it");
    synth->add_option("--seed", synth_seed, "generator seed")->check(CLI::NonNegativeNumber);
    synth->add_option("--households", synth_households, "household count")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--correlation", synth_correlation, "target aux/income correlation");
    synth->add_option("--out", synth_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::config;
    }

    try {
        if (estimate->parsed()) return run_estimate(estimate_flags, households);
        if (pool->parsed()) return run_pool(pool_flags, n1, n2, align_on, weights, combine);
        if (truth->parsed()) return run_truth(truth_flags, truth_json);
        if (synth->parsed())
            return run_synth(synth_config, synth_seed, synth_households, synth_correlation,
                             synth_out);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_code::config;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return exit_code::data;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return exit_code::numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::failure;
    }
    return exit_code::failure;
}
