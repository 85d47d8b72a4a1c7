#include "svypool/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "svypool/errors.hpp"
#include "svypool/version.hpp"

namespace svypool {

using nlohmann::json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw config_error(std::string("config: unknown key '") + it.key() + "' in " +
                               where);
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

} // namespace

ScenarioConfig scenario_from_json(const json& j) {
    if (!j.is_object()) throw config_error("config: top level must be a JSON object");
    check_keys(j, "top level",
               {"population", "columns", "synthetic", "households", "n1", "n2",
                "replications", "seed", "threads", "indicators", "weights", "combine",
                "design_effect1", "design_effect2", "out"});
    ScenarioConfig c;
    if (j.contains("population") && !j.at("population").is_null())
        c.population_path = j.at("population").get<std::string>();
    if (j.contains("columns")) {
        const json& cols = j.at("columns");
        check_keys(cols, "columns",
                   {"person", "household", "income", "aux", "delimiter", "aux_na_zero"});
        read_into(cols, "person", c.columns.person_id);
        read_into(cols, "household", c.columns.household_id);
        read_into(cols, "income", c.columns.income);
        read_into(cols, "aux", c.columns.aux);
        if (cols.contains("delimiter")) {
            const auto d = cols.at("delimiter").get<std::string>();
            if (d.size() != 1) throw config_error("config: delimiter must be one character");
            c.columns.delimiter = d[0];
        }
        read_into(cols, "aux_na_zero", c.columns.aux_na_zero);
    }
    if (j.contains("synthetic")) {
        const json& s = j.at("synthetic");
        check_keys(s, "synthetic",
                   {"seed", "households", "size_probs", "income_log_mean", "income_log_sd",
                    "aux_log_mean", "aux_log_sd", "aux_correlation"});
        read_into(s, "seed", c.synthetic.seed);
        read_into(s, "households", c.synthetic.households);
        if (s.contains("size_probs")) {
            const auto probs = s.at("size_probs").get<std::vector<double>>();
            if (probs.size() != c.synthetic.size_probs.size())
                throw config_error("config: size_probs needs exactly 5 entries");
            std::copy(probs.begin(), probs.end(), c.synthetic.size_probs.begin());
        }
        read_into(s, "income_log_mean", c.synthetic.income_log_mean);
        read_into(s, "income_log_sd", c.synthetic.income_log_sd);
        read_into(s, "aux_log_mean", c.synthetic.aux_log_mean);
        read_into(s, "aux_log_sd", c.synthetic.aux_log_sd);
        read_into(s, "aux_correlation", c.synthetic.aux_correlation);
    }
    read_into(j, "households", c.households);
    read_into(j, "n1", c.n1);
    read_into(j, "n2", c.n2);
    read_into(j, "replications", c.replications);
    read_into(j, "seed", c.seed);
    read_into(j, "threads", c.threads);
    if (j.contains("indicators")) {
        c.indicators.clear();
        for (const auto& name : j.at("indicators"))
            c.indicators.push_back(indicator_from_string(name.get<std::string>()));
    }
    if (j.contains("weights")) {
        c.weight_modes.clear();
        for (const auto& name : j.at("weights"))
            c.weight_modes.push_back(weight_mode_from_string(name.get<std::string>()));
    }
    if (j.contains("combine")) {
        c.combine_modes.clear();
        for (const auto& name : j.at("combine"))
            c.combine_modes.push_back(combine_mode_from_string(name.get<std::string>()));
    }
    read_into(j, "design_effect1", c.design_effect1);
    read_into(j, "design_effect2", c.design_effect2);
    read_into(j, "out", c.out_dir);

    if (c.replications < 1) throw config_error("config: replications must be >= 1");
    return c;
}

json scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["population"] = c.population_path ? json(*c.population_path) : json(nullptr);
    j["columns"] = {{"person", c.columns.person_id},
                    {"household", c.columns.household_id},
                    {"income", c.columns.income},
                    {"aux", c.columns.aux},
                    {"delimiter", std::string(1, c.columns.delimiter)},
                    {"aux_na_zero", c.columns.aux_na_zero}};
    j["synthetic"] = {{"seed", c.synthetic.seed},
                      {"households", c.synthetic.households},
                      {"size_probs", c.synthetic.size_probs},
                      {"income_log_mean", c.synthetic.income_log_mean},
                      {"income_log_sd", c.synthetic.income_log_sd},
                      {"aux_log_mean", c.synthetic.aux_log_mean},
                      {"aux_log_sd", c.synthetic.aux_log_sd},
                      {"aux_correlation", c.synthetic.aux_correlation}};
    // threads is an execution detail, not part of the scenario: identical
    // configs produce identical reports at any worker count
    j["households"] = c.households;
    j["n1"] = c.n1;
    j["n2"] = c.n2;
    j["replications"] = c.replications;
    j["seed"] = c.seed;
    json indicators = json::array();
    for (auto k : c.indicators) indicators.push_back(to_string(k));
    j["indicators"] = indicators;
    json weights = json::array();
    for (auto m : c.weight_modes) weights.push_back(to_string(m));
    j["weights"] = weights;
    json combine = json::array();
    for (auto m : c.combine_modes) combine.push_back(to_string(m));
    j["combine"] = combine;
    j["design_effect1"] = c.design_effect1;
    j["design_effect2"] = c.design_effect2;
    j["out"] = c.out_dir;
    return j;
}

PopulationFrame scenario_population(const ScenarioConfig& config) {
    if (config.population_path)
        return load_population(*config.population_path, config.columns);
    return generate_synthetic_population(config.synthetic);
}

namespace {

void parallel_replicates(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
    unsigned workers = threads == 0
                           ? std::max(1u, std::thread::hardware_concurrency())
                           : threads;
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t r = 0; r < count; ++r) body(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto work = [&] {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= count) break;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error) break;
            }
            try {
                body(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

FiveNumber five_number(std::vector<double> values) {
    FiveNumber out;
    const WeightedSeries series(values, std::vector<double>(values.size(), 1.0));
    out.min = series.value_at_rank(0);
    out.max = series.value_at_rank(series.size() - 1);
    out.q1 = values.size() > 1 ? weighted_quantile(series, 0.25) : out.min;
    out.median = values.size() > 1 ? weighted_quantile(series, 0.5) : out.min;
    out.q3 = values.size() > 1 ? weighted_quantile(series, 0.75) : out.min;
    const double iqr = out.q3 - out.q1;
    out.fence_low = out.q1 - 1.5 * iqr;
    out.fence_high = out.q3 + 1.5 * iqr;
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> truth_values(const ScenarioConfig& config, const PopulationFrame& frame) {
    std::vector<double> truth;
    truth.reserve(config.indicators.size());
    for (IndicatorKind kind : config.indicators)
        truth.push_back(population_truth(frame, kind));
    return truth;
}

} // namespace

SimulationReport run_single_sample(const ScenarioConfig& config) {
    const PopulationFrame frame = scenario_population(config);
    return run_single_sample(config, frame);
}

SimulationReport run_single_sample(const ScenarioConfig& config,
                                   const PopulationFrame& frame) {
    if (config.households > frame.household_count())
        throw config_error("single-sample run: households exceeds population H");
    const TwoStageDesign design(frame.household_sizes(), config.households);

    SimulationReport report;
    report.kind = RunKind::single_sample;
    report.config = config;
    report.truth = truth_values(config, frame);

    const std::size_t n_ind = config.indicators.size();
    report.rows.resize(config.replications * n_ind);

    parallel_replicates(config.replications, config.threads, [&](std::size_t r) {
        const SampleDraw draw = draw_sample(frame, design, config.seed, r);
        const WeightedSeries series = draw.design_series();
        for (std::size_t i = 0; i < n_ind; ++i) {
            const IndicatorKind kind = config.indicators[i];
            ReplicationRow row;
            row.replicate = r;
            row.indicator = kind;
            row.weight_mode = WeightMode::sampling;
            row.theta1 = indicator_value(kind, series);
            row.var1 = clamped_variance(deville_variance_block(linearize(kind, series), draw));
            row.theta2 = nan;
            row.delta = nan;
            row.var2 = nan;
            row.combined = row.theta1;
            report.rows[r * n_ind + i] = std::move(row);
        }
    });

    // Summaries: one cell per indicator.
    for (std::size_t i = 0; i < n_ind; ++i) {
        std::vector<double> values(config.replications), ses(config.replications);
        for (std::size_t r = 0; r < config.replications; ++r) {
            const auto& row = report.rows[r * n_ind + i];
            values[r] = row.theta1;
            ses[r] = std::sqrt(row.var1);
        }
        SummaryCell cell;
        cell.indicator = config.indicators[i];
        cell.weight_mode = WeightMode::sampling;
        cell.mean = mean_of(values);
        cell.mc_sd = sd_of(values);
        cell.mean_lin_se = mean_of(ses);
        cell.combined = five_number(values);
        report.summary.push_back(cell);
        report.boxplot.push_back({config.indicators[i], WeightMode::sampling, std::nullopt,
                                  "sample1", cell.combined});
    }
    return report;
}

SimulationReport run_pooling_scenario(const ScenarioConfig& config) {
    const PopulationFrame frame = scenario_population(config);
    return run_pooling_scenario(config, frame);
}

SimulationReport run_pooling_scenario(const ScenarioConfig& config,
                                      const PopulationFrame& frame) {
    if (config.n1 + config.n2 > frame.household_count())
        throw config_error("pooling run: n1 + n2 exceeds population H");
    if (config.weight_modes.empty() || config.combine_modes.empty())
        throw config_error("pooling run: weight and combine mode lists must be nonempty");
    const TwoStageDesign design1(frame.household_sizes(), config.n1);
    const TwoStageDesign design2(frame.household_sizes(), config.n2);

    const double population_size = static_cast<double>(frame.person_count());
    double aux_total = 0.0;
    for (const auto& p : frame.persons()) aux_total += p.aux;

    SimulationReport report;
    report.kind = RunKind::pooling;
    report.config = config;
    report.truth = truth_values(config, frame);

    const std::size_t n_ind = config.indicators.size();
    const std::size_t n_wm = config.weight_modes.size();
    const std::size_t n_cm = config.combine_modes.size();
    report.rows.resize(config.replications * n_ind * n_wm * n_cm);

    const bool needs_own = std::find(config.weight_modes.begin(), config.weight_modes.end(),
                                     WeightMode::own_alignment) != config.weight_modes.end();
    const bool needs_median =
        std::find(config.weight_modes.begin(), config.weight_modes.end(),
                  WeightMode::median_alignment) != config.weight_modes.end();

    struct CellPair {
        PooledPair pair;
        int neg_w1 = 0;
        int neg_w2 = 0;
    };
    std::vector<CellPair> pairs(config.replications * n_ind * n_wm);

    parallel_replicates(config.replications, config.threads, [&](std::size_t r) {
        auto [s1, s2] = draw_two_disjoint_samples(frame, design1, design2, config.seed, r);
        const CalibrationSpec spec1 =
            default_calibration_spec(s1, population_size, aux_total, config.design_effect1);
        const CalibrationSpec spec2 =
            default_calibration_spec(s2, population_size, aux_total, config.design_effect2);

        // Alignment weights per linearized variable, shared across the grid.
        std::map<IndicatorKind, PoolingWeights> aligned;
        auto weights_for = [&](IndicatorKind kind) -> const PoolingWeights& {
            auto it = aligned.find(kind);
            if (it == aligned.end())
                it = aligned.emplace(kind,
                                     alignment_weights_for(kind, s1, spec1, s2, spec2))
                         .first;
            return it->second;
        };
        PoolingWeights sampling{s1.weight, s2.weight, nan, 0, 0};
        if (needs_median) weights_for(IndicatorKind::median);
        if (needs_own)
            for (IndicatorKind kind : config.indicators) weights_for(kind);

        for (std::size_t i = 0; i < n_ind; ++i) {
            const IndicatorKind target = config.indicators[i];
            for (std::size_t w = 0; w < n_wm; ++w) {
                const WeightMode mode = config.weight_modes[w];
                const PoolingWeights& weights =
                    mode == WeightMode::sampling
                        ? sampling
                        : weights_for(mode == WeightMode::own_alignment
                                          ? target
                                          : IndicatorKind::median);
                CellPair cell;
                cell.pair = evaluate_pair(s1, s2, weights, target, mode);
                cell.neg_w1 = weights.negative_weights1;
                cell.neg_w2 = weights.negative_weights2;
                pairs[(r * n_ind + i) * n_wm + w] = cell;
            }
        }
    });

    // The optimal combination weight is one number per summary cell, the
    // optimal-delta rule applied to the scenario's aggregated variance
    // estimates (at R = 1 this is exactly the per-pair rule). A delta
    // re-estimated inside every replication would jitter around the same
    // value and inflate the combined spread for nothing.
    for (std::size_t i = 0; i < n_ind; ++i) {
        for (std::size_t w = 0; w < n_wm; ++w) {
            double mean_v1 = 0.0, mean_v2 = 0.0;
            for (std::size_t r = 0; r < config.replications; ++r) {
                const auto& cell = pairs[(r * n_ind + i) * n_wm + w];
                mean_v1 += cell.pair.var1;
                mean_v2 += cell.pair.var2;
            }
            mean_v1 /= static_cast<double>(config.replications);
            mean_v2 /= static_cast<double>(config.replications);

            for (std::size_t c = 0; c < n_cm; ++c) {
                const CombineMode cm = config.combine_modes[c];
                const double delta =
                    cm == CombineMode::simple
                        ? 0.5
                        : combine(0.0, mean_v1, 0.0, mean_v2, CombineMode::optimal).delta;
                for (std::size_t r = 0; r < config.replications; ++r) {
                    const auto& cell = pairs[(r * n_ind + i) * n_wm + w];
                    ReplicationRow row;
                    row.replicate = r;
                    row.indicator = config.indicators[i];
                    row.weight_mode = config.weight_modes[w];
                    row.combine_mode = cm;
                    row.theta1 = cell.pair.theta1;
                    row.theta2 = cell.pair.theta2;
                    row.var1 = cell.pair.var1;
                    row.var2 = cell.pair.var2;
                    row.delta = delta;
                    row.combined = delta * cell.pair.theta1 +
                                   (1.0 - delta) * cell.pair.theta2;
                    row.neg_w1 = cell.neg_w1;
                    row.neg_w2 = cell.neg_w2;
                    report.rows[((r * n_ind + i) * n_wm + w) * n_cm + c] = row;
                }
            }
        }
    }

    // Summaries per (indicator, weight mode, combine mode).
    for (std::size_t i = 0; i < n_ind; ++i) {
        for (std::size_t w = 0; w < n_wm; ++w) {
            std::vector<double> theta1(config.replications), theta2(config.replications);
            for (std::size_t c = 0; c < n_cm; ++c) {
                std::vector<double> combined(config.replications), ses(config.replications);
                for (std::size_t r = 0; r < config.replications; ++r) {
                    const auto& row =
                        report.rows[((r * n_ind + i) * n_wm + w) * n_cm + c];
                    combined[r] = row.combined;
                    const double cv = row.delta * row.delta * row.var1 +
                                      (1.0 - row.delta) * (1.0 - row.delta) * row.var2;
                    ses[r] = std::sqrt(cv);
                    theta1[r] = row.theta1;
                    theta2[r] = row.theta2;
                }
                SummaryCell cell;
                cell.indicator = config.indicators[i];
                cell.weight_mode = config.weight_modes[w];
                cell.combine_mode = config.combine_modes[c];
                cell.mean = mean_of(combined);
                cell.mc_sd = sd_of(combined);
                cell.mean_lin_se = mean_of(ses);
                cell.combined = five_number(combined);
                report.summary.push_back(cell);
                report.boxplot.push_back({cell.indicator, cell.weight_mode,
                                          cell.combine_mode, "combined", cell.combined});
            }
            report.boxplot.push_back({config.indicators[i], config.weight_modes[w],
                                      std::nullopt, "sample1", five_number(theta1)});
            report.boxplot.push_back({config.indicators[i], config.weight_modes[w],
                                      std::nullopt, "sample2", five_number(theta2)});
        }
    }
    return report;
}

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

json json_number(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

std::string mode_string(const std::optional<CombineMode>& mode) {
    return mode ? to_string(*mode) : std::string();
}

} // namespace

void emit_report(const SimulationReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    auto open = [&](const char* name) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw data_error("cannot write report file: " + (out_dir / name).string());
        return out;
    };

    {
        auto out = open("replications.csv");
        out << "replicate,indicator,weight_mode,combine_mode,theta1,theta2,delta,"
               "combined,var1,var2,neg_w1,neg_w2\n";
        for (const auto& row : report.rows) {
            out << row.replicate << ',' << to_string(row.indicator) << ','
                << to_string(row.weight_mode) << ',' << mode_string(row.combine_mode) << ','
                << format_double(row.theta1) << ',' << format_double(row.theta2) << ','
                << format_double(row.delta) << ',' << format_double(row.combined) << ','
                << format_double(row.var1) << ',' << format_double(row.var2) << ','
                << row.neg_w1 << ',' << row.neg_w2 << '\n';
        }
    }

    {
        auto out = open("summary.csv");
        out << "indicator,weight_mode,combine_mode,mean,mc_sd,mean_lin_se,min,q1,median,"
               "q3,max\n";
        for (std::size_t i = 0; i < report.config.indicators.size(); ++i) {
            out << to_string(report.config.indicators[i]) << ",truth,,"
                << format_double(report.truth[i]) << ",,,,,,,\n";
        }
        for (const auto& cell : report.summary) {
            out << to_string(cell.indicator) << ',' << to_string(cell.weight_mode) << ','
                << mode_string(cell.combine_mode) << ',' << format_double(cell.mean) << ','
                << format_double(cell.mc_sd) << ',' << format_double(cell.mean_lin_se)
                << ',' << format_double(cell.combined.min) << ','
                << format_double(cell.combined.q1) << ','
                << format_double(cell.combined.median) << ','
                << format_double(cell.combined.q3) << ','
                << format_double(cell.combined.max) << '\n';
        }
    }

    {
        auto out = open("boxplot_data.csv");
        out << "indicator,weight_mode,combine_mode,series,min,q1,median,q3,max,"
               "fence_low,fence_high\n";
        for (const auto& row : report.boxplot) {
            out << to_string(row.indicator) << ',' << to_string(row.weight_mode) << ','
                << mode_string(row.combine_mode) << ',' << row.series << ','
                << format_double(row.stats.min) << ',' << format_double(row.stats.q1) << ','
                << format_double(row.stats.median) << ',' << format_double(row.stats.q3)
                << ',' << format_double(row.stats.max) << ','
                << format_double(row.stats.fence_low) << ','
                << format_double(row.stats.fence_high) << '\n';
        }
    }

    {
        json j;
        j["version"] = version;
        j["kind"] = report.kind == RunKind::single_sample ? "single-sample" : "pooling";
        j["config"] = scenario_to_json(report.config);
        json truth;
        for (std::size_t i = 0; i < report.config.indicators.size(); ++i)
            truth[to_string(report.config.indicators[i])] = json_number(report.truth[i]);
        j["truth"] = truth;
        json cells = json::array();
        for (const auto& cell : report.summary) {
            json c;
            c["indicator"] = to_string(cell.indicator);
            c["weight_mode"] = to_string(cell.weight_mode);
            c["combine_mode"] = mode_string(cell.combine_mode);
            c["mean"] = json_number(cell.mean);
            c["mc_sd"] = json_number(cell.mc_sd);
            c["mean_lin_se"] = json_number(cell.mean_lin_se);
            c["min"] = json_number(cell.combined.min);
            c["q1"] = json_number(cell.combined.q1);
            c["median"] = json_number(cell.combined.median);
            c["q3"] = json_number(cell.combined.q3);
            c["max"] = json_number(cell.combined.max);
            c["fence_low"] = json_number(cell.combined.fence_low);
            c["fence_high"] = json_number(cell.combined.fence_high);
            cells.push_back(c);
        }
        j["cells"] = cells;
        auto out = open("summary.json");
        out << j.dump(2) << '\n';
    }
}

} // namespace svypool
