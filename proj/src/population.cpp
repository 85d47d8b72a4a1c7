#include "svypool/population.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "svypool/errors.hpp"
#include "svypool/rng.hpp"

namespace svypool {

PopulationFrame PopulationFrame::from_records(std::vector<PersonRecord> records) {
    if (records.empty()) throw data_error("population: no records");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& p = records[i];
        if (p.household_id.empty())
            throw data_error("population: empty household id at record " + std::to_string(i + 1));
        if (!std::isfinite(p.eq_income))
            throw data_error("population: non-finite income at record " + std::to_string(i + 1));
        if (!std::isfinite(p.aux) || p.aux < 0.0)
            throw data_error("population: aux must be finite and >= 0 at record " +
                             std::to_string(i + 1));
    }

    // Household-major order: households in order of first appearance,
    // within-household file order preserved.
    std::unordered_map<std::string, std::size_t> household_index;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] =
            household_index.try_emplace(records[i].household_id, members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(i);
    }

    PopulationFrame frame;
    frame.persons_.reserve(records.size());
    frame.household_offsets_.reserve(members.size() + 1);
    frame.household_offsets_.push_back(0);
    for (const auto& group : members) {
        for (std::size_t i : group) frame.persons_.push_back(std::move(records[i]));
        frame.household_offsets_.push_back(frame.persons_.size());
    }
    return frame;
}

std::vector<std::size_t> PopulationFrame::household_sizes() const {
    std::vector<std::size_t> sizes(household_count());
    for (std::size_t j = 0; j < sizes.size(); ++j)
        sizes[j] = household_offsets_[j + 1] - household_offsets_[j];
    return sizes;
}

std::vector<double> PopulationFrame::incomes() const {
    std::vector<double> out(persons_.size());
    for (std::size_t i = 0; i < persons_.size(); ++i) out[i] = persons_[i].eq_income;
    return out;
}

std::vector<double> PopulationFrame::aux_values() const {
    std::vector<double> out(persons_.size());
    for (std::size_t i = 0; i < persons_.size(); ++i) out[i] = persons_[i].aux;
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream stream(line);
    while (std::getline(stream, cell, delimiter)) cells.push_back(cell);
    if (!line.empty() && line.back() == delimiter) cells.emplace_back();
    return cells;
}

bool is_na(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN";
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    // tolerate surrounding spaces and a trailing \r from CRLF files
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw data_error("row " + std::to_string(row) + ": cannot parse column '" +
                         column + "' value '" + cell + "'");
    return value;
}

std::string trim_header(std::string cell) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    // strip surrounding quotes as written by several CSV exporters
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"')
        cell = cell.substr(1, cell.size() - 2);
    return cell;
}

} // namespace

PopulationFrame load_population(const std::filesystem::path& path, const ColumnMap& columns) {
    std::ifstream input(path);
    if (!input) throw data_error("cannot open population file: " + path.string());

    std::string header_line;
    if (!std::getline(input, header_line)) throw data_error("empty population file");
    const auto headers = split_line(header_line, columns.delimiter);

    auto find_column = [&](const std::string& name) {
        for (std::size_t i = 0; i < headers.size(); ++i)
            if (trim_header(headers[i]) == name) return static_cast<long>(i);
        return -1L;
    };
    const long id_col = find_column(columns.person_id);
    const long hh_col = find_column(columns.household_id);
    const long income_col = find_column(columns.income);
    const long aux_col = find_column(columns.aux);
    if (hh_col < 0) throw config_error("missing household column '" + columns.household_id + "'");
    if (income_col < 0) throw config_error("missing income column '" + columns.income + "'");
    if (aux_col < 0) throw config_error("missing aux column '" + columns.aux + "'");
    // person ids are optional; rows are numbered when the column is absent

    std::vector<PersonRecord> records;
    std::string line;
    std::size_t row = 1;
    while (std::getline(input, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line, columns.delimiter);
        const std::size_t needed = static_cast<std::size_t>(
            std::max({id_col, hh_col, income_col, aux_col})) + 1;
        if (cells.size() < needed)
            throw data_error("row " + std::to_string(row) + ": expected at least " +
                             std::to_string(needed) + " cells, found " +
                             std::to_string(cells.size()));
        PersonRecord person;
        person.person_id = id_col >= 0 ? trim_header(cells[id_col]) : std::to_string(row - 1);
        person.household_id = trim_header(cells[hh_col]);
        if (person.household_id.empty())
            throw data_error("row " + std::to_string(row) + ": empty household id");
        person.eq_income = parse_cell(cells[income_col], row, columns.income);
        const std::string& aux_cell = cells[aux_col];
        if (columns.aux_na_zero && is_na(trim_header(aux_cell)))
            person.aux = 0.0;
        else
            person.aux = parse_cell(aux_cell, row, columns.aux);
        if (person.aux < 0.0)
            throw data_error("row " + std::to_string(row) + ": negative aux value");
        records.push_back(std::move(person));
    }
    if (records.empty()) throw data_error("population file has a header but no rows");
    return PopulationFrame::from_records(std::move(records));
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

void write_population_csv(const PopulationFrame& frame, const std::filesystem::path& path,
                          const ColumnMap& columns) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write population file: " + path.string());
    const char d = columns.delimiter;
    out << columns.person_id << d << columns.household_id << d << columns.income << d
        << columns.aux << '\n';
    for (const auto& p : frame.persons()) {
        out << p.person_id << d << p.household_id << d << format_double(p.eq_income) << d
            << format_double(p.aux) << '\n';
    }
    if (!out) throw data_error("write failed: " + path.string());
}

double population_truth(const PopulationFrame& frame, IndicatorKind kind) {
    std::vector<double> weights(frame.person_count(), 1.0);
    const WeightedSeries series(frame.incomes(), std::move(weights));
    return indicator_value(kind, series);
}

double aux_income_correlation(const PopulationFrame& frame) {
    const auto income = frame.incomes();
    const auto aux = frame.aux_values();
    const double n = static_cast<double>(income.size());
    double mean_y = 0.0, mean_x = 0.0;
    for (std::size_t i = 0; i < income.size(); ++i) {
        mean_y += income[i];
        mean_x += aux[i];
    }
    mean_y /= n;
    mean_x /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < income.size(); ++i) {
        const double dy = income[i] - mean_y;
        const double dx = aux[i] - mean_x;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw numeric_error("correlation undefined: constant column");
    return sxy / std::sqrt(sxx * syy);
}

PopulationFrame generate_synthetic_population(const SyntheticConfig& config) {
    if (config.households < 2)
        throw config_error("synthetic population needs at least 2 households");
    double prob_sum = 0.0;
    for (double p : config.size_probs) {
        if (p < 0.0) throw config_error("synthetic size probabilities must be >= 0");
        prob_sum += p;
    }
    if (!(prob_sum > 0.0)) throw config_error("synthetic size probabilities sum to 0");
    if (!(config.income_log_sd > 0.0) || !(config.aux_log_sd > 0.0))
        throw config_error("synthetic log-sd parameters must be positive");

    // Gaussian copula on the log scale: solve for the latent correlation that
    // yields the requested Pearson correlation of the two log-normals.
    const double sig_y = config.income_log_sd;
    const double sig_x = config.aux_log_sd;
    const double span =
        std::sqrt((std::exp(sig_y * sig_y) - 1.0) * (std::exp(sig_x * sig_x) - 1.0));
    const double inner = 1.0 + config.aux_correlation * span;
    if (!(inner > 0.0))
        throw config_error("aux correlation target unreachable for these log-sd values");
    const double latent = std::log(inner) / (sig_y * sig_x);
    if (std::abs(latent) > 1.0)
        throw config_error("aux correlation target unreachable for these log-sd values");

    RngStream size_rng(config.seed, 0, rng_stream::synthetic_sizes);
    RngStream household_rng(config.seed, 0, rng_stream::synthetic_household_effect);
    RngStream person_rng(config.seed, 0, rng_stream::synthetic_person_noise);

    std::vector<PersonRecord> records;
    std::size_t person_counter = 0;
    const double ortho = std::sqrt(1.0 - latent * latent);
    for (std::size_t j = 0; j < config.households; ++j) {
        const double u = size_rng.next_unit() * prob_sum;
        std::size_t size = config.size_probs.size();
        double acc = 0.0;
        for (std::size_t s = 0; s < config.size_probs.size(); ++s) {
            acc += config.size_probs[s];
            if (u < acc) {
                size = s + 1;
                break;
            }
        }
        if (size > config.size_probs.size()) size = config.size_probs.size();

        // Equivalized income is a household quantity: one draw per household,
        // shared by every member. Aux varies by person around it.
        const double household_effect = household_rng.next_normal();
        const double income =
            std::exp(config.income_log_mean + sig_y * household_effect);
        const std::string household_id = "h" + std::to_string(j + 1);
        for (std::size_t m = 0; m < size; ++m) {
            const double noise = person_rng.next_normal();
            PersonRecord person;
            person.person_id = "p" + std::to_string(++person_counter);
            person.household_id = household_id;
            person.eq_income = income;
            person.aux = std::exp(config.aux_log_mean +
                                  sig_x * (latent * household_effect + ortho * noise));
            records.push_back(std::move(person));
        }
    }
    return PopulationFrame::from_records(std::move(records));
}

} // namespace svypool
