#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "svypool/errors.hpp"
#include "svypool/simulation.hpp"
#include "svypool/version.hpp"

namespace py = pybind11;
using namespace svypool;
using nlohmann::json;

namespace {

ColumnMap columns_from_dict(const py::dict& d) {
    ColumnMap columns;
    for (auto item : d) {
        const auto key = item.first.cast<std::string>();
        if (key == "person") columns.person_id = item.second.cast<std::string>();
        else if (key == "household") columns.household_id = item.second.cast<std::string>();
        else if (key == "income") columns.income = item.second.cast<std::string>();
        else if (key == "aux") columns.aux = item.second.cast<std::string>();
        else if (key == "delimiter") columns.delimiter = item.second.cast<std::string>().at(0);
        else if (key == "aux_na_zero") columns.aux_na_zero = item.second.cast<bool>();
        else throw config_error("unknown column mapping key: " + key);
    }
    return columns;
}

CalibrationSpec spec_for(const SampleDraw& draw, double population_size,
                         double aux_total, double design_effect) {
    return default_calibration_spec(draw, population_size, aux_total, design_effect);
}

py::dict indicator_to_dict(const IndicatorResult& r) {
    py::dict out;
    out["kind"] = to_string(r.kind);
    out["value"] = r.value;
    out["nhat"] = r.nhat;
    out["total"] = r.total;
    out["extras"] = r.extras;
    out["warnings"] = r.warnings;
    return out;
}

json config_json_from_object(const py::object& config) {
    std::string text;
    if (py::isinstance<py::str>(config)) {
        text = config.cast<std::string>();
    } else {
        const py::object dumps = py::module_::import("json").attr("dumps");
        text = dumps(config).cast<std::string>();
    }
    return json::parse(text);
}

py::dict report_to_dict(const SimulationReport& report) {
    py::dict out;
    out["kind"] = report.kind == RunKind::single_sample ? "single-sample" : "pooling";
    py::dict truth;
    for (std::size_t i = 0; i < report.config.indicators.size(); ++i)
        truth[py::str(to_string(report.config.indicators[i]))] = report.truth[i];
    out["truth"] = truth;
    py::list cells;
    for (const auto& cell : report.summary) {
        py::dict c;
        c["indicator"] = to_string(cell.indicator);
        c["weight_mode"] = to_string(cell.weight_mode);
        c["combine_mode"] =
            cell.combine_mode ? py::object(py::str(to_string(*cell.combine_mode)))
                              : py::object(py::none());
        c["mean"] = cell.mean;
        c["mc_sd"] = cell.mc_sd;
        c["mean_lin_se"] = cell.mean_lin_se;
        cells.append(c);
    }
    out["cells"] = cells;
    out["replications"] = report.config.replications;
    return out;
}

void register_exceptions(py::module_& m) {
    static py::exception<config_error> config_exc(m, "ConfigError");
    static py::exception<data_error> data_exc(m, "DataError");
    static py::exception<numeric_error> numeric_exc(m, "NumericError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const config_error& e) {
            PyErr_SetString(config_exc.ptr(), e.what());
        } catch (const data_error& e) {
            PyErr_SetString(data_exc.ptr(), e.what());
        } catch (const numeric_error& e) {
            PyErr_SetString(numeric_exc.ptr(), e.what());
        }
    });
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Design-based survey indicators, linearization variances and "
              "two-sample pooling via aligned weights";
    m.attr("__version__") = version;
    register_exceptions(m);

    py::class_<PopulationFrame>(m, "PopulationFrame")
        .def_property_readonly("n_persons", &PopulationFrame::person_count)
        .def_property_readonly("n_households", &PopulationFrame::household_count)
        .def("incomes", &PopulationFrame::incomes)
        .def("aux", &PopulationFrame::aux_values)
        .def("household_sizes", &PopulationFrame::household_sizes)
        .def("aux_total", [](const PopulationFrame& frame) {
            double total = 0.0;
            for (const auto& p : frame.persons()) total += p.aux;
            return total;
        })
        .def("write_csv", [](const PopulationFrame& frame, const std::string& path,
                             const py::dict& columns) {
            write_population_csv(frame, path, columns_from_dict(columns));
        }, py::arg("path"), py::arg("columns") = py::dict());

    py::class_<SampleDraw>(m, "SampleDraw")
        .def_property_readonly("n", &SampleDraw::size)
        .def_property_readonly("n_households", &SampleDraw::household_count)
        .def_readonly("income", &SampleDraw::income)
        .def_readonly("aux", &SampleDraw::aux)
        .def_readonly("weight", &SampleDraw::weight)
        .def_readonly("pi", &SampleDraw::pi)
        .def_readonly("household", &SampleDraw::household);

    m.def("load_population",
          [](const std::string& path, const py::dict& columns) {
              return load_population(path, columns_from_dict(columns));
          },
          py::arg("path"), py::arg("columns") = py::dict(),
          "Load a person-level CSV grouped by household");

    m.def("synthetic_population",
          [](std::uint64_t seed, std::size_t households, double aux_correlation,
             double income_log_mean, double income_log_sd) {
              SyntheticConfig config;
              config.seed = seed;
              config.households = households;
              config.aux_correlation = aux_correlation;
              config.income_log_mean = income_log_mean;
              config.income_log_sd = income_log_sd;
              return generate_synthetic_population(config);
          },
          py::arg("seed") = 1, py::arg("households") = 6000,
          py::arg("aux_correlation") = 0.36, py::arg("income_log_mean") = 9.8,
          py::arg("income_log_sd") = 0.47,
          "Deterministic synthetic fallback population");

    m.def("population_truth",
          [](const PopulationFrame& frame, const std::string& kind) {
              return population_truth(frame, indicator_from_string(kind));
          },
          py::arg("frame"), py::arg("indicator"));

    m.def("aux_income_correlation", &aux_income_correlation, py::arg("frame"));

    m.def("draw_sample",
          [](const PopulationFrame& frame, std::size_t households, std::uint64_t seed,
             std::uint64_t replicate) {
              const TwoStageDesign design(frame.household_sizes(), households);
              return draw_sample(frame, design, seed, replicate);
          },
          py::arg("frame"), py::arg("households"), py::arg("seed"),
          py::arg("replicate") = 0);

    m.def("draw_two_disjoint_samples",
          [](const PopulationFrame& frame, std::size_t n1, std::size_t n2,
             std::uint64_t seed, std::uint64_t replicate) {
              const TwoStageDesign d1(frame.household_sizes(), n1);
              const TwoStageDesign d2(frame.household_sizes(), n2);
              return draw_two_disjoint_samples(frame, d1, d2, seed, replicate);
          },
          py::arg("frame"), py::arg("n1"), py::arg("n2"), py::arg("seed"),
          py::arg("replicate") = 0);

    m.def("indicator",
          [](const std::string& kind, std::vector<double> y, std::vector<double> w) {
              const WeightedSeries series(std::move(y), std::move(w));
              return indicator_to_dict(
                  compute_indicator(indicator_from_string(kind), series));
          },
          py::arg("kind"), py::arg("y"), py::arg("w"),
          "Weighted point estimate with extras and warnings");

    m.def("linearize",
          [](const std::string& kind, std::vector<double> y, std::vector<double> w) {
              const WeightedSeries series(std::move(y), std::move(w));
              return linearize(indicator_from_string(kind), series).z;
          },
          py::arg("kind"), py::arg("y"), py::arg("w"),
          "Plug-in linearized variable under the given weights");

    m.def("deville_variance",
          [](std::vector<double> z, const SampleDraw& draw, const std::string& path,
             const std::string& kind) {
              const LinearizedVariable lv{std::move(z), indicator_from_string(kind),
                                          WeightTag::design};
              const VarianceEstimate estimate = path == "naive"
                                                    ? deville_variance_naive(lv, draw)
                                                    : deville_variance_block(lv, draw);
              return clamped_variance(estimate);
          },
          py::arg("z"), py::arg("draw"), py::arg("path") = "block",
          py::arg("kind") = "median",
          "Design-based variance of the weighted total of z");

    m.def("greg_calibrate",
          [](const SampleDraw& draw, double population_size, double aux_total,
             double design_effect) {
              return greg_calibrate(draw,
                                    spec_for(draw, population_size, aux_total,
                                             design_effect));
          },
          py::arg("draw"), py::arg("population_size"), py::arg("aux_total"),
          py::arg("design_effect") = 1.0,
          "GREG weights calibrated on [intercept, aux]");

    m.def("align",
          [](const SampleDraw& s1, const SampleDraw& s2, std::vector<double> z1,
             std::vector<double> z2, double population_size, double aux_total,
             double d1, double d2) {
              const AlignmentResult r =
                  svypool::align(s1, spec_for(s1, population_size, aux_total, d1), z1,
                                 s2, spec_for(s2, population_size, aux_total, d2), z2);
              py::dict out;
              out["a1"] = r.a1;
              out["a2"] = r.a2;
              out["gamma"] = r.gamma;
              out["phi"] = r.phi;
              out["aligned_total"] = r.aligned_total;
              out["regression_estimate1"] = r.regression_estimate1;
              out["regression_estimate2"] = r.regression_estimate2;
              out["max_calibration_residual"] = r.max_calibration_residual;
              out["alignment_residual"] = r.alignment_residual;
              out["negative_weights"] =
                  py::make_tuple(r.negative_weights1, r.negative_weights2);
              return out;
          },
          py::arg("s1"), py::arg("s2"), py::arg("z1"), py::arg("z2"),
          py::arg("population_size"), py::arg("aux_total"), py::arg("d1") = 1.0,
          py::arg("d2") = 1.0,
          "One-step alignment of two samples on a common variable");

    m.def("pool",
          [](const SampleDraw& s1, const SampleDraw& s2, double population_size,
             double aux_total, const std::string& target, const std::string& weights,
             const std::string& combine) {
              const PooledEstimate p = svypool::pool(
                  s1, spec_for(s1, population_size, aux_total, 1.0),
                  s2, spec_for(s2, population_size, aux_total, 1.0),
                  indicator_from_string(target), weight_mode_from_string(weights),
                  combine_mode_from_string(combine));
              py::dict out;
              out["indicator"] = to_string(p.indicator);
              out["weight_mode"] = to_string(p.weight_mode);
              out["combine_mode"] = to_string(p.combine_mode);
              out["theta1"] = p.theta1;
              out["theta2"] = p.theta2;
              out["var1"] = p.var1;
              out["var2"] = p.var2;
              out["delta"] = p.delta;
              out["combined"] = p.combined;
              out["combined_var"] = p.combined_var;
              return out;
          },
          py::arg("s1"), py::arg("s2"), py::arg("population_size"),
          py::arg("aux_total"), py::arg("target"), py::arg("weights") = "sampling",
          py::arg("combine") = "simple",
          "Align, estimate per sample and combine one indicator");

    m.def("run_single_sample",
          [](const py::object& config, bool emit) {
              const ScenarioConfig scenario =
                  scenario_from_json(config_json_from_object(config));
              const SimulationReport report = run_single_sample(scenario);
              if (emit) emit_report(report, scenario.out_dir);
              return report_to_dict(report);
          },
          py::arg("config"), py::arg("emit") = true,
          "Single-sample Monte Carlo run from a JSON config (dict or string)");

    m.def("run_pooling_scenario",
          [](const py::object& config, bool emit) {
              const ScenarioConfig scenario =
                  scenario_from_json(config_json_from_object(config));
              const SimulationReport report = run_pooling_scenario(scenario);
              if (emit) emit_report(report, scenario.out_dir);
              return report_to_dict(report);
          },
          py::arg("config"), py::arg("emit") = true,
          "Two-sample pooling Monte Carlo run from a JSON config");
}
