#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "bifbm/errors.hpp"
#include "bifbm/estimators.hpp"
#include "bifbm/harness.hpp"
#include "bifbm/kernel.hpp"
#include "bifbm/localtime.hpp"
#include "bifbm/sampler.hpp"

namespace py = pybind11;
using namespace bifbm;

namespace {

// Integrands from Python: a catalog name ("square", "abs-shift(0.5)", ...) or a StepFunction.
using Integrand = std::variant<StepFunction, std::string>;

template <class Op>
EstimateReport with_integrand(const Integrand& f, Op op) {
    if (const auto* step = std::get_if<StepFunction>(&f)) return op(*step);
    const auto spec = harness::parse_function(std::get<std::string>(f));
    if (spec.kind == harness::FunctionSpec::Kind::step) {
        throw DomainError("pass a StepFunction object instead of the name 'step'");
    }
    return op(spec.function());
}

EstimatorConfig estimator(std::size_t epsilon_steps, std::vector<double> eval_times) {
    return EstimatorConfig{epsilon_steps, std::move(eval_times)};
}

py::array_t<double> to_array(std::span<const double> v, std::vector<py::ssize_t> shape) {
    py::array_t<double> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_bifbm, m) {
    m.doc() = "Bi-fractional Brownian motion: exact sampling, pathwise estimators and identity checks.";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<double, double>(), py::arg("H"), py::arg("K"))
        .def_static("unconstrained", &ModelParams::unconstrained, py::arg("H"), py::arg("K"))
        .def_static("from_hurst", &ModelParams::from_hurst, py::arg("H"))
        .def_property_readonly("H", &ModelParams::H)
        .def_property_readonly("K", &ModelParams::K)
        .def_property_readonly("is_critical", &ModelParams::is_critical)
        .def_property_readonly("qv_constant", &ModelParams::qv_constant)
        .def_property_readonly("ito_constant", &ModelParams::ito_constant)
        .def_property_readonly("skorohod_correction", &ModelParams::skorohod_correction)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream s;
            s << "ModelParams(H=" << p.H() << ", K=" << p.K() << ")";
            return s.str();
        });

    py::class_<StepFunction>(m, "StepFunction")
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("breakpoints"), py::arg("levels"))
        .def_static("indicator", &StepFunction::indicator, py::arg("a"), py::arg("b"))
        .def("__call__", &StepFunction::operator(), py::arg("x"))
        .def_property_readonly("breakpoints",
                               [](const StepFunction& f) { return std::vector<double>(f.breakpoints().begin(), f.breakpoints().end()); })
        .def_property_readonly("levels",
                               [](const StepFunction& f) { return std::vector<double>(f.levels().begin(), f.levels().end()); });

    // kernel
    m.def("covariance", &covariance, py::arg("params"), py::arg("s"), py::arg("t"));
    m.def("increment_covariance", &increment_covariance, py::arg("params"), py::arg("s"), py::arg("t"),
          py::arg("s2"), py::arg("t2"));
    m.def(
        "moments",
        [](const ModelParams& p, double s, double r) {
            const auto mo = moments(p, s, r);
            return py::dict(py::arg("mu") = mo.mu, py::arg("rho2") = mo.rho2, py::arg("s") = mo.s, py::arg("r") = mo.r);
        },
        py::arg("params"), py::arg("s"), py::arg("r"));
    m.def("heat_kernel", &heat_kernel, py::arg("s"), py::arg("x"));
    m.def("hnorm", py::overload_cast<const StepFunction&, double>(&hnorm), py::arg("f"), py::arg("T"));
    m.def(
        "lemma_scan",
        [](const ModelParams& p, std::size_t samples, std::uint64_t seed, double T) {
            const auto rep = lemma_scan(p, samples, seed, T);
            py::dict checks;
            for (const auto& c : rep.checks) {
                checks[py::str(c.name)] =
                    py::dict(py::arg("constant") = c.constant, py::arg("lower_bound") = c.lower_bound,
                             py::arg("samples") = c.samples, py::arg("violations") = c.violations,
                             py::arg("min_ratio") = c.min_ratio, py::arg("max_ratio") = c.max_ratio);
            }
            return py::dict(py::arg("total_violations") = rep.total_violations(), py::arg("checks") = checks);
        },
        py::arg("params"), py::arg("samples"), py::arg("seed"), py::arg("T") = 1.0);
    m.def("elementary_inequality_check", &elementary_inequality_check, py::arg("alpha"), py::arg("beta"),
          py::arg("grid"));

    // sampler
    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, std::size_t, std::size_t>(), py::arg("T"), py::arg("steps"), py::arg("pad") = 0)
        .def_property_readonly("T", &TimeGrid::horizon)
        .def_property_readonly("steps", &TimeGrid::steps)
        .def_property_readonly("pad", &TimeGrid::pad)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def("__len__", &TimeGrid::size)
        .def_property_readonly("nodes", [](const TimeGrid& g) {
            std::vector<double> t(g.size());
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.node(i);
            return t;
        });

    py::class_<PathBatch>(m, "PathBatch")
        .def_property_readonly("grid", &PathBatch::grid)
        .def_property_readonly("params", &PathBatch::params)
        .def_property_readonly("seed", &PathBatch::seed)
        .def_property_readonly("n_paths", &PathBatch::n_paths)
        .def_property_readonly("values", [](const PathBatch& b) {
            return to_array(b.values(), {static_cast<py::ssize_t>(b.n_paths()), static_cast<py::ssize_t>(b.grid().size())});
        });

    m.def(
        "sample_paths",
        [](const ModelParams& p, const TimeGrid& g, std::size_t n, std::uint64_t seed) {
            py::gil_scoped_release release;
            return sample_paths(p, g, n, seed);
        },
        py::arg("params"), py::arg("grid"), py::arg("n_paths"), py::arg("seed"));

    // estimators
    py::class_<EstimateReport>(m, "EstimateReport")
        .def_readonly("label", &EstimateReport::label)
        .def_property_readonly("t", [](const EstimateReport& r) {
            std::vector<double> v;
            for (const auto& row : r.rows) v.push_back(row.t);
            return v;
        })
        .def_property_readonly("mean", [](const EstimateReport& r) {
            std::vector<double> v;
            for (const auto& row : r.rows) v.push_back(row.mean);
            return v;
        })
        .def_property_readonly("stderr", [](const EstimateReport& r) {
            std::vector<double> v;
            for (const auto& row : r.rows) v.push_back(row.std_error);
            return v;
        })
        .def_property_readonly("samples", [](const EstimateReport& r) {
            const auto rows = static_cast<py::ssize_t>(r.samples.size());
            const auto cols = static_cast<py::ssize_t>(r.samples.empty() ? 0 : r.samples[0].size());
            py::array_t<double> out({rows, cols});
            auto* dst = out.mutable_data();
            for (const auto& s : r.samples) dst = std::copy(s.begin(), s.end(), dst);
            return out;
        });

    const auto eps = py::arg("epsilon_steps") = 16;
    const auto times = py::arg("eval_times") = std::vector<double>{1.0};

    m.def(
        "quadratic_variation",
        [](const PathBatch& b, std::size_t m_, std::vector<double> t) { return quadratic_variation(b, estimator(m_, t)); },
        py::arg("batch"), eps, times);
    m.def(
        "quadratic_covariation",
        [](const Integrand& f, const PathBatch& b, std::size_t m_, std::vector<double> t) {
            const auto cfg = estimator(m_, t);
            return with_integrand(f, [&](const auto& g) { return quadratic_covariation(g, b, cfg); });
        },
        py::arg("f"), py::arg("batch"), eps, times);
    m.def(
        "forward_integral",
        [](const Integrand& f, const PathBatch& b, std::size_t m_, std::vector<double> t) {
            const auto cfg = estimator(m_, t);
            return with_integrand(f, [&](const auto& g) { return forward_integral(g, b, cfg); });
        },
        py::arg("f"), py::arg("batch"), eps, times);
    m.def(
        "backward_integral",
        [](const Integrand& f, const PathBatch& b, std::size_t m_, std::vector<double> t) {
            const auto cfg = estimator(m_, t);
            return with_integrand(f, [&](const auto& g) { return backward_integral(g, b, cfg); });
        },
        py::arg("f"), py::arg("batch"), eps, times);
    m.def(
        "skorohod_integral",
        [](const Integrand& f, const PathBatch& b, std::size_t m_, std::vector<double> t) {
            const auto cfg = estimator(m_, t);
            return with_integrand(f, [&](const auto& g) { return skorohod_integral(g, b, cfg); });
        },
        py::arg("f"), py::arg("batch"), eps, times);
    m.def(
        "smooth_reference",
        [](const std::string& f, const PathBatch& b, std::vector<double> t) {
            return smooth_reference(harness::parse_function(f).function(), b, t);
        },
        py::arg("f"), py::arg("batch"), times);
    m.def(
        "ito_residual",
        [](const std::string& F, const PathBatch& b, std::size_t m_, std::vector<double> t, const std::string& mode) {
            if (mode != "forward" && mode != "skorohod") throw DomainError("mode must be 'forward' or 'skorohod'");
            const auto spec = harness::parse_function(F);
            return ito_residual(spec.function(), spec.derivative(), b, estimator(m_, t),
                                mode == "forward" ? ItoMode::forward : ItoMode::skorohod);
        },
        py::arg("F"), py::arg("batch"), eps, times, py::arg("mode") = "forward");

    // localtime
    py::class_<LocalTimeField>(m, "LocalTimeField")
        .def_property_readonly("space_grid", [](const LocalTimeField& f) {
            return std::vector<double>(f.space_grid().begin(), f.space_grid().end());
        })
        .def_property_readonly("eval_times", [](const LocalTimeField& f) {
            return std::vector<double>(f.eval_times().begin(), f.eval_times().end());
        })
        .def_property_readonly("bandwidth", &LocalTimeField::bandwidth)
        .def_property_readonly("values", [](const LocalTimeField& f) {
            py::array_t<double> out({static_cast<py::ssize_t>(f.n_paths()), static_cast<py::ssize_t>(f.eval_times().size()),
                                     static_cast<py::ssize_t>(f.space_grid().size())});
            auto* dst = out.mutable_data();
            for (std::size_t p = 0; p < f.n_paths(); ++p) {
                for (std::size_t e = 0; e < f.eval_times().size(); ++e) {
                    const auto row = f.slice(p, e);
                    dst = std::copy(row.begin(), row.end(), dst);
                }
            }
            return out;
        })
        .def("mass", &LocalTimeField::mass, py::arg("path"), py::arg("e"));

    m.def(
        "local_time",
        [](const PathBatch& b, std::vector<double> t, std::optional<std::vector<double>> x, std::optional<double> h,
           const std::string& kernel) {
            if (kernel != "boxcar" && kernel != "gaussian") throw DomainError("kernel must be 'boxcar' or 'gaussian'");
            const auto grid = x ? *x : default_space_grid(b.grid().horizon());
            return local_time(b, grid, t, h.value_or(default_bandwidth(b.grid(), grid)),
                              kernel == "boxcar" ? LocalTimeKernel::boxcar : LocalTimeKernel::gaussian);
        },
        py::arg("batch"), times, py::arg("space_grid") = py::none(), py::arg("bandwidth") = py::none(),
        py::arg("kernel") = "boxcar");
    m.def("integral_wrt_localtime", &integral_wrt_localtime, py::arg("f"), py::arg("field"), py::arg("t"));
    m.def(
        "occupation_check",
        [](const PathBatch& b, const LocalTimeField& field, const std::string& psi, double t) {
            return occupation_check(b, field, harness::parse_function(psi).function(), t);
        },
        py::arg("batch"), py::arg("field"), py::arg("psi"), py::arg("t"));
    m.def(
        "bouleau_yor_residual",
        [](const StepFunction& f, const PathBatch& b, const LocalTimeField& field, std::size_t m_, std::vector<double> t) {
            return bouleau_yor_residual(f, b, estimator(m_, t), field);
        },
        py::arg("f"), py::arg("batch"), py::arg("field"), eps, times);
    m.def(
        "tanaka_residual",
        [](const PathBatch& b, const LocalTimeField& field, double x, std::size_t m_, std::vector<double> t) {
            return tanaka_residual(b, estimator(m_, t), field, x);
        },
        py::arg("batch"), py::arg("field"), py::arg("x"), eps, times);
    m.def("mollifier_constant", &MollifierFamily::normalizing_constant);
    m.def(
        "mollify",
        [](const StepFunction& f, std::size_t n, std::vector<double> x) {
            const auto fn = mollify(f, n);
            std::vector<double> out;
            for (double v : x) out.push_back(fn(v));
            return out;
        },
        py::arg("f"), py::arg("n"), py::arg("x"));
    m.def("mollifier_gap", &mollifier_gap, py::arg("f"), py::arg("n"), py::arg("T") = 1.0);

    // harness
    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::string& format, bool with_timestamp) {
            if (format != "csv" && format != "json") throw DomainError("format must be 'csv' or 'json'");
            const auto cfg = harness::parse_config(config_text);
            harness::RunReport report;
            {
                py::gil_scoped_release release;
                report = harness::run_experiment(cfg);
            }
            const auto fmt = format == "json" ? harness::OutputFormat::json : harness::OutputFormat::csv;
            return py::make_tuple(harness::emit_report(report, fmt, with_timestamp), report.all_pass());
        },
        py::arg("config_text"), py::arg("format") = "csv", py::arg("with_timestamp") = false,
        "Run an experiment from `key = value` config text; returns (report text, all targets pass).");
    m.def(
        "canonical_config", [](const std::string& text) { return harness::parse_config(text).to_text(); },
        py::arg("config_text"));
}
