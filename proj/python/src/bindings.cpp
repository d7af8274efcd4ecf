#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stefan/harness.hpp"

namespace py = pybind11;
using namespace stefan;

namespace {

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["mode"] = s.mode;
    d["event_count"] = s.event_count;
    d["step_count"] = s.step_count;
    d["min_gap"] = s.min_gap;
    d["tau"] = s.tau;
    d["dt"] = s.dt;
    d["t_end"] = s.t_end;
    d["final_s"] = s.final_s;
    d["final_s_error"] = s.final_s_error;
    d["min_h1"] = s.min_h1;
    d["min_h2"] = s.min_h2;
    d["min_h3"] = s.min_h3;
    d["min_h"] = s.min_h;
    d["max_s"] = s.max_s;
    d["min_sdot"] = s.min_sdot;
    d["Phi_ratio"] = s.Phi_ratio;
    d["energy_defect"] = s.energy_defect;
    d["converged"] = s.converged;
    d["safe_set_pass"] = s.safe_set_pass;
    d["dwell_pass"] = s.dwell_pass;
    d["wall_time"] = s.wall_time;
    return d;
}

py::dict trace_columns(const std::vector<TraceRecord>& trace) {
    py::dict out;
    const auto n = static_cast<py::ssize_t>(trace.size());
    auto column = [&](const char* name, double TraceRecord::*field) {
        py::array_t<double> a(n);
        auto v = a.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < n; ++i) v(i) = trace[static_cast<std::size_t>(i)].*field;
        out[name] = a;
    };
    column("t", &TraceRecord::t);
    column("s", &TraceRecord::s);
    column("qc", &TraceRecord::qc);
    column("U_applied", &TraceRecord::U_applied);
    column("U_star", &TraceRecord::U_star);
    column("h1", &TraceRecord::h1);
    column("h2", &TraceRecord::h2);
    column("h3", &TraceRecord::h3);
    column("h_min", &TraceRecord::h_min);
    column("sdot", &TraceRecord::sdot);
    column("V", &TraceRecord::V);
    column("Vh", &TraceRecord::Vh);
    column("Vbar", &TraceRecord::Vbar);
    column("Phi", &TraceRecord::Phi);
    py::array_t<bool> flags(n);
    auto f = flags.mutable_unchecked<1>();
    for (py::ssize_t i = 0; i < n; ++i) f(i) = trace[static_cast<std::size_t>(i)].event_flag;
    out["event_flag"] = flags;
    return out;
}

py::list event_list(const EventLog& log) {
    py::list out;
    for (const auto& e : log) out.append(py::make_tuple(e.t_j, e.U_held, std::string(to_string(e.side))));
    return out;
}

ControlMode parse_mode(const std::string& mode) {
    if (mode == "etc") return ControlMode::etc;
    if (mode == "continuous") return ControlMode::continuous;
    throw py::value_error("mode must be 'etc' or 'continuous'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Event-triggered safe boundary control of the one-phase Stefan problem";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<PlantParams>(m, "PlantParams")
        .def(py::init<double, double, double, double, double>(), py::arg("alpha"), py::arg("beta"),
             py::arg("k"), py::arg("L"), py::arg("T_m"))
        .def_readwrite("alpha", &PlantParams::alpha)
        .def_readwrite("beta", &PlantParams::beta)
        .def_readwrite("k", &PlantParams::k)
        .def_readwrite("L", &PlantParams::L)
        .def_readwrite("T_m", &PlantParams::T_m);

    py::class_<ControllerGains>(m, "ControllerGains")
        .def(py::init([](double c1, double c2, double delta1, double delta2) {
                 return ControllerGains{c1, c2, delta1, delta2};
             }),
             py::arg("c1") = 3.2e-3, py::arg("c2") = 5e-3, py::arg("delta1") = 10.0, py::arg("delta2") = 0.3)
        .def_readwrite("c1", &ControllerGains::c1)
        .def_readwrite("c2", &ControllerGains::c2)
        .def_readwrite("delta1", &ControllerGains::delta1)
        .def_readwrite("delta2", &ControllerGains::delta2)
        .def_property_readonly("mu1", &ControllerGains::mu1)
        .def_property_readonly("cbar1", &ControllerGains::cbar1)
        .def_property_readonly("cbar2", &ControllerGains::cbar2)
        .def("violations", &ControllerGains::violations);

    m.def(
        "min_dwell_time",
        [](const ControllerGains& g) {
            const auto d = min_dwell_time(g);
            return py::make_tuple(d.tau, d.tau1, d.tau2);
        },
        py::arg("gains"), "Returns (tau, tau1, tau2).");

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_static("parse", &parse_config, py::arg("text"))
        .def_static("load", &load_config, py::arg("path"))
        .def(
            "set", [](ScenarioConfig& c, const std::string& k, const std::string& v) { apply_setting(c, k, v); },
            py::arg("key"), py::arg("value"))
        .def("to_text", [](const ScenarioConfig& c) { return to_config_text(c); })
        .def("validate",
             [](const ScenarioConfig& c) {
                 std::vector<std::string> out;
                 for (const auto& v : validate(c)) out.push_back(v.name + ": " + v.detail);
                 return out;
             })
        .def_readwrite("plant", &ScenarioConfig::plant)
        .def_readwrite("gains", &ScenarioConfig::gains)
        .def_readwrite("s0", &ScenarioConfig::s0)
        .def_property(
            "s_r", [](const ScenarioConfig& c) { return c.setpoint.s_r; },
            [](ScenarioConfig& c, double v) { c.setpoint.s_r = v; })
        .def_property_readonly("dt", &ScenarioConfig::resolved_dt)
        .def_property_readonly("t_final", &ScenarioConfig::resolved_t_final)
        .def_property_readonly("epsilon", &ScenarioConfig::resolved_epsilon);

    m.def(
        "simulate",
        [](const ScenarioConfig& cfg, const std::string& mode) {
            require_valid(cfg);
            const ControlMode cm = parse_mode(mode);
            RunResult result;
            {
                py::gil_scoped_release release;
                result = run(cfg, cm == ControlMode::etc ? make_etc_callback(cfg.gains)
                                                         : make_continuous_callback(cfg.gains));
            }
            py::dict out;
            out["trace"] = trace_columns(result.trace);
            out["events"] = event_list(result.events);
            out["summary"] = summary_dict(summarize(cfg, result, cm));
            return out;
        },
        py::arg("config"), py::arg("mode") = "etc",
        "Runs a scenario in memory; returns {'trace': columns, 'events': [(t_j, U, side)], 'summary': {...}}.");

    m.def(
        "run_scenario",
        [](const ScenarioConfig& cfg, const std::filesystem::path& out, const std::string& mode) {
            const ControlMode cm = parse_mode(mode);
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_scenario(cfg, out, cm);
            }
            return summary_dict(s);
        },
        py::arg("config"), py::arg("out_dir"), py::arg("mode") = "etc",
        "Runs a scenario and writes trace.csv, events.csv, diagnostics.csv, config.cfg, summary.json.");

    m.def(
        "sweep",
        [](const ScenarioConfig& base, const std::string& grid, const std::filesystem::path& out, unsigned jobs) {
            const auto parsed = parse_grid(grid);
            std::vector<SweepCell> cells;
            {
                py::gil_scoped_release release;
                cells = sweep(base, parsed, out, jobs);
            }
            py::list result;
            for (const auto& c : cells) {
                py::dict d;
                d["name"] = c.name;
                d["settings"] = c.settings;
                d["summary"] = c.summary ? py::object(summary_dict(*c.summary)) : py::none();
                d["error_kind"] = c.error_kind;
                d["error"] = c.error;
                result.append(d);
            }
            return result;
        },
        py::arg("config"), py::arg("grid"), py::arg("out_dir"), py::arg("jobs") = 1);

    m.def(
        "audit",
        [](const std::filesystem::path& dir) {
            const auto r = audit_directory(dir);
            py::list checks;
            for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.pass, c.detail));
            return py::make_tuple(r.pass(), checks);
        },
        py::arg("run_dir"), "Returns (all_passed, [(name, passed, detail)]).");

    m.def("read_trace", [](const std::filesystem::path& p) { return trace_columns(read_trace_csv(p)); },
          py::arg("path"));

    m.def(
        "forward_transform",
        [](const std::vector<double>& h, double s, double X, const PlantParams& p, double c1, double eps) {
            return forward_transform(h, s, X, make_backstepping(p, c1, eps), p);
        },
        py::arg("h"), py::arg("s"), py::arg("X"), py::arg("params"), py::arg("c1"), py::arg("epsilon"));
    m.def(
        "inverse_transform",
        [](const std::vector<double>& w, double s, double X, const PlantParams& p, double c1, double eps) {
            return inverse_transform(w, s, X, make_backstepping(p, c1, eps), p);
        },
        py::arg("w"), py::arg("s"), py::arg("X"), py::arg("params"), py::arg("c1"), py::arg("epsilon"));
    m.def("default_epsilon", &default_epsilon, py::arg("params"), py::arg("c1"));

    m.attr("__version__") = "0.1.0";
}
