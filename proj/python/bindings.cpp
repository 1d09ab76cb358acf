// pybind11 module exposing the main operations: the maps and fields, the
// Lyapunov protocols, the geometric diagnostics and the sweep runner.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "shearchaos/analysis.hpp"
#include "shearchaos/integrators.hpp"
#include "shearchaos/lyapunov.hpp"
#include "shearchaos/sweep.hpp"

namespace py = pybind11;
using namespace shearchaos;

namespace {

py::tuple mat_tuple(const Mat2& m) {
    return py::make_tuple(m.a11, m.a12, m.a21, m.a22);
}

Mat2 mat_from(const py::sequence& s) {
    if (py::len(s) != 4) throw py::value_error("expected 4 matrix entries (row major)");
    return {s[0].cast<double>(), s[1].cast<double>(), s[2].cast<double>(),
            s[3].cast<double>()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "shear-induced chaos toolkit: maps, SDE protocols, diagnostics, sweeps";

    // ------------------------------------------------------------------ types
    py::class_<models::CylinderState>(m, "CylinderState")
        .def(py::init<double, double>(), py::arg("theta") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("theta", &models::CylinderState::theta)
        .def_readwrite("y", &models::CylinderState::y)
        .def("__repr__", [](const models::CylinderState& s) {
            std::ostringstream os;
            os << "CylinderState(theta=" << s.theta << ", y=" << s.y << ")";
            return os.str();
        });

    py::class_<models::TorusState>(m, "TorusState")
        .def(py::init<double, double>(), py::arg("theta1") = 0.0, py::arg("theta2") = 0.0)
        .def_readwrite("theta1", &models::TorusState::theta1)
        .def_readwrite("theta2", &models::TorusState::theta2)
        .def("__repr__", [](const models::TorusState& s) {
            std::ostringstream os;
            os << "TorusState(theta1=" << s.theta1 << ", theta2=" << s.theta2 << ")";
            return os.str();
        });

    py::class_<models::ShearParams>(m, "ShearParams")
        .def(py::init<double, double, double, double>(), py::arg("sigma"),
             py::arg("lambda_"), py::arg("A") = 0.0, py::arg("T") = 1.0)
        .def_readwrite("sigma", &models::ShearParams::sigma)
        .def_readwrite("lambda_", &models::ShearParams::lambda)
        .def_readwrite("A", &models::ShearParams::A)
        .def_readwrite("T", &models::ShearParams::T);

    py::enum_<models::NoiseMode>(m, "NoiseMode")
        .value("degenerate", models::NoiseMode::degenerate)
        .value("isotropic", models::NoiseMode::isotropic)
        .value("additive", models::NoiseMode::additive);

    py::class_<models::NoiseConfig>(m, "NoiseConfig")
        .def(py::init<models::NoiseMode, double, double>(),
             py::arg("mode") = models::NoiseMode::degenerate, py::arg("amplitude") = 0.0,
             py::arg("dt") = 1e-4)
        .def_readwrite("mode", &models::NoiseConfig::mode)
        .def_readwrite("amplitude", &models::NoiseConfig::amplitude)
        .def_readwrite("dt", &models::NoiseConfig::dt);

    py::class_<models::OscParams>(m, "OscParams")
        .def(py::init([](double nu1, double nu2, double a_ff, double a_fb) {
                 models::OscParams p;
                 p.nu1 = nu1;
                 p.nu2 = nu2;
                 p.a_ff = a_ff;
                 p.a_fb = a_fb;
                 return p;
             }),
             py::arg("nu1") = 1.0, py::arg("nu2") = 1.1, py::arg("a_ff") = 1.0,
             py::arg("a_fb") = 1.4)
        .def_readwrite("nu1", &models::OscParams::nu1)
        .def_readwrite("nu2", &models::OscParams::nu2)
        .def_readwrite("a_ff", &models::OscParams::a_ff)
        .def_readwrite("a_fb", &models::OscParams::a_fb)
        .def_readwrite("pulse_halfwidth", &models::OscParams::pulse_halfwidth);

    py::class_<lyapunov::LyapEstimate>(m, "LyapEstimate")
        .def_readonly("value", &lyapunov::LyapEstimate::value)
        .def_readonly("n_steps", &lyapunov::LyapEstimate::n_steps)
        .def_readonly("excursion_fraction", &lyapunov::LyapEstimate::excursion_fraction)
        .def_readonly("ever_exceeded", &lyapunov::LyapEstimate::ever_exceeded)
        .def_readonly("seed", &lyapunov::LyapEstimate::seed);

    py::class_<lyapunov::ProtocolResult>(m, "ProtocolResult")
        .def_readonly("upper", &lyapunov::ProtocolResult::upper)
        .def_readonly("lower", &lyapunov::ProtocolResult::lower)
        .def_readonly("runs", &lyapunov::ProtocolResult::runs)
        .def_readonly("flagged", &lyapunov::ProtocolResult::flagged);

    // ------------------------------------------------------------------- maps
    m.def(
        "shear_flow_map",
        [](const models::CylinderState& s, double t, const models::ShearParams& p) {
            return models::shear_flow_map(s, t, p);
        },
        py::arg("state"), py::arg("t"), py::arg("params"));
    m.def(
        "shear_flow_jacobian",
        [](double t, const models::ShearParams& p) {
            return mat_tuple(models::shear_flow_jacobian(t, p));
        },
        py::arg("t"), py::arg("params"), "row-major (a11, a12, a21, a22)");
    m.def(
        "kick_map_sine",
        [](const models::CylinderState& s, double amplitude) {
            const auto r = models::kick_map_sine(s, amplitude);
            return py::make_tuple(r.state, mat_tuple(r.jacobian));
        },
        py::arg("state"), py::arg("amplitude"));
    m.def(
        "kicked_time_T_map",
        [](const models::CylinderState& s, const models::ShearParams& p) {
            const auto r = models::kicked_time_T_map(s, p);
            return py::make_tuple(r.state, mat_tuple(r.jacobian));
        },
        py::arg("state"), py::arg("params"));
    m.def(
        "sample_kick_schedule",
        [](double mean_interval, double base_amplitude, double horizon,
           std::uint64_t seed) {
            RngStream rng(seed);
            const auto events = models::sample_kick_schedule(
                models::PoissonKickLaw{mean_interval, base_amplitude}, horizon, rng);
            std::vector<std::pair<double, double>> out;
            out.reserve(events.size());
            for (const auto& ev : events) out.emplace_back(ev.time, ev.amplitude);
            return out;
        },
        py::arg("mean_interval"), py::arg("base_amplitude"), py::arg("horizon"),
        py::arg("seed"));
    m.def(
        "osc_vector_field",
        [](const models::TorusState& s, const models::OscParams& p, double input) {
            const auto v = models::osc_vector_field(s, p, input);
            return py::make_tuple(v.d1, v.d2);
        },
        py::arg("state"), py::arg("params"), py::arg("input") = 0.0);
    m.def("osc_kick_map", &models::osc_kick_map, py::arg("state"), py::arg("A"));
    m.def("osc_kick_phase", &models::osc_kick_phase, py::arg("theta"), py::arg("A"));
    m.def("pulse_bump", &models::pulse_bump, py::arg("theta"), py::arg("halfwidth") = 0.05);
    m.def("phase_sensitivity", &models::phase_sensitivity, py::arg("theta"));

    // -------------------------------------------------------------- protocols
    m.def(
        "protocol_kicked",
        [](const models::ShearParams& p, std::uint64_t seed, int runs, long long steps,
           int threads) {
            lyapunov::KickedProtocolOptions opts;
            opts.n_runs = runs;
            opts.n_steps = steps;
            opts.threads = threads;
            return lyapunov::protocol_kicked(p, seed, opts);
        },
        py::arg("params"), py::arg("seed"), py::arg("runs") = 10,
        py::arg("steps") = 400000, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "protocol_sde",
        [](const models::ShearParams& p, const models::NoiseConfig& n, double horizon,
           std::uint64_t seed, int threads) {
            lyapunov::SdeProtocolOptions opts;
            opts.threads = threads;
            return lyapunov::protocol_sde(p, n, horizon, seed, opts);
        },
        py::arg("params"), py::arg("noise"), py::arg("horizon"), py::arg("seed"),
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def(
        "protocol_poisson",
        [](const models::ShearParams& p, double horizon, std::uint64_t seed, int runs,
           int threads) {
            lyapunov::PoissonProtocolOptions opts;
            opts.n_runs = runs;
            opts.threads = threads;
            return lyapunov::protocol_poisson(p, horizon, seed, opts);
        },
        py::arg("params"), py::arg("horizon"), py::arg("seed"), py::arg("runs") = 10,
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def(
        "protocol_sde_osc",
        [](const models::OscParams& p, double amplitude, double dt, double horizon,
           std::uint64_t seed, int threads) {
            lyapunov::SdeProtocolOptions opts;
            opts.threads = threads;
            return lyapunov::protocol_sde_osc(p, amplitude, dt, horizon, seed, opts);
        },
        py::arg("params"), py::arg("amplitude"), py::arg("dt"), py::arg("horizon"),
        py::arg("seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "protocol_kicked_osc",
        [](const models::OscParams& p, double A, double T, std::uint64_t seed, int runs,
           long long steps, double rk4_dt, int threads) {
            lyapunov::OscKickProtocolOptions opts;
            opts.n_runs = runs;
            opts.n_steps = steps;
            opts.rk4_dt = rk4_dt;
            opts.threads = threads;
            return lyapunov::protocol_kicked_osc(p, A, T, seed, opts);
        },
        py::arg("params"), py::arg("A"), py::arg("T"), py::arg("seed"),
        py::arg("runs") = 10, py::arg("steps") = 400000, py::arg("rk4_dt") = 1e-3,
        py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    // ------------------------------------------------------------ diagnostics
    m.def(
        "singular_limit_map",
        [](double theta, double drift, double gain) {
            return analysis::singular_limit_map(
                theta, analysis::CircleMapProfile::sine(drift, gain));
        },
        py::arg("theta"), py::arg("drift"), py::arg("gain"));
    m.def(
        "classify_regime",
        [](double gain, double threshold) {
            return std::string(analysis::regime_name(analysis::classify_regime(
                analysis::CircleMapProfile::sine(0.0, gain), threshold)));
        },
        py::arg("gain"), py::arg("threshold") = 0.5);
    m.def(
        "rotation_number",
        [](const models::OscParams& p, int n_returns) {
            return analysis::rotation_number(p, n_returns);
        },
        py::arg("params"), py::arg("n_returns") = 400,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "most_contracted_direction",
        [](const py::sequence& j) {
            const auto cd = analysis::most_contracted_direction(mat_from(j));
            return py::make_tuple(py::make_tuple(cd.direction.d1, cd.direction.d2),
                                  cd.singular_ratio, cd.degenerate);
        },
        py::arg("jacobian"),
        "jacobian as (a11, a12, a21, a22); returns ((d1, d2), ratio, degenerate)");

    // ------------------------------------------------------------------ sweep
    py::class_<sweep::SweepResultRow>(m, "SweepResultRow")
        .def_readonly("params", &sweep::SweepResultRow::params)
        .def_readonly("lyap_upper", &sweep::SweepResultRow::lyap_upper)
        .def_readonly("lyap_lower", &sweep::SweepResultRow::lyap_lower)
        .def_readonly("lyap_per_time", &sweep::SweepResultRow::lyap_per_time)
        .def_readonly("excursion_fraction", &sweep::SweepResultRow::excursion_fraction)
        .def_readonly("excursion_flag", &sweep::SweepResultRow::excursion_flag)
        .def_readonly("n_steps", &sweep::SweepResultRow::n_steps)
        .def_readonly("seed", &sweep::SweepResultRow::seed)
        .def_readonly("failed", &sweep::SweepResultRow::failed)
        .def_readonly("error", &sweep::SweepResultRow::error)
        .def_property_readonly("model", [](const sweep::SweepResultRow& r) {
            return std::string(sweep::model_name(r.model));
        });

    m.def(
        "run_sweep",
        [](const std::string& config_text) {
            return sweep::run_sweep(sweep::parse_config(config_text));
        },
        py::arg("config_text"), py::call_guard<py::gil_scoped_release>(),
        "parse a config (key=value text) and evaluate the grid");
    m.def(
        "sweep_csv",
        [](const std::vector<sweep::SweepResultRow>& rows) {
            std::ostringstream os;
            sweep::emit_csv(rows, os);
            return os.str();
        },
        py::arg("rows"));
}
