#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "surfchaos/acceptance.hpp"
#include "surfchaos/errors.hpp"
#include "surfchaos/inner.hpp"
#include "surfchaos/manifolds.hpp"
#include "surfchaos/model.hpp"
#include "surfchaos/separatrix.hpp"

namespace py = pybind11;
using namespace surfchaos;

PYBIND11_MODULE(_surfchaos, m) {
    m.doc() = "Numerical core of surfchaos";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SignalBelowNoise>(m, "SignalBelowNoise", base.ptr());
    py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());

    py::class_<CorrugationSeries>(m, "CorrugationSeries")
        .def(py::init([](std::vector<double> r, std::vector<double> s) {
                 if (s.empty()) s.assign(r.size(), 0.0);
                 CorrugationSeries c{std::move(r), std::move(s)};
                 c.validate();
                 return c;
             }),
             py::arg("cosines"), py::arg("sines") = std::vector<double>{})
        .def_static("physical", &CorrugationSeries::physical)
        .def_readonly("cosines", &CorrugationSeries::cosines)
        .def_readonly("sines", &CorrugationSeries::sines)
        .def("value", &CorrugationSeries::value)
        .def("derivative", &CorrugationSeries::derivative)
        .def("primitive", &CorrugationSeries::primitive)
        .def("coefficient", &CorrugationSeries::coefficient);

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init<>())
        .def_readwrite("D", &PhysicalParams::D)
        .def_readwrite("a", &PhysicalParams::a)
        .def_readwrite("alpha", &PhysicalParams::alpha)
        .def_readwrite("m", &PhysicalParams::m)
        .def_readwrite("corrugation", &PhysicalParams::corrugation);

    py::class_<ModelParams>(m, "ModelParams")
        .def_static("from_nuI0", &ModelParams::from_nuI0, py::arg("nuI0"), py::arg("epsilon") = 1.0,
                    py::arg("physical") = PhysicalParams{})
        .def_static("from_I0", &ModelParams::from_I0, py::arg("I0"), py::arg("epsilon") = 1.0,
                    py::arg("physical") = PhysicalParams{})
        .def_readonly("physical", &ModelParams::physical)
        .def_readonly("nu", &ModelParams::nu)
        .def_readonly("I0", &ModelParams::I0)
        .def_readonly("epsilon", &ModelParams::epsilon)
        .def_property_readonly("nuI0", &ModelParams::nuI0);

    py::class_<CartesianState>(m, "CartesianState")
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("z"), py::arg("px"), py::arg("pz"))
        .def_readwrite("x", &CartesianState::x)
        .def_readwrite("z", &CartesianState::z)
        .def_readwrite("px", &CartesianState::px)
        .def_readwrite("pz", &CartesianState::pz);

    py::class_<McGeheeState>(m, "McGeheeState")
        .def(py::init<double, double, double, double>(), py::arg("q"), py::arg("p"), py::arg("theta"), py::arg("J"))
        .def_readwrite("q", &McGeheeState::q)
        .def_readwrite("p", &McGeheeState::p)
        .def_readwrite("theta", &McGeheeState::theta)
        .def_readwrite("J", &McGeheeState::J);

    m.def("to_mcgehee", &to_mcgehee);
    m.def("from_mcgehee", &from_mcgehee);
    m.def("hamiltonian_cartesian", &hamiltonian_cartesian);
    m.def("hamiltonian_mcgehee", [](const McGeheeState& s, const ModelParams& p) {
        const auto h = hamiltonian_mcgehee(s, p);
        return py::make_tuple(h.H0, h.H1, h.H);
    });
    m.def("separatrix", [](double u) { return py::make_tuple(q_h(u), p_h(u)); });

    m.def("melnikov_closed", [](int k, double nuI0, const CorrugationSeries& s) {
        return melnikov_coeff_closed(k, nuI0, s).value;
    });
    m.def(
        "melnikov_quadrature",
        [](int k, double nuI0, const CorrugationSeries& s, double rel_tol) {
            return melnikov_coeff_quadrature(k, nuI0, s, rel_tol).value;
        },
        py::arg("k"), py::arg("nuI0"), py::arg("series"), py::arg("rel_tol") = 1e-9);

    py::class_<SplittingSample>(m, "SplittingSample")
        .def_readonly("nuI0", &SplittingSample::nuI0)
        .def_readonly("u", &SplittingSample::u)
        .def_readonly("k", &SplittingSample::k)
        .def_readonly("ampJ", &SplittingSample::ampJ)
        .def_readonly("phaseJ", &SplittingSample::phaseJ)
        .def_readonly("ampP", &SplittingSample::ampP)
        .def_readonly("phaseP", &SplittingSample::phaseP)
        .def_readonly("noise_floor", &SplittingSample::noise_floor);

    m.def(
        "splitting",
        [](const ModelParams& p, double u, int k, int modes) {
            SplittingOptions o;
            o.modes = modes;
            const auto run = compute_sheets(p, o);
            return measure_splitting(run.unstable, run.stable, u, k, false);
        },
        py::arg("params"), py::arg("u") = 1.0, py::arg("k") = 1, py::arg("modes") = 8,
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "inner_constants",
        [](const ModelParams& p, int kmax, int modes) {
            const auto d = extract_fk(solve_inner(p, modes), 1, kmax);
            py::list out;
            for (std::size_t i = 0; i < d.k.size(); ++i) out.append(py::make_tuple(d.k[i], d.f[i], d.error[i]));
            return out;
        },
        py::arg("params"), py::arg("kmax") = 1, py::arg("modes") = 8);

    py::class_<CriterionResult>(m, "CriterionResult")
        .def_readonly("id", &CriterionResult::id)
        .def_readonly("name", &CriterionResult::name)
        .def_readonly("passed", &CriterionResult::pass)
        .def_readonly("detail", &CriterionResult::detail)
        .def_readonly("seconds", &CriterionResult::seconds)
        .def("__str__", &format_result);
    m.def("run_criterion", &run_criterion, py::call_guard<py::gil_scoped_release>());
    m.attr("CRITERIA") = kCriteria;
}
