// Python bindings for the half-space vorticity solver.

#include "hsv/biot_savart.hpp"
#include "hsv/harness.hpp"
#include "hsv/kernels.hpp"
#include "hsv/norms.hpp"
#include "hsv/stepper.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace hsv;

namespace {

// pybind11 holders must be non-const; the core treats grids as immutable.
using PyGrid = std::shared_ptr<Grid>;
using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

CArray to_numpy(const SpectralField& f) {
    const Grid& g = f.grid();
    CArray a({g.n_modes(), f.ncomp(), g.Nz()});
    std::memcpy(a.mutable_data(), f.raw().data(), f.raw().size() * sizeof(cplx));
    return a;
}

SpectralField from_numpy(const CArray& a, const GridPtr& g) {
    if (a.ndim() != 3 || a.shape(0) != g->n_modes() || a.shape(2) != g->Nz())
        throw std::invalid_argument("array must have shape (n_modes, ncomp, Nz) for this grid");
    SpectralField f(g, static_cast<int>(a.shape(1)));
    std::memcpy(f.raw().data(), a.data(), f.raw().size() * sizeof(cplx));
    return f;
}

py::dict report_dict(const NormReport& r) {
    py::dict d;
    d["t"] = r.t;
    d["X_t"] = r.X_t;
    d["Y_t"] = r.Y_t;
    d["Z"] = r.Z;
    d["S"] = r.S;
    d["triple"] = r.triple;
    d["decay_rate"] = r.decay_rate;
    std::vector<double> mu, x;
    for (const MuRow& m : r.rows) {
        mu.push_back(m.mu);
        x.push_back(m.X_mu);
    }
    d["mu"] = mu;
    d["X_mu"] = x;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pseudo-spectral vorticity solver on the half space";
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Grid, PyGrid>(m, "Grid")
        .def_property_readonly("K", &Grid::K)
        .def_property_readonly("Nz", &Grid::Nz)
        .def_property_readonly("Z_max", &Grid::Z_max)
        .def_property_readonly("n_modes", &Grid::n_modes)
        .def_property_readonly("z", [](const Grid& g) { return std::vector<double>(g.z().begin(), g.z().end()); })
        .def_property_readonly("weights",
                               [](const Grid& g) { return std::vector<double>(g.quad_weights().begin(), g.quad_weights().end()); })
        .def("mode", [](const Grid& g, int i) { return std::pair<int, int>(g.mode(i).xi1, g.mode(i).xi2); })
        .def("index", py::overload_cast<int, int>(&Grid::index, py::const_));

    m.def("make_grid", [](int K, int Nz, double Z_max, double nu_min, double mu0, double c_grade) {
              return std::const_pointer_cast<Grid>(make_grid(K, Nz, Z_max, nu_min, mu0, c_grade));
          }, py::arg("K"), py::arg("Nz"), py::arg("Z_max"), py::arg("nu_min"), py::arg("mu0"),
          py::arg("c_grade") = Grid::kDefaultGrade);

    auto query = [](double t, double nu, double xi, double z, double zbar) { return KernelQuery{t, nu, xi, z, zbar}; };
    m.def("heat_neumann", [query](double t, double nu, double xi, double z, double zb) { return heat_neumann(query(t, nu, xi, z, zb)); },
          py::arg("t"), py::arg("nu"), py::arg("xi"), py::arg("z"), py::arg("zbar"));
    m.def("heat_dirichlet", [query](double t, double nu, double xi, double z, double zb) { return heat_dirichlet(query(t, nu, xi, z, zb)); },
          py::arg("t"), py::arg("nu"), py::arg("xi"), py::arg("z"), py::arg("zbar"));
    m.def("robin_g1", [query](double t, double nu, double xi, double z, double zb) { return robin_g1(query(t, nu, xi, z, zb)); },
          py::arg("t"), py::arg("nu"), py::arg("xi"), py::arg("z"), py::arg("zbar"));
    m.def("robin_residual", [query](double t, double nu, double xi, double z, double zb) { return robin_residual(query(t, nu, xi, z, zb)); },
          py::arg("t"), py::arg("nu"), py::arg("xi"), py::arg("z"), py::arg("zbar"));
    m.def("weight_w", &weight_w, py::arg("z"), py::arg("nu"));

    m.def("initial_vorticity", [](const std::string& preset, double amp, const PyGrid& g) { return to_numpy(make_initial_data(preset, amp, g)); },
          py::arg("preset"), py::arg("amplitude"), py::arg("grid"));
    m.def("velocity", [](const CArray& w, const PyGrid& g) { return to_numpy(velocity_from_vorticity(from_numpy(w, g))); },
          py::arg("omega"), py::arg("grid"));
    m.def("kinetic_energy", [](const CArray& u, const PyGrid& g) { return kinetic_energy(from_numpy(u, g)); },
          py::arg("u"), py::arg("grid"));
    m.def(
        "solve_navier_stokes",
        [](const CArray& w, const PyGrid& g, double T, double nu, double dt) {
            PhysParams p;
            p.nu = nu;
            StepConfig c;
            c.dt = dt;
            const Trajectory tr = solve_navier_stokes(from_numpy(w, g), T, p, c);
            py::list out;
            for (const auto& s : tr.snapshots) out.append(py::make_tuple(s.t, to_numpy(s.omega)));
            return out;
        },
        py::arg("omega"), py::arg("grid"), py::arg("T"), py::arg("nu"), py::arg("dt") = 1e-3);
    m.def(
        "cumulative_norm",
        [](const CArray& w, const PyGrid& g, double t, double gamma, double nu, int mu_samples) {
            NormParams p;
            p.mu0 = g->mu0();
            p.gamma = gamma;
            p.nu = nu;
            p.mu_samples = mu_samples;
            return report_dict(cumulative_norm(from_numpy(w, g), t, p));
        },
        py::arg("omega"), py::arg("grid"), py::arg("t"), py::arg("gamma"), py::arg("nu"), py::arg("mu_samples") = 32);

    m.def(
        "parse_config",
        [](const std::string& text) {
            py::dict d;
            for (const auto& [k, v] : config_entries(parse_config(text))) d[py::str(k)] = v;
            return d;
        },
        py::arg("text"));
    m.def("manifest_json", [](const std::string& text) { return manifest_json(parse_config(text), text, nullptr); },
          py::arg("text"));
    m.def(
        "run_inviscid_limit",
        [](const std::string& text, int jobs) {
            const ExperimentConfig cfg = parse_config(text);
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = run_inviscid_limit_experiment(cfg, jobs);
            }
            py::dict d;
            std::vector<double> nu, E, kato;
            for (const NuRun& run : r.runs) {
                nu.push_back(run.nu);
                E.push_back(run.E);
                kato.push_back(run.kato);
            }
            d["ok"] = r.ok;
            d["nu"] = nu;
            d["E"] = E;
            d["kato"] = kato;
            d["t"] = r.t;
            d["rate"] = r.rate_valid ? py::object(py::float_(r.rate)) : py::object(py::none());
            return d;
        },
        py::arg("text"), py::arg("jobs") = 1);
    m.def(
        "run_norm_tracking",
        [](const std::string& text) {
            const ExperimentConfig cfg = parse_config(text);
            NormSeries ns;
            {
                py::gil_scoped_release release;
                ns = run_norm_tracking_experiment(cfg);
            }
            py::dict d;
            d["ok"] = ns.ok;
            d["gamma"] = ns.gamma;
            d["T"] = ns.T;
            d["max_ratio"] = ns.max_ratio;
            d["flagged"] = ns.flagged;
            py::list reps;
            for (const NormReport& r : ns.reports) reps.append(report_dict(r));
            d["reports"] = reps;
            return d;
        },
        py::arg("text"));
}
