#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hfb/dynamics.hpp"
#include "hfb/gibbs.hpp"
#include "hfb/observables.hpp"
#include "hfb/symplectic.hpp"

namespace py = pybind11;
using namespace hfb;

namespace {

Scheme scheme_of(const std::string& s) {
    if (s == "rk4") return Scheme::rk4;
    if (s == "strang_split") return Scheme::strang_split;
    throw py::value_error("scheme must be 'rk4' or 'strang_split'");
}

GridField field_or_empty(const std::optional<cvec>& V) { return V ? *V : GridField(); }

py::dict report_dict(const AdmissibilityReport& r) {
    py::dict d;
    d["admissible"] = r.admissible;
    d["herm_violation"] = r.herm_violation;
    d["psd_violation"] = r.psd_violation;
    d["symm_violation"] = r.symm_violation;
    d["schur_violation"] = r.schur_violation;
    d["trace_violation"] = r.trace_violation;
    d["tol_psd"] = r.tol_psd;
    return d;
}

GibbsParams gibbs_params(double beta, double n, double g, const TorusGrid& grid) {
    GibbsParams p;
    p.beta = beta;
    p.n = n;
    p.g = g;
    p.grid = grid;
    return p;
}

}  // namespace

PYBIND11_MODULE(_hfb, m) {
    m.doc() = "Hartree-Fock-Bogoliubov dynamics on a periodic grid";

    py::class_<TorusGrid>(m, "TorusGrid")
        .def_readonly("dim", &TorusGrid::dim)
        .def_readonly("points_per_side", &TorusGrid::points_per_side)
        .def_readonly("half_length", &TorusGrid::half_length)
        .def_readonly("spacing", &TorusGrid::spacing)
        .def_readonly("cell_volume", &TorusGrid::cell_volume)
        .def_readonly("sites", &TorusGrid::sites)
        .def_readonly("modes", &TorusGrid::modes)
        .def("volume", &TorusGrid::volume)
        .def("zero_mode", &TorusGrid::zero_mode)
        .def("position", &TorusGrid::position)
        .def("__repr__", [](const TorusGrid& g) {
            return "TorusGrid(dim=" + std::to_string(g.dim) + ", points=" + std::to_string(g.points_per_side) +
                   ", half_length=" + std::to_string(g.half_length) + ")";
        });

    m.def("make_grid", &make_grid, py::arg("dim"), py::arg("points"), py::arg("half_length"));
    m.def("to_fourier", &to_fourier);
    m.def("from_fourier", &from_fourier);
    m.def("laplacian_symbol", &laplacian_symbol);
    m.def("kinetic_matrix", &kinetic_matrix);
    m.def("plane_wave", &plane_wave);

    py::class_<QuasifreeState>(m, "QuasifreeState")
        .def(py::init<>())
        .def_readwrite("grid", &QuasifreeState::grid)
        .def_readwrite("phi", &QuasifreeState::phi)
        .def_readwrite("gamma", &QuasifreeState::gamma)
        .def_readwrite("sigma", &QuasifreeState::sigma);

    m.def("vacuum_state", &vacuum_state);
    m.def(
        "sample_random_state",
        [](const TorusGrid& g, std::uint64_t seed, double scale, double bandwidth, bool condensate, bool pairing) {
            RandomStateOptions o;
            o.scale = scale;
            o.bandwidth = bandwidth;
            o.with_condensate = condensate;
            o.with_pairing = pairing;
            return sample_random_state(g, seed, o);
        },
        py::arg("grid"), py::arg("seed"), py::arg("scale") = 1.0, py::arg("bandwidth") = 0.0,
        py::arg("condensate") = true, py::arg("pairing") = true);
    m.def("squeezed_state", &squeezed_state, py::arg("grid"), py::arg("r"));
    m.def(
        "check_admissible", [](const QuasifreeState& r) { return report_dict(check_admissible(r)); },
        py::arg("state"));
    m.def("build_gamma_operator", &build_gamma_operator);
    m.def(
        "wick_expectation",
        [](const QuasifreeState& r, const std::vector<std::pair<int, bool>>& ops) {
            FieldOpSpec spec;
            for (auto [s, c] : ops) spec.push_back({s, c});
            return wick_expectation(r, spec);
        },
        py::arg("state"), py::arg("ops"), "ops: list of (site, is_creation)");
    m.def("write_snapshot", &write_snapshot);
    m.def("read_snapshot", &read_snapshot);

    py::class_<PotentialPair>(m, "PotentialPair")
        .def_property_readonly("is_contact", [](const PotentialPair& p) { return p.mode == PairMode::contact; })
        .def_readonly("g", &PotentialPair::g)
        .def_readonly("pair", &PotentialPair::pair);
    m.def("contact_potential", &make_contact_potential, py::arg("g"));
    m.def("grid_potential", &make_grid_potential, py::arg("grid"), py::arg("values"));

    m.def("particle_number", &particle_number);
    m.def(
        "energy", [](const QuasifreeState& r, const PotentialPair& p, std::optional<cvec> V) {
            return energy(r, p, field_or_empty(V));
        },
        py::arg("state"), py::arg("potential"), py::arg("V") = py::none());
    m.def(
        "hfb_rhs",
        [](const QuasifreeState& r, const PotentialPair& p, std::optional<cvec> V) {
            auto d = hfb_rhs(r, p, field_or_empty(V));
            return py::make_tuple(d.dphi, d.dgamma, d.dsigma);
        },
        py::arg("state"), py::arg("potential"), py::arg("V") = py::none());

    py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_RuntimeError);

    m.def(
        "step",
        [](const QuasifreeState& r, const PotentialPair& p, double dt, std::optional<cvec> V, const std::string& s) {
            IntegratorConfig c;
            c.dt = dt;
            c.scheme = scheme_of(s);
            return step(r, p, field_or_empty(V), c);
        },
        py::arg("state"), py::arg("potential"), py::arg("dt"), py::arg("V") = py::none(), py::arg("scheme") = "rk4");
    m.def(
        "evolve",
        [](const QuasifreeState& r, const PotentialPair& p, double dt, double t_final, int stride,
           std::optional<cvec> V, const std::string& s, bool keep) {
            IntegratorConfig c;
            c.dt = dt;
            c.t_final = t_final;
            c.output_stride = stride;
            c.scheme = scheme_of(s);
            Trajectory tr;
            {
                py::gil_scoped_release nogil;
                tr = evolve(r, p, field_or_empty(V), c, {}, keep);
            }
            const auto k = static_cast<Eigen::Index>(tr.records.size());
            rvec t(k), N(k), E(k), me(k);
            for (Eigen::Index i = 0; i < k; ++i) {
                t(i) = tr.records[i].t;
                N(i) = tr.records[i].N;
                E(i) = tr.records[i].E;
                me(i) = tr.records[i].min_eig_Gamma;
            }
            py::dict d;
            d["t"] = t;
            d["N"] = N;
            d["E"] = E;
            d["min_eig_Gamma"] = me;
            d["snapshots"] = tr.snapshots;
            return d;
        },
        py::arg("state"), py::arg("potential"), py::arg("dt"), py::arg("t_final"), py::arg("stride") = 1,
        py::arg("V") = py::none(), py::arg("scheme") = "rk4", py::arg("keep_snapshots") = false);

    py::class_<Symplectomorphism>(m, "Symplectomorphism")
        .def(py::init([](cmat u, cmat v) { return Symplectomorphism{std::move(u), std::move(v)}; }))
        .def_readwrite("u", &Symplectomorphism::u)
        .def_readwrite("v", &Symplectomorphism::v)
        .def("full", &Symplectomorphism::full)
        .def("inverse", &Symplectomorphism::inverse)
        .def("adjoint", &Symplectomorphism::adjoint)
        .def("__mul__", &Symplectomorphism::operator*);
    m.def("check_symplectic", &check_symplectic);
    m.def("transform_gamma", &transform_gamma, py::arg("U"), py::arg("gamma_prime"));
    m.def(
        "diagonalize_gamma",
        [](const QuasifreeState& r, double tol, double dt) {
            DiagonalizeOptions o;
            o.dt = dt;
            auto res = diagonalize_gamma(r, tol, o);
            py::dict d;
            d["spectrum"] = res.spectrum;
            d["gamma_prime"] = res.gamma_prime;
            d["U"] = res.U;
            d["residual"] = res.residual;
            d["clip"] = res.clip;
            d["passes"] = res.passes;
            d["decay_log"] = res.decay_log;
            return d;
        },
        py::arg("state"), py::arg("tol"), py::arg("dt") = 0.05);
    m.def(
        "bogoliubov_modes",
        [](double n_total, double n0, double g, const TorusGrid& grid) {
            py::list out;
            for (const auto& md : bogoliubov_modes(n_total, n0, g, grid)) {
                py::dict d;
                d["mode"] = md.mode;
                d["k"] = md.k;
                d["E"] = md.E;
                d["u"] = md.u;
                d["v"] = md.v;
                d["stable"] = md.stable;
                d["gapless"] = md.gapless;
                out.append(d);
            }
            return out;
        },
        py::arg("n_total"), py::arg("n0"), py::arg("g"), py::arg("grid"));

    m.def("critical_density", &critical_density, py::arg("beta"), py::arg("dim"));
    m.def(
        "solve_mu_L",
        [](double beta, double n, double g, const TorusGrid& grid, double tol) {
            auto s = solve_mu_L(gibbs_params(beta, n, g, grid), tol);
            py::dict d;
            d["mu"] = s.mu;
            d["gamma_hat"] = s.gamma_hat;
            d["density_check"] = s.density_check;
            d["condensate_fraction"] = s.condensate_fraction;
            return d;
        },
        py::arg("beta"), py::arg("n"), py::arg("g"), py::arg("grid"), py::arg("tol") = 1e-12);
    m.def(
        "thermodynamic_sweep",
        [](double beta, double n, double g, int dim, int points, const std::vector<double>& Ls, double tol) {
            auto res = thermodynamic_sweep(gibbs_params(beta, n, g, make_grid(dim, points, Ls.at(0))), Ls, tol);
            py::dict d;
            std::vector<double> L, mu, frac;
            for (const auto& r : res.rows) {
                L.push_back(r.L);
                mu.push_back(r.mu);
                frac.push_back(r.zero_mode_fraction);
            }
            d["L"] = L;
            d["mu"] = mu;
            d["zero_mode_fraction"] = frac;
            d["n_c"] = res.n_c;
            d["mu_inf"] = res.mu_inf;
            d["condensate_fraction_predicted"] = res.condensate_fraction_predicted;
            return d;
        },
        py::arg("beta"), py::arg("n"), py::arg("g"), py::arg("dim"), py::arg("points"), py::arg("L_list"),
        py::arg("tol") = 1e-12);
}
