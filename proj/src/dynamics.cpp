#include "hfb/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include <Eigen/Eigenvalues>

#include "hfb/observables.hpp"

namespace hfb {

namespace {

const cxd I1(0.0, 1.0);

// i d/dt of the state with the kinetic part optionally left out
HfbRhs rhs_impl(const QuasifreeState& r, const PotentialPair& pot, const GridField& V, bool kinetic) {
    check_shapes(r);
    MeanFieldMatrices m = mean_field_matrices(r, pot, V);
    if (!kinetic) {
        const cmat D = shared_kinetic_matrix(r.grid)->cast<cxd>();
        m.H -= D;
        m.H0 -= D;
    }
    const double dv = r.grid.cell_volume;
    HfbRhs out;
    out.dphi = -I1 * (m.H0 * r.phi + m.K * r.phi.conjugate());
    out.dgamma = -I1 * (m.H * r.gamma - r.gamma * m.H + m.K * r.sigma.adjoint() - r.sigma * m.K.adjoint());
    out.dsigma = -I1 * (m.H * r.sigma + r.sigma * m.H.transpose() + m.K * r.gamma.transpose() +
                        r.gamma * m.K.transpose() + m.K / dv);
    return out;
}

QuasifreeState axpy(const QuasifreeState& r, double c, const HfbRhs& k) {
    QuasifreeState o = r;
    o.phi += c * k.dphi;
    o.gamma += c * k.dgamma;
    o.sigma += c * k.dsigma;
    return o;
}

QuasifreeState rk4(const QuasifreeState& r, const PotentialPair& pot, const GridField& V, double h,
                   bool kinetic) {
    HfbRhs k1 = rhs_impl(r, pot, V, kinetic);
    HfbRhs k2 = rhs_impl(axpy(r, 0.5 * h, k1), pot, V, kinetic);
    HfbRhs k3 = rhs_impl(axpy(r, 0.5 * h, k2), pot, V, kinetic);
    HfbRhs k4 = rhs_impl(axpy(r, h, k3), pot, V, kinetic);
    QuasifreeState o = r;
    o.phi += (h / 6.0) * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
    o.gamma += (h / 6.0) * (k1.dgamma + 2.0 * k2.dgamma + 2.0 * k3.dgamma + k4.dgamma);
    o.sigma += (h / 6.0) * (k1.dsigma + 2.0 * k2.dsigma + 2.0 * k3.dsigma + k4.dsigma);
    return o;
}

bool finite(const QuasifreeState& r) {
    return r.phi.allFinite() && r.gamma.allFinite() && r.sigma.allFinite();
}

bool vanishes(const GridField& V) { return V.size() == 0 || V.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

MeanFieldMatrices mean_field_matrices(const QuasifreeState& r, const PotentialPair& pot, const GridField& V) {
    const auto& g = r.grid;
    MeanFieldMatrices m;
    m.H0 = h_op(g, pot, V, r.gamma).matrix(g);
    m.H = m.H0 + b_op(g, pot, projector_kernel(r.phi)).matrix(g);
    m.K = k_op(g, pot, r.sigma + pair_kernel(r.phi)).matrix(g);
    return m;
}

HfbRhs hfb_rhs(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V) {
    return rhs_impl(rho, pot, V, true);
}

LinearPropagator::LinearPropagator(double dt, const TorusGrid& grid, const GridField& V, const PotentialPair&)
    : grid_(grid), F_(unitary_dft(grid)) {
    if (!vanishes(V)) throw std::invalid_argument("the split propagator requires V = 0");
    rvec k2 = laplacian_symbol(grid);
    phase_ = (-I1 * dt * k2.cast<cxd>()).array().exp();
}

QuasifreeState LinearPropagator::apply(const QuasifreeState& r) const {
    check_shapes(r);
    QuasifreeState o = r;
    const cmat& F = F_;
    cvec pf = F * r.phi;
    o.phi = F.adjoint() * pf.cwiseProduct(phase_);
    cmat gf = F * r.gamma * F.adjoint();
    gf = phase_.asDiagonal() * gf * phase_.conjugate().asDiagonal();
    o.gamma = F.adjoint() * gf * F;
    cmat sf = F * r.sigma * F.transpose();
    sf = phase_.asDiagonal() * sf * phase_.asDiagonal();
    o.sigma = F.adjoint() * sf * F.conjugate();
    return o;
}

LinearPropagator linear_propagator(double dt, const TorusGrid& grid, const GridField& V, const PotentialPair& pot) {
    return LinearPropagator(dt, grid, V, pot);
}

QuasifreeState step(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V,
                    const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    QuasifreeState out;
    if (cfg.scheme == Scheme::rk4) {
        out = rk4(rho, pot, V, cfg.dt, true);
    } else {
        LinearPropagator half(0.5 * cfg.dt, rho.grid, V, pot);
        out = half.apply(rk4(half.apply(rho), pot, V, cfg.dt, false));
    }
    if (!finite(out)) throw NumericalAbort("non-finite value in HFB step");
    if (cfg.repair_drift) repair_state(out);
    return out;
}

TrajectoryRecord record_of(double t, const QuasifreeState& rho, const PotentialPair& pot, const GridField& V) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.N = particle_number(rho);
    rec.E = energy(rho, pot, V);
    cmat Gam = build_gamma_operator(rho);
    Gam = 0.5 * (Gam + Gam.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<cmat> es(Gam, Eigen::EigenvaluesOnly);
    rec.min_eig_Gamma = es.eigenvalues().minCoeff() / rho.grid.cell_volume;
    rec.herm_violation = (rho.gamma - rho.gamma.adjoint()).cwiseAbs().maxCoeff();
    rec.symm_violation = (rho.sigma - rho.sigma.transpose()).cwiseAbs().maxCoeff();
    return rec;
}

Trajectory evolve(const QuasifreeState& rho0, const PotentialPair& pot, const GridField& V,
                  const IntegratorConfig& cfg, const std::vector<Observer>& observers, bool keep_snapshots) {
    if (!(cfg.dt > 0.0) || cfg.t_final < 0.0) throw std::invalid_argument("need dt > 0 and t_final >= 0");
    auto rep0 = check_admissible(rho0);
    if (!rep0.admissible) throw std::domain_error("initial state is not admissible");
    const int stride = std::max(1, cfg.output_stride);
    Trajectory traj;
    auto emit = [&](double t, const QuasifreeState& r) {
        if (t > 0.0) {
            auto rep = check_admissible(r);
            if (rep.max_violation() > 1e-4) throw NumericalAbort("admissibility violation above 1e-4");
        }
        traj.records.push_back(record_of(t, r, pot, V));
        if (keep_snapshots) traj.snapshots.push_back(r);
        for (const auto& ob : observers) ob(t, r);
    };
    QuasifreeState r = rho0;
    emit(0.0, r);
    const long steps = static_cast<long>(std::llround(cfg.t_final / cfg.dt));
    IntegratorConfig c = cfg;
    for (long s = 0; s < steps; ++s) {
        r = step(r, pot, V, c);
        if ((s + 1) % stride == 0 || s + 1 == steps) emit((s + 1) * cfg.dt, r);
    }
    return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    os << "t,N,E,min_eig_Gamma,herm_violation,symm_violation\n";
    for (const auto& r : traj.records)
        os << r.t << ',' << r.N << ',' << r.E << ',' << r.min_eig_Gamma << ',' << r.herm_violation << ','
           << r.symm_violation << '\n';
}

}  // namespace hfb
