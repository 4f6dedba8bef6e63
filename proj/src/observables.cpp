#include "hfb/observables.hpp"

#include <algorithm>
#include <stdexcept>

#include "hfb/dynamics.hpp"
#include "hfb/symplectic.hpp"

namespace hfb {

double particle_number(const QuasifreeState& r) {
    check_shapes(r);
    cxd s = r.gamma.trace() + r.phi.squaredNorm();
    return r.grid.cell_volume * s.real();
}

cxd energy_complex(const QuasifreeState& r, const PotentialPair& pot, const GridField& V) {
    check_shapes(r);
    const auto& g = r.grid;
    const double dv = g.cell_volume;
    OneBodyOperator h;
    h.kinetic = true;
    if (V.size()) h.mult = V;
    const cmat Hb = h.matrix(g);
    const cmat G = dv * r.gamma;
    cxd e = (Hb * G).trace() + dv * r.phi.dot(Hb * r.phi);
    e += (b_op(g, pot, projector_kernel(r.phi)).matrix(g) * G).trace();
    e += 0.5 * (b_op(g, pot, r.gamma).matrix(g) * G).trace();
    const cmat Sphi = dv * (r.sigma + pair_kernel(r.phi));
    e += 0.5 * (k_op(g, pot, Sphi / dv).matrix(g) * Sphi.adjoint()).trace();
    return e;
}

double energy(const QuasifreeState& r, const PotentialPair& pot, const GridField& V) {
    return energy_complex(r, pot, V).real();
}

double energy_contact(const QuasifreeState& r, double g, const GridField& V) {
    check_shapes(r);
    const auto& grid = r.grid;
    const double dv = grid.cell_volume;
    const GridKernel gphi = r.gamma + projector_kernel(r.phi);
    OneBodyOperator h;
    h.kinetic = true;
    if (V.size()) h.mult = V;
    double e = (h.matrix(grid) * gphi).trace().real() * dv;
    const rvec n = r.gamma.diagonal().real();
    const cvec w = r.sigma.diagonal() + r.phi.cwiseProduct(r.phi);
    const rvec phi2 = r.phi.cwiseAbs2();
    e += g * dv * (2.0 * n.cwiseProduct(phi2).sum() + n.squaredNorm() + 0.5 * w.squaredNorm());
    return e;
}

Reconstruction reconstruct(const cmat& u, const cmat& v, const cmat& gp) {
    const auto n = u.rows();
    const cmat one_gb = cmat::Identity(n, n) + gp.conjugate();
    Reconstruction rc;
    rc.G = u.adjoint() * gp * u + v.transpose() * one_gb * v.conjugate();
    rc.Sigma = u.adjoint() * gp * v + v.transpose() * one_gb * u.conjugate();
    return rc;
}

QuasifreeState reconstructed_state(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                                   const cmat& gp) {
    Reconstruction rc = reconstruct(u, v, gp);
    QuasifreeState r;
    r.grid = grid;
    r.phi = phi;
    r.gamma = rc.G / grid.cell_volume;
    r.sigma = rc.Sigma / grid.cell_volume;
    return r;
}

namespace {

double functional(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v, const cmat& gp,
                  const PotentialPair& pot, const GridField& V) {
    const double dv = grid.cell_volume;
    Reconstruction rc = reconstruct(u, v, gp);
    OneBodyOperator h;
    h.kinetic = true;
    if (V.size()) h.mult = V;
    const cmat Hb = h.matrix(grid);
    cxd val = dv * phi.dot(Hb * phi);
    val += (rc.G * (Hb + b_op(grid, pot, projector_kernel(phi)).matrix(grid))).trace();
    val += 0.5 * (rc.G * b_op(grid, pot, rc.G / dv).matrix(grid)).trace();
    const cmat Sphi = rc.Sigma + dv * pair_kernel(phi);
    val += 0.5 * (k_op(grid, pot, Sphi / dv).matrix(grid) * Sphi.adjoint()).trace();
    return val.real();
}

double rel_dev(const cmat& a, const cmat& b) {
    const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-8);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double hamiltonian_functional(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                              const cmat& gp, const PotentialPair& pot, const GridField& V, bool check) {
    if (check && check_symplectic({u, v}) > 1e-8) throw std::domain_error("(u, v) is not symplectic");
    return functional(grid, phi, u, v, gp, pot, V);
}

double GradientReport::max_rel() const {
    return std::max({phi_rel, u_rel, v_rel, phi_vs_rhs, u_vs_flow, v_vs_flow});
}

GradientReport gradient_check(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                              const cmat& gp, const PotentialPair& pot, const GridField& V, double step) {
    const auto n = u.rows();
    const double dv = grid.cell_volume;
    auto H = [&](const GridField& p, const cmat& uu, const cmat& vv) {
        return functional(grid, p, uu, vv, gp, pot, V);
    };
    // Wirtinger derivative d/d conj(z) = (d/dRe + i d/dIm) / 2
    auto wirtinger = [&](auto&& eval) {
        const double re = (eval(cxd(step, 0)) - eval(cxd(-step, 0))) / (2.0 * step);
        const double im = (eval(cxd(0, step)) - eval(cxd(0, -step))) / (2.0 * step);
        return 0.5 * cxd(re, im);
    };

    cvec fd_phi(n);
    for (int i = 0; i < n; ++i) {
        fd_phi(i) = wirtinger([&](cxd d) {
                        GridField p = phi;
                        p(i) += d;
                        return H(p, u, v);
                    }) /
                    dv;
    }
    cmat fd_u(n, n), fd_v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            fd_u(i, j) = wirtinger([&](cxd d) {
                cmat uu = u;
                uu(i, j) += d;
                return H(phi, uu, v);
            });
            fd_v(i, j) = wirtinger([&](cxd d) {
                cmat vv = v;
                vv(i, j) += d;
                return H(phi, u, vv);
            });
        }

    QuasifreeState rho = reconstructed_state(grid, phi, u, v, gp);
    MeanFieldMatrices m = mean_field_matrices(rho, pot, V);
    const cmat I = cmat::Identity(n, n);
    const cmat half = 0.5 * I;
    cvec cf_phi = m.H0 * phi + m.K * phi.conjugate();
    cmat cf_u = gp * u * m.H + (half + gp) * v * m.K.conjugate();
    cmat cf_v = (I + gp) * v * m.H.conjugate() + (half + gp) * u * m.K;

    GradientReport rep;
    rep.phi_rel = rel_dev(fd_phi, cf_phi);
    rep.u_rel = rel_dev(fd_u, cf_u);
    rep.v_rel = rel_dev(fd_v, cf_v);

    HfbRhs rhs = hfb_rhs(rho, pot, V);
    rep.phi_vs_rhs = rel_dev(cxd(0, 1) * rhs.dphi, cf_phi);
    const cmat idu = u * m.H + v * m.K.conjugate();
    const cmat idv = -u * m.K - v * m.H.conjugate();
    rep.u_vs_flow = rel_dev(gp * idu + 0.5 * v * m.K.conjugate(), cf_u);
    rep.v_vs_flow = rel_dev(-gp * idv + v * m.H.conjugate() + 0.5 * u * m.K, cf_v);
    return rep;
}

}  // namespace hfb
