#include "hfb/symplectic.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace hfb {

Symplectomorphism Symplectomorphism::identity(int n) {
    return {cmat::Identity(n, n), cmat::Zero(n, n)};
}

cmat Symplectomorphism::full() const {
    const auto n = u.rows();
    cmat M(2 * n, 2 * n);
    M << u, v, v.conjugate(), u.conjugate();
    return M;
}

Symplectomorphism Symplectomorphism::adjoint() const { return {u.adjoint(), v.transpose()}; }

Symplectomorphism Symplectomorphism::inverse() const { return {u.adjoint(), -v.transpose()}; }

Symplectomorphism Symplectomorphism::operator*(const Symplectomorphism& o) const {
    return {u * o.u + v * o.v.conjugate(), u * o.v + v * o.u.conjugate()};
}

double check_symplectic(const Symplectomorphism& U) {
    const auto n = U.u.rows();
    const cmat I = cmat::Identity(n, n);
    double r1 = (U.u * U.u.adjoint() - U.v * U.v.adjoint() - I).norm();
    double r2 = (U.u.adjoint() * U.u - U.v.transpose() * U.v.conjugate() - I).norm();
    double r3 = (U.u.adjoint() * U.v - U.v.transpose() * U.u.conjugate()).norm();
    double r4 = (U.u * U.v.transpose() - U.v * U.u.transpose()).norm();
    return std::max({r1, r2, r3, r4});
}

cmat BlockHamiltonian::full() const {
    const auto n = a.rows();
    cmat M(2 * n, 2 * n);
    M << a, b, b.conjugate(), a.conjugate();
    return M;
}

BlockHamiltonian lambda_of_state(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V) {
    check_shapes(rho);
    const auto& g = rho.grid;
    BlockHamiltonian lam;
    lam.a = h_op(g, pot, V, rho.gamma + projector_kernel(rho.phi)).matrix(g);
    lam.b = k_op(g, pot, rho.sigma + pair_kernel(rho.phi)).matrix(g);
    return lam;
}

cmat gamma_form_rhs(const cmat& Gamma, const BlockHamiltonian& lam) {
    const auto n = lam.a.rows();
    if (Gamma.rows() != 2 * n || Gamma.cols() != 2 * n)
        throw std::invalid_argument("Gamma and Lambda shapes differ");
    cmat L = lam.full();
    cmat SL = L;
    SL.bottomRows(n) *= -1.0;
    cmat LS = L;
    LS.rightCols(n) *= -1.0;
    return SL * Gamma - Gamma * LS;
}

cmat transform_gamma(const Symplectomorphism& U, const cmat& gp) {
    const auto n = gp.rows();
    cmat Gp = cmat::Zero(2 * n, 2 * n);
    Gp.topLeftCorner(n, n) = gp;
    Gp.bottomRightCorner(n, n) = cmat::Identity(n, n) + gp.conjugate();
    cmat X = U.full();
    return X * Gp * X.adjoint();
}

namespace {

// -i S Lambda
cmat generator(const BlockHamiltonian& lam) {
    const auto n = lam.a.rows();
    cmat M = lam.full();
    M.bottomRows(n) *= -1.0;
    return cxd(0, -1) * M;
}

// d(u, v)/dt for i dX = S Lambda X in block form
void block_rhs(const BlockHamiltonian& lam, const cmat& u, const cmat& v, cmat& du, cmat& dv) {
    const cxd mi(0, -1);
    du = mi * (lam.a * u + lam.b * v.conjugate());
    dv = mi * (lam.a * v + lam.b * u.conjugate());
}

}  // namespace

SymplecticTrajectory evolve_symplectomorphism(const Symplectomorphism& U0, const LambdaPath& path, double dt,
                                              double T, SymplecticScheme scheme, int stride,
                                              const std::function<void(double, const Symplectomorphism&)>& observer) {
    if (!(dt > 0.0) || T < 0.0) throw std::invalid_argument("need dt > 0 and T >= 0");
    if (stride < 1) stride = 1;
    if (check_symplectic(U0) > 1e-10 * std::max<double>(1.0, U0.u.norm()))
        throw std::domain_error("initial transform is not symplectic");
    const auto n = U0.u.rows();
    SymplecticTrajectory traj;
    Symplectomorphism X = U0;
    double t = 0.0;
    auto record = [&](double tt) {
        double viol = check_symplectic(X);
        traj.max_violation = std::max(traj.max_violation, viol);
        if (!std::isfinite(viol) || viol > 1e-6) throw std::runtime_error("symplectic violation above ceiling");
        traj.t.push_back(tt);
        traj.U.push_back(X);
        if (observer) observer(tt, X);
    };
    record(0.0);
    const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
    for (long s = 0; s < steps; ++s) {
        const double h = std::min(dt, T - t);
        if (scheme == SymplecticScheme::magnus4) {
            cmat A1 = generator(path(t + c1 * h));
            cmat A2 = generator(path(t + c2 * h));
            cmat Om = (0.5 * h) * (A1 + A2) + (std::sqrt(3.0) * h * h / 12.0) * (A2 * A1 - A1 * A2);
            cmat E = Om.exp();
            cmat top = E.topRows(n);
            cmat u = top.leftCols(n) * X.u + top.rightCols(n) * X.v.conjugate();
            cmat v = top.leftCols(n) * X.v + top.rightCols(n) * X.u.conjugate();
            X.u = std::move(u);
            X.v = std::move(v);
        } else {
            BlockHamiltonian l0 = path(t), lm = path(t + 0.5 * h), l1 = path(t + h);
            cmat k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
            block_rhs(l0, X.u, X.v, k1u, k1v);
            block_rhs(lm, X.u + 0.5 * h * k1u, X.v + 0.5 * h * k1v, k2u, k2v);
            block_rhs(lm, X.u + 0.5 * h * k2u, X.v + 0.5 * h * k2v, k3u, k3v);
            block_rhs(l1, X.u + h * k3u, X.v + h * k3v, k4u, k4v);
            X.u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            X.v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        t += h;
        if ((s + 1) % stride == 0 || s + 1 == steps) record(t);
    }
    return traj;
}

namespace {

struct FlowState {
    cmat g;
    cmat s;
};

FlowState flow_rhs(const FlowState& y) {
    return {-2.0 * y.s * y.s.conjugate(), -(y.s + y.s * y.g.conjugate() + y.g * y.s)};
}

FlowState rk4_flow(const FlowState& y, double h) {
    auto axpy = [](const FlowState& a, double c, const FlowState& k) {
        return FlowState{a.g + c * k.g, a.s + c * k.s};
    };
    FlowState k1 = flow_rhs(y);
    FlowState k2 = flow_rhs(axpy(y, 0.5 * h, k1));
    FlowState k3 = flow_rhs(axpy(y, 0.5 * h, k2));
    FlowState k4 = flow_rhs(axpy(y, h, k3));
    FlowState out{y.g + (h / 6.0) * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g),
                  y.s + (h / 6.0) * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s)};
    out.g = 0.5 * (out.g + out.g.adjoint()).eval();
    out.s = 0.5 * (out.s + out.s.transpose()).eval();
    return out;
}

// Cayley factor (1 - hK/2)^{-1}(1 + hK/2) for K = [[0, s], [conj s, 0]], exactly symplectic
Symplectomorphism cayley_factor(const cmat& s, double h) {
    const auto n = s.rows();
    cmat K = cmat::Zero(2 * n, 2 * n);
    K.topRightCorner(n, n) = s;
    K.bottomLeftCorner(n, n) = s.conjugate();
    cmat I = cmat::Identity(2 * n, 2 * n);
    cmat C = (I - 0.5 * h * K).partialPivLu().solve(I + 0.5 * h * K);
    return {C.topLeftCorner(n, n), C.topRightCorner(n, n)};
}

}  // namespace

DiagonalizeResult diagonalize_gamma(const QuasifreeState& rho, double tol, const DiagonalizeOptions& opt) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    auto rep = check_admissible(rho);
    if (!rep.admissible) throw std::domain_error("Gamma is not positive semidefinite");
    const int n = rho.grid.sites;
    const double dv = rho.grid.cell_volume;
    const cmat Gam0 = build_gamma_operator(rho);

    DiagonalizeResult res;
    res.U = Symplectomorphism::identity(n);
    FlowState y{Gam0.topLeftCorner(n, n), Gam0.topRightCorner(n, n)};
    const double s0 = y.s.norm();
    const double t_max = (s0 > tol ? std::log(s0 / tol) : 0.0) + 10.0;
    const double stop = 1e-2 * tol;
    cmat gp = y.g;

    for (int pass = 0; pass < opt.max_passes; ++pass) {
        res.passes = pass + 1;
        Symplectomorphism Y = Symplectomorphism::identity(n);
        double t = 0.0;
        const double sp = y.s.norm();
        const double tmax_pass = (sp > stop ? std::log(sp / stop) : 0.0) + 10.0;
        if (pass == 0 && opt.log_decay) res.decay_log.emplace_back(0.0, sp);
        while (y.s.norm() >= stop) {
            if (t > std::max(t_max, tmax_pass)) throw std::runtime_error("diagonalization flow did not converge");
            FlowState y1 = rk4_flow(y, opt.dt);
            Y = Y * cayley_factor(0.5 * (y.s + y1.s), opt.dt);
            y = std::move(y1);
            t += opt.dt;
            if (pass == 0 && opt.log_decay) res.decay_log.emplace_back(t, y.s.norm());
        }
        res.U = res.U * Y;
        gp = 0.5 * (y.g + y.g.adjoint());

        // remaining off-diagonal part of U^{-1} Gamma U^{-*}
        cmat Xi = res.U.inverse().full();
        cmat Gk = Xi * Gam0 * Xi.adjoint();
        y.g = 0.5 * (Gk.topLeftCorner(n, n) + Gk.topLeftCorner(n, n).adjoint());
        y.s = 0.5 * (Gk.topRightCorner(n, n) + Gk.topRightCorner(n, n).transpose());
        if (y.s.norm() < stop) {
            gp = y.g;
            break;
        }
    }

    Eigen::SelfAdjointEigenSolver<cmat> es(gp);
    rvec ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0) {
            res.clip = std::max(res.clip, -ev(i));
            ev(i) = 0.0;
        }
    gp = es.eigenvectors() * ev.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
    gp = 0.5 * (gp + gp.adjoint()).eval();
    res.spectrum = ev;
    res.gamma_prime = gp / dv;
    res.residual = (Gam0 - transform_gamma(res.U, gp)).norm();
    return res;
}

Symplectomorphism random_symplectomorphism(const TorusGrid& grid, std::mt19937_64& rng, double scale,
                                           double bandwidth) {
    const int n = grid.sites;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    rvec env = rvec::Ones(n);
    if (bandwidth > 0.0)
        env = (-laplacian_symbol(grid).array() / (2.0 * bandwidth * bandwidth)).exp();

    auto random_unitary = [&]() {
        cmat h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h(i, j) = cxd(normal(rng), normal(rng)) * env(i) * env(j) * scale;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<cmat> es(h);
        cvec ph = (cxd(0, 1) * es.eigenvalues().cast<cxd>()).array().exp();
        return cmat(es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
    };
    cmat A = random_unitary();
    cmat B = random_unitary();
    rvec r(n);
    for (int p = 0; p < n; ++p) r(p) = scale * unif(rng) * env(p);
    cvec ch = r.array().cosh().cast<cxd>();
    cvec sh = r.array().sinh().cast<cxd>();
    cmat uf = A * ch.asDiagonal() * B;
    cmat vf = A * sh.asDiagonal() * B.conjugate();
    const cmat F = unitary_dft(grid);
    return {F.adjoint() * uf * F, F.adjoint() * vf * F.conjugate()};
}

std::vector<BogoliubovMode> bogoliubov_modes(const TorusGrid& grid, double c_h, cxd c_k) {
    std::vector<BogoliubovMode> out;
    rvec k2 = laplacian_symbol(grid);
    const double bb = std::abs(c_k);
    for (int p = 0; p < grid.sites; ++p) {
        BogoliubovMode m;
        m.mode = p;
        m.k = grid.modes.row(p).transpose();
        m.a = k2(p) + c_h;
        m.b = c_k;
        const double gap = m.a * m.a - bb * bb;
        const double scale_tol = 1e-14 * std::max(1.0, m.a * m.a);
        if (bb == 0.0) {
            m.E = m.a;
            m.u = 1.0;
            m.v = 0.0;
            m.stable = m.a >= 0.0;
        } else if (std::abs(gap) <= scale_tol && m.a >= 0.0) {
            m.E = 0.0;
            m.gapless = true;
            m.u = 1.0;
            m.v = 0.0;
        } else if (gap < 0.0 || m.a < 0.0) {
            m.stable = false;
            m.E = std::sqrt(std::abs(gap));
            m.u = 1.0;
            m.v = 0.0;
        } else {
            m.E = std::sqrt(gap);
            const double u = std::sqrt((m.a + m.E) / (2.0 * m.E));
            m.u = u;
            m.v = (m.a - m.E) * u / m.b;
        }
        out.push_back(m);
    }
    return out;
}

std::vector<BogoliubovMode> bogoliubov_modes(double n_total, double n0, double g, const TorusGrid& grid) {
    if (n0 < 0.0 || n0 > n_total) throw std::invalid_argument("need 0 <= n0 <= n_total");
    return bogoliubov_modes(grid, g * n0, cxd(g * n0, 0.0));
}

Symplectomorphism modes_symplectomorphism(const TorusGrid& grid, const std::vector<BogoliubovMode>& modes) {
    const int n = grid.sites;
    if (static_cast<int>(modes.size()) != n) throw std::invalid_argument("one mode per grid mode required");
    cvec uu(n), vv(n);
    for (int p = 0; p < n; ++p) {
        bool ok = modes[p].stable && !modes[p].gapless;
        uu(p) = ok ? modes[p].u : cxd(1.0);
        vv(p) = ok ? modes[p].v : cxd(0.0);
    }
    const cmat F = unitary_dft(grid);
    // u_j = u^* zeta_j and v_j = -v^* zeta_j on plane waves zeta_j, so
    // u = F^* diag(conj u_k) F, v = -F^* diag(conj v_k) F; the diagonalizer is the adjoint
    Symplectomorphism modal{F.adjoint() * uu.conjugate().asDiagonal() * F,
                            -F.adjoint() * vv.conjugate().asDiagonal() * F};
    return modal.adjoint();
}

void write_mode_table(const std::string& path, const std::vector<BogoliubovMode>& modes) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    const int d = modes.empty() ? 0 : static_cast<int>(modes.front().k.size());
    const std::string names[] = {"kx", "ky", "kz"};
    for (int a = 0; a < d; ++a) os << (a < 3 ? names[a] : "k" + std::to_string(a)) << ',';
    // stable_flag: 1 stable, 2 gapless, 0 unstable
    os << "E,re_u,im_u,re_v,im_v,stable_flag\n";
    for (const auto& m : modes) {
        for (int a = 0; a < d; ++a) os << m.k(a) << ',';
        os << m.E << ',' << m.u.real() << ',' << m.u.imag() << ',' << m.v.real() << ',' << m.v.imag() << ','
           << (m.stable ? (m.gapless ? 2 : 1) : 0) << '\n';
    }
}

}  // namespace hfb
