#include "hfb/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "hfb/symplectic.hpp"

namespace hfb {

namespace {

double max_abs(const cmat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double min_eig_hermitian(const cmat& m) {
    if (m.size() == 0) return 0.0;
    cmat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double op_norm_hermitian(const cmat& m) {
    if (m.size() == 0) return 0.0;
    cmat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double trace_norm_hermitian(const cmat& m) {
    if (m.size() == 0) return 0.0;
    cmat h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<cmat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

// full two-point function omega(a b)
cxd two_point(const QuasifreeState& r, const FieldOp& a, const FieldOp& b) {
    const double dv = r.grid.cell_volume;
    const int x = a.site, y = b.site;
    if (!a.create && !b.create) return r.sigma(x, y) + r.phi(x) * r.phi(y);
    if (a.create && b.create) return std::conj(r.sigma(y, x) + r.phi(y) * r.phi(x));
    if (a.create && !b.create) return r.gamma(y, x) + std::conj(r.phi(x)) * r.phi(y);
    cxd val = r.gamma(x, y) + r.phi(x) * std::conj(r.phi(y));
    if (x == y) val += 1.0 / dv;
    return val;
}

cxd one_point(const QuasifreeState& r, const FieldOp& a) {
    return a.create ? std::conj(r.phi(a.site)) : r.phi(a.site);
}

}  // namespace

double AdmissibilityReport::max_violation() const {
    return std::max({herm_violation, psd_violation, symm_violation, schur_violation, trace_violation});
}

QuasifreeState vacuum_state(const TorusGrid& grid) {
    QuasifreeState r;
    r.grid = grid;
    r.phi = GridField::Zero(grid.sites);
    r.gamma = GridKernel::Zero(grid.sites, grid.sites);
    r.sigma = GridKernel::Zero(grid.sites, grid.sites);
    return r;
}

void check_shapes(const QuasifreeState& r) {
    const int n = r.grid.sites;
    if (r.phi.size() != n || r.gamma.rows() != n || r.gamma.cols() != n || r.sigma.rows() != n ||
        r.sigma.cols() != n)
        throw std::invalid_argument("state arrays do not match grid");
}

cmat gamma_matrix(const QuasifreeState& r) { return r.grid.cell_volume * r.gamma; }
cmat sigma_matrix(const QuasifreeState& r) { return r.grid.cell_volume * r.sigma; }

AdmissibilityReport check_admissible(const QuasifreeState& r, double rel_tol, double entry_tol) {
    check_shapes(r);
    AdmissibilityReport rep;
    const int n = r.grid.sites;
    const cmat G = gamma_matrix(r);
    const cmat S = sigma_matrix(r);

    rep.herm_violation = max_abs(r.gamma - r.gamma.adjoint());
    rep.symm_violation = max_abs(r.sigma - r.sigma.transpose());

    cmat Gam = build_gamma_operator(r);
    rep.tol_psd = rel_tol * op_norm_hermitian(Gam);

    rep.psd_violation = std::max(0.0, -min_eig_hermitian(G));

    cmat one_plus = cmat::Identity(n, n) + G.conjugate();
    cmat schur = G - S * one_plus.ldlt().solve(S.adjoint());
    rep.schur_violation = std::max(0.0, -min_eig_hermitian(schur));

    // 1/2 ||sigma||_{H^1_s}^2 <= ||M gamma M||_1 (1 + Tr gamma), M^2 = 1 - Lap, in Fourier modes
    const cmat F = unitary_dft(r.grid);
    const rvec m2 = (1.0 + laplacian_symbol(r.grid).array()).matrix();
    const rvec m = m2.cwiseSqrt();
    const cmat Sh = F * S * F.transpose();
    double hs1 = 0.0;
    for (int q = 0; q < n; ++q)
        for (int p = 0; p < n; ++p) hs1 += (m2(p) + m2(q)) * std::norm(Sh(p, q));
    const cmat W = m.asDiagonal() * (F * G * F.adjoint()) * m.asDiagonal();
    const double tr = std::real(G.trace());
    const double bound = trace_norm_hermitian(W) * (1.0 + tr);
    rep.trace_violation = std::max(0.0, 0.5 * hs1 - bound * (1.0 + rel_tol)) / std::max(1.0, bound);

    const double etol_g = entry_tol * std::max(1.0, max_abs(r.gamma));
    const double etol_s = entry_tol * std::max(1.0, max_abs(r.sigma));
    rep.admissible = rep.herm_violation <= etol_g && rep.symm_violation <= etol_s &&
                     rep.psd_violation <= rep.tol_psd && rep.schur_violation <= rep.tol_psd &&
                     rep.trace_violation <= rel_tol;
    return rep;
}

cmat build_gamma_operator(const QuasifreeState& r) {
    const int n = r.grid.sites;
    const cmat G = gamma_matrix(r);
    const cmat S = sigma_matrix(r);
    cmat Gam(2 * n, 2 * n);
    Gam.topLeftCorner(n, n) = G;
    Gam.topRightCorner(n, n) = S;
    Gam.bottomLeftCorner(n, n) = S.conjugate();
    Gam.bottomRightCorner(n, n) = cmat::Identity(n, n) + G.conjugate();
    return Gam;
}

cmat build_gamma_matrix(const QuasifreeState& r) {
    require_admissible(r);
    return build_gamma_operator(r) / r.grid.cell_volume;
}

void require_admissible(const QuasifreeState& r) {
    auto rep = check_admissible(r);
    if (!rep.admissible) throw std::domain_error("state is not admissible");
}

cxd wick_expectation(const QuasifreeState& r, const FieldOpSpec& ops) {
    check_shapes(r);
    for (const auto& o : ops)
        if (o.site < 0 || o.site >= r.grid.sites) throw std::out_of_range("field operator site out of range");
    switch (ops.size()) {
        case 0:
            return 1.0;
        case 1:
            return one_point(r, ops[0]);
        case 2:
            return two_point(r, ops[0], ops[1]);
        case 3: {
            const auto &a = ops[0], &b = ops[1], &c = ops[2];
            return one_point(r, a) * two_point(r, b, c) + one_point(r, b) * two_point(r, a, c) +
                   one_point(r, c) * two_point(r, a, b) -
                   2.0 * one_point(r, a) * one_point(r, b) * one_point(r, c);
        }
        case 4: {
            const auto &a = ops[0], &b = ops[1], &c = ops[2], &d = ops[3];
            return two_point(r, a, b) * two_point(r, c, d) + two_point(r, a, c) * two_point(r, b, d) +
                   two_point(r, a, d) * two_point(r, b, c) -
                   2.0 * one_point(r, a) * one_point(r, b) * one_point(r, c) * one_point(r, d);
        }
        default:
            throw std::invalid_argument("field monomials longer than 4 are not supported");
    }
}

double repair_state(QuasifreeState& r) {
    check_shapes(r);
    r.gamma = 0.5 * (r.gamma + r.gamma.adjoint()).eval();
    r.sigma = 0.5 * (r.sigma + r.sigma.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<cmat> es(r.gamma);
    rvec ev = es.eigenvalues();
    double clip = 0.0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) < 0.0) {
            clip = std::max(clip, -ev(i));
            ev(i) = 0.0;
        }
    if (clip > 0.0) {
        r.gamma = es.eigenvectors() * ev.cast<cxd>().asDiagonal() * es.eigenvectors().adjoint();
        r.gamma = 0.5 * (r.gamma + r.gamma.adjoint()).eval();
    }
    return clip * r.grid.cell_volume;
}

QuasifreeState sample_random_state(const TorusGrid& grid, std::uint64_t seed, double scale) {
    RandomStateOptions opt;
    opt.scale = scale;
    return sample_random_state(grid, seed, opt);
}

QuasifreeState sample_random_state(const TorusGrid& grid, std::uint64_t seed, const RandomStateOptions& opt) {
    QuasifreeState r = vacuum_state(grid);
    if (opt.scale == 0.0) return r;
    const int n = grid.sites;
    const double dv = grid.cell_volume;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    rvec env = rvec::Ones(n);
    if (opt.bandwidth > 0.0) {
        rvec k2 = laplacian_symbol(grid);
        env = (-k2.array() / (2.0 * opt.bandwidth * opt.bandwidth)).exp();
    }

    Symplectomorphism U = opt.with_pairing ? random_symplectomorphism(grid, rng, opt.scale, opt.bandwidth)
                                           : Symplectomorphism::identity(n);

    // occupations in the Fourier basis, then rotated to sites
    const cmat F = unitary_dft(grid);
    rvec occ(n);
    for (int p = 0; p < n; ++p) occ(p) = opt.scale * unif(rng) * env(p);
    cmat gp = F.adjoint() * occ.cast<cxd>().asDiagonal() * F;
    if (!opt.with_pairing) {
        // a random unitary still mixes the modes of gamma
        cmat h = cmat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h(i, j) = cxd(normal(rng), normal(rng)) * env(i) * env(j) * opt.scale;
        h = 0.5 * (h + h.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<cmat> es(h);
        cmat Q = es.eigenvectors();
        cvec ph = (cxd(0, 1) * es.eigenvalues().cast<cxd>()).array().exp();
        cmat A = F.adjoint() * (Q * ph.asDiagonal() * Q.adjoint()) * F;
        gp = A * gp * A.adjoint();
    }
    gp = 0.5 * (gp + gp.adjoint()).eval();

    cmat Gam = transform_gamma(U, gp);
    cmat G = Gam.topLeftCorner(n, n);
    cmat S = Gam.topRightCorner(n, n);
    r.gamma = 0.5 * (G + G.adjoint()) / dv;
    r.sigma = 0.5 * (S + S.transpose()) / dv;

    if (opt.with_condensate) {
        cvec c(n);
        for (int p = 0; p < n; ++p) c(p) = cxd(normal(rng), normal(rng)) * env(p) * opt.scale;
        r.phi = (F.adjoint() * c) / std::sqrt(dv);
    }
    return r;
}

QuasifreeState squeezed_state(const TorusGrid& grid, double rr) {
    QuasifreeState r = vacuum_state(grid);
    const double s = std::sinh(rr), c = std::cosh(rr);
    // constant normalized mode e0 = |Lambda|^{-1/2}; P0 kernel = 1/|Lambda|
    const double k = 1.0 / grid.volume();
    r.gamma.setConstant(s * s * k);
    r.sigma.setConstant(c * s * k);
    return r;
}

}  // namespace hfb
