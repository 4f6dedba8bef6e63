#include "hfb/gibbs.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hfb {

namespace {

// distance of mu below g n, rejecting mu >= g n
double gap_of(double mu, const GibbsParams& p) {
    const double gap = p.g * p.n - mu;
    if (!(gap > 0.0)) throw std::domain_error("lattice sum needs mu < g n");
    return gap;
}

double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double lattice_sum_gap(double gap, const GibbsParams& p) {
    const rvec k2 = laplacian_symbol(p.grid);
    double s = 0.0;
    for (int i = 0; i < k2.size(); ++i) s += 1.0 / std::expm1(p.beta * (k2(i) + gap));
    return s / p.grid.volume();
}

double continuum_sum_gap(double gap, const GibbsParams& p) {
    const int d = p.grid.dim;
    const double beta = p.beta;
    auto f = [&](double k) {
        const double x = beta * (k * k + gap);
        if (x == 0.0) return d == 2 ? 1.0 / beta : 0.0;
        return std::pow(k, d - 1) / std::expm1(x);
    };
    const double kmax = std::sqrt(750.0 / beta);
    double err = 0.0;
    double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, kmax, 20, 1e-13, &err);
    return sphere_area(d) * val / std::pow(2.0 * std::numbers::pi, d);
}

// Bisection on gap = g n - mu for target(gap) = n, target decreasing in gap.
template <class Fn>
double bisect_gap(Fn&& target, double n, double lo, double hi, double tol) {
    for (int it = 0; it < 400; ++it) {
        const double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        const double s = target(mid);
        if (std::abs(s - n) <= tol * n) return mid;
        if (s > n)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void validate(const GibbsParams& p) {
    if (!(p.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(p.n > 0.0)) throw std::invalid_argument("density must be positive");
    if (p.g < 0.0) throw std::invalid_argument("coupling must be >= 0");
}

double lattice_sum(double mu, const GibbsParams& p) {
    validate(p);
    return lattice_sum_gap(gap_of(mu, p), p);
}

GibbsSolution solve_mu_L(const GibbsParams& p, double tol) {
    validate(p);
    // the zero mode alone reaches n at this gap
    const double small = std::log1p(1.0 / (p.n * p.grid.volume())) / p.beta;
    double big = std::max(2.0 * small, 1.0 / p.beta);
    while (lattice_sum_gap(big, p) >= p.n) big *= 2.0;
    auto S = [&](double gap) { return lattice_sum_gap(gap, p); };
    const double gap = bisect_gap(S, p.n, small, big, tol);

    GibbsSolution sol;
    sol.mu = p.g * p.n - gap;
    const rvec k2 = laplacian_symbol(p.grid);
    sol.gamma_hat.resize(k2.size());
    for (int i = 0; i < k2.size(); ++i) sol.gamma_hat(i) = 1.0 / std::expm1(p.beta * (k2(i) + gap));
    sol.density_check = sol.gamma_hat.sum() / p.grid.volume();
    sol.condensate_fraction = sol.gamma_hat(p.grid.zero_mode()) / (p.grid.volume() * p.n);
    return sol;
}

double riemann_zeta(double s) {
    if (!(s > 1.0)) throw std::domain_error("zeta series needs s > 1");
    const int M = 64;
    double sum = 0.0;
    for (int j = M - 1; j >= 1; --j) sum += std::pow(j, -s);
    const double m = M;
    // tail: int_M^inf x^{-s} dx + f(M)/2 - sum_k B_2k/(2k)! f^{(2k-1)}(M)
    double tail = std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s);
    const double b2k[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
    double fact = 1.0;   // (2k)!
    double rising = s;   // s (s+1) ... (s+2k-2)
    for (int k = 1; k <= 5; ++k) {
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        tail += b2k[k - 1] / fact * rising * std::pow(m, -s - 2.0 * k + 1.0);
        rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
    }
    return sum + tail;
}

double critical_density(double beta, int d) {
    if (d < 3) throw std::domain_error("critical density needs d >= 3");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    // radial form of (2 pi)^{-d} int dk / (exp(beta k^2) - 1)
    return sphere_area(d) * 0.5 * std::pow(beta, -0.5 * d) * std::tgamma(0.5 * d) * riemann_zeta(0.5 * d) /
           std::pow(2.0 * std::numbers::pi, d);
}

double condensate_fraction(const GibbsParams& p) {
    validate(p);
    const double nc = critical_density(p.beta, p.grid.dim);
    return std::max(0.0, p.n - nc) / p.n;
}

double continuum_sum(double mu, const GibbsParams& p) {
    validate(p);
    if (p.grid.dim < 3) throw std::domain_error("continuum sum needs d >= 3");
    const double gap = p.g * p.n - mu;
    if (gap < 0.0) throw std::domain_error("continuum sum needs mu <= g n");
    return continuum_sum_gap(gap, p);
}

double solve_mu_inf(const GibbsParams& p, double tol) {
    validate(p);
    const double nc = critical_density(p.beta, p.grid.dim);
    if (p.n >= nc) return p.g * p.n;
    double big = 1.0 / p.beta;
    while (continuum_sum_gap(big, p) >= p.n) big *= 2.0;
    auto S = [&](double gap) { return continuum_sum_gap(gap, p); };
    return p.g * p.n - bisect_gap(S, p.n, 0.0, big, tol);
}

SweepResult thermodynamic_sweep(const GibbsParams& tmpl, const std::vector<double>& L_list, double tol) {
    validate(tmpl);
    for (std::size_t i = 1; i < L_list.size(); ++i)
        if (!(L_list[i] > L_list[i - 1])) throw std::invalid_argument("L list must be ascending");
    SweepResult res;
    const bool cond = tmpl.grid.dim >= 3;
    if (cond) {
        res.n_c = critical_density(tmpl.beta, tmpl.grid.dim);
        res.condensate_fraction_predicted = condensate_fraction(tmpl);
        res.mu_inf = solve_mu_inf(tmpl);
    }
    for (double L : L_list) {
        GibbsParams p = tmpl;
        p.grid = make_grid(tmpl.grid.dim, tmpl.grid.points_per_side, L);
        GibbsSolution sol = solve_mu_L(p, tol);
        SweepRow row;
        row.L = L;
        row.mu = sol.mu;
        row.n_check = sol.density_check;
        row.zero_mode_fraction = sol.condensate_fraction;
        row.s_inf_residual = cond ? continuum_sum(sol.mu, p) - p.n : std::numeric_limits<double>::quiet_NaN();
        res.rows.push_back(row);
    }
    return res;
}

QuasifreeState gibbs_state(const GibbsParams& p, const GibbsSolution& sol) {
    QuasifreeState r = vacuum_state(p.grid);
    const cmat F = unitary_dft(p.grid);
    cmat G = F.adjoint() * sol.gamma_hat.cast<cxd>().asDiagonal() * F;
    r.gamma = 0.5 * (G + G.adjoint()) / p.grid.cell_volume;
    return r;
}

void write_sweep_csv(const std::string& path, const SweepResult& res) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << std::setprecision(17);
    os << "L,mu_L,n_check,zero_mode_fraction,s_inf_residual\n";
    for (const auto& r : res.rows)
        os << r.L << ',' << r.mu << ',' << r.n_check << ',' << r.zero_mode_fraction << ',' << r.s_inf_residual
           << '\n';
}

}  // namespace hfb
