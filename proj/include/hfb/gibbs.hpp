#pragma once

#include <string>
#include <vector>

#include "hfb/grid.hpp"
#include "hfb/states.hpp"

namespace hfb {

struct GibbsParams {
    double beta = 1.0;
    double n = 1.0;
    double g = 0.0;
    TorusGrid grid;
};

struct GibbsSolution {
    double mu = 0.0;
    rvec gamma_hat;  // 1/(exp(beta(|k|^2 + g n - mu)) - 1) per mode
    double density_check = 0.0;
    double condensate_fraction = 0.0;  // zero-mode share |Lambda|^{-1} gamma_hat(0) / n
};

void validate(const GibbsParams& p);

// S_L(mu) = |Lambda|^{-1} sum_k 1/(exp(beta(k^2 + g n - mu)) - 1), mu < g n
double lattice_sum(double mu, const GibbsParams& p);

// Bisection for n = S_L(mu); |S_L(mu) - n| <= tol n.
GibbsSolution solve_mu_L(const GibbsParams& p, double tol = 1e-12);

// zeta(s) for s > 1 by partial sums with an Euler-Maclaurin tail
double riemann_zeta(double s);

// n_c = (2 pi)^{-d} int dk 1/(exp(beta k^2) - 1), d >= 3
double critical_density(double beta, int d);

// max(0, n - n_c)/n
double condensate_fraction(const GibbsParams& p);

// S_inf(mu) = (2 pi)^{-d} int dk / (exp(beta(k^2 + g n - mu)) - 1), mu <= g n, d >= 3
double continuum_sum(double mu, const GibbsParams& p);

// mu_inf: solves n = S_inf(mu) below n_c, equals g n at and above it
double solve_mu_inf(const GibbsParams& p, double tol = 1e-13);

struct SweepRow {
    double L = 0.0;
    double mu = 0.0;
    double n_check = 0.0;
    double zero_mode_fraction = 0.0;
    double s_inf_residual = 0.0;  // S_inf(mu_L) - n
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double n_c = 0.0;
    double mu_inf = 0.0;
    double condensate_fraction_predicted = 0.0;
};

// The template grid supplies d and N; each L gets its own grid.
SweepResult thermodynamic_sweep(const GibbsParams& tmpl, const std::vector<double>& L_list, double tol = 1e-12);

// Translation invariant state with the Gibbs gamma_hat; phi = 0, sigma = 0.
QuasifreeState gibbs_state(const GibbsParams& p, const GibbsSolution& sol);

void write_sweep_csv(const std::string& path, const SweepResult& res);

}  // namespace hfb
