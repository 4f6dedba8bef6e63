#pragma once

#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hfb/meanfield.hpp"
#include "hfb/states.hpp"

namespace hfb {

// [[u, v], [conj v, conj u]] acting on site values.
struct Symplectomorphism {
    cmat u;
    cmat v;

    static Symplectomorphism identity(int n);
    cmat full() const;
    Symplectomorphism adjoint() const;
    // S U^* S
    Symplectomorphism inverse() const;
    Symplectomorphism operator*(const Symplectomorphism& o) const;
};

// max Frobenius residual of uu*-vv*=1, u*u-v^T conj v=1, u*v=v^T conj u, uv^T=vu^T
double check_symplectic(const Symplectomorphism& U);

// [[a, b], [conj b, conj a]] acting on site values.
struct BlockHamiltonian {
    cmat a;
    cmat b;
    cmat full() const;
};

BlockHamiltonian lambda_of_state(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);

// S Lambda Gamma - Gamma Lambda S for a kernel Gamma, S = diag(1, -1)
cmat gamma_form_rhs(const cmat& Gamma, const BlockHamiltonian& lam);

// Gamma = U diag(g', 1 + conj g') U^* with g' Hermitian, all in site-value form
cmat transform_gamma(const Symplectomorphism& U, const cmat& gprime);

using LambdaPath = std::function<BlockHamiltonian(double)>;

enum class SymplecticScheme { magnus4, rk4 };

struct SymplecticTrajectory {
    std::vector<double> t;
    std::vector<Symplectomorphism> U;
    double max_violation = 0.0;
};

// Solves i dX/dt = S Lambda(t) X from X(0) = U0; the violation ceiling 1e-6 aborts.
SymplecticTrajectory evolve_symplectomorphism(
    const Symplectomorphism& U0, const LambdaPath& path, double dt, double T,
    SymplecticScheme scheme = SymplecticScheme::magnus4, int stride = 1,
    const std::function<void(double, const Symplectomorphism&)>& observer = {});

struct DiagonalizeOptions {
    double dt = 0.05;
    int max_passes = 6;
    bool log_decay = true;
};

struct DiagonalizeResult {
    GridKernel gamma_prime;  // kernel
    rvec spectrum;           // eigenvalues of dx^d gamma', ascending
    Symplectomorphism U;     // Gamma = U diag(g', 1 + conj g') U^*
    double residual = 0.0;   // Frobenius norm in site-value form
    double clip = 0.0;
    int passes = 0;
    std::vector<std::pair<double, double>> decay_log;  // (t, ||sigma_t||_HS) of the first pass
};

DiagonalizeResult diagonalize_gamma(const QuasifreeState& rho, double tol,
                                    const DiagonalizeOptions& opt = {});

// u = A cosh(r) B, v = A sinh(r) conj(B) with A = exp(iH_A), B = exp(iH_B)
// in the Fourier basis; envelope weights multiply H_A, H_B and r.
Symplectomorphism random_symplectomorphism(const TorusGrid& grid, std::mt19937_64& rng, double scale,
                                           double bandwidth = 0.0);

struct BogoliubovMode {
    int mode = 0;
    rvec k;
    double a = 0.0;
    cxd b = 0.0;
    double E = 0.0;
    cxd u = 1.0;
    cxd v = 0.0;
    bool stable = true;
    bool gapless = false;
};

// Per-mode problem a_k = |k|^2 + c_h, b_k = c_k.
std::vector<BogoliubovMode> bogoliubov_modes(const TorusGrid& grid, double c_h, cxd c_k);
// Homogeneous contact gas with phi = sqrt(n0), sigma(x,x) neglected and mu fixed by the
// condensate equation, mu = g n0 + 2g (n_total - n0): c_h = c_k = g n0.
std::vector<BogoliubovMode> bogoliubov_modes(double n_total, double n0, double g, const TorusGrid& grid);

// Translation invariant symplectomorphism built from the mode amplitudes.
Symplectomorphism modes_symplectomorphism(const TorusGrid& grid, const std::vector<BogoliubovMode>& modes);

void write_mode_table(const std::string& path, const std::vector<BogoliubovMode>& modes);

}  // namespace hfb
