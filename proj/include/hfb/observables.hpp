#pragma once

#include "hfb/meanfield.hpp"
#include "hfb/states.hpp"

namespace hfb {

// dx^d sum_x (gamma(x;x) + |phi(x)|^2)
double particle_number(const QuasifreeState& rho);

// Tr[h gamma^phi] + Tr[b[|phi><phi|] gamma] + 1/2 Tr[b[gamma] gamma] + 1/2 int int v |sigma^phi|^2
cxd energy_complex(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);
double energy(const QuasifreeState& rho, const PotentialPair& pot, const GridField& V);

// contact form: Tr[h gamma^phi] + g int (2 n |phi|^2 + n^2 + |w|^2 / 2), n = d(gamma), w = d(sigma^phi)
double energy_contact(const QuasifreeState& rho, double g, const GridField& V);

// Reconstruction from mode-form blocks (u, v) and g' (all acting on site values):
// G = u^* g' u + v^T (1 + conj g') conj v, Sigma = u^* g' v + v^T (1 + conj g') conj u.
struct Reconstruction {
    cmat G;
    cmat Sigma;
};
Reconstruction reconstruct(const cmat& u, const cmat& v, const cmat& gamma0p);
QuasifreeState reconstructed_state(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                                   const cmat& gamma0p);

// H_{g'}(phi, u, v); the check rejects (u, v) with symplectic violation above 1e-8.
double hamiltonian_functional(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                              const cmat& gamma0p, const PotentialPair& pot, const GridField& V,
                              bool check = true);

struct GradientReport {
    // central finite differences against the evaluated closed forms
    double phi_rel = 0.0;
    double u_rel = 0.0;
    double v_rel = 0.0;
    // closed form for dH/d<phi| against i dphi/dt from hfb_rhs on the reconstructed state
    double phi_vs_rhs = 0.0;
    // closed forms against g' i du + v conj(k)/2 and -g' i dv + v conj(h) + u k/2,
    // with i du = u h + v conj(k), i dv = -u k - v conj(h)
    double u_vs_flow = 0.0;
    double v_vs_flow = 0.0;
    double max_rel() const;
};

GradientReport gradient_check(const TorusGrid& grid, const GridField& phi, const cmat& u, const cmat& v,
                              const cmat& gamma0p, const PotentialPair& pot, const GridField& V,
                              double step = 1e-5);

}  // namespace hfb
