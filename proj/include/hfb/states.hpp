#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfb/grid.hpp"

namespace hfb {

// (phi, gamma, sigma) with gamma and sigma stored as kernels.
struct QuasifreeState {
    TorusGrid grid;
    GridField phi;
    GridKernel gamma;
    GridKernel sigma;
};

QuasifreeState vacuum_state(const TorusGrid& grid);
void check_shapes(const QuasifreeState& rho);

// Matrices acting on site values: G = dx^d gamma, Sigma = dx^d sigma.
cmat gamma_matrix(const QuasifreeState& rho);
cmat sigma_matrix(const QuasifreeState& rho);

struct AdmissibilityReport {
    double herm_violation = 0.0;   // max |gamma - gamma^*|
    double psd_violation = 0.0;    // max(0, -min eig G)
    double symm_violation = 0.0;   // max |sigma - sigma^T|
    double schur_violation = 0.0;  // max(0, -min eig (G - Sigma (1+conj G)^{-1} Sigma^*))
    double trace_violation = 0.0;  // max(0, ||Sigma||_{H^1}^2/2 - ||M G M||_1 (1 + Tr G)), relative
    double tol_psd = 0.0;          // 1e-10 * ||Gamma||
    bool admissible = true;

    double max_violation() const;
};

// entrywise tolerances are relative to max(1, max |entry|)
AdmissibilityReport check_admissible(const QuasifreeState& rho, double rel_tol = 1e-10,
                                     double entry_tol = 1e-12);

// Gamma = [[gamma, sigma], [conj sigma, dx^{-d} + conj gamma]] as a kernel.
cmat build_gamma_matrix(const QuasifreeState& rho);
// same, acting on site values: [[G, Sigma], [conj Sigma, 1 + conj G]]
cmat build_gamma_operator(const QuasifreeState& rho);
void require_admissible(const QuasifreeState& rho);

struct FieldOp {
    int site = 0;
    bool create = false;
};
using FieldOpSpec = std::vector<FieldOp>;

cxd wick_expectation(const QuasifreeState& rho, const FieldOpSpec& ops);

// Opt-in drift repair: hermitize gamma, clip its negative eigenvalues, symmetrize sigma.
// Returns the clipped eigenvalue magnitude.
double repair_state(QuasifreeState& rho);

struct RandomStateOptions {
    double scale = 1.0;
    // Gaussian envelope exp(-|k|^2 / (2 w^2)) on all mode amplitudes; 0 disables it
    double bandwidth = 0.0;
    bool with_condensate = true;
    bool with_pairing = true;
};

QuasifreeState sample_random_state(const TorusGrid& grid, std::uint64_t seed, double scale);
QuasifreeState sample_random_state(const TorusGrid& grid, std::uint64_t seed, const RandomStateOptions& opt);

// Single-mode squeezed pure state on the constant mode.
QuasifreeState squeezed_state(const TorusGrid& grid, double r);

// Binary snapshot, layout documented in docs/snapshot_format.md.
void write_snapshot(const std::string& path, const QuasifreeState& rho);
QuasifreeState read_snapshot(const std::string& path);

}  // namespace hfb
