#pragma once

#include <memory>

#include "hfb/grid.hpp"

namespace hfb {

enum class PairMode { grid_function, contact };

// Even pair potential v(x). In contact mode only g is used (v = g delta).
struct PotentialPair {
    PairMode mode = PairMode::contact;
    double g = 0.0;
    rvec pair;          // v at sites (grid mode)
    cvec pair_fourier;  // v^(k) per mode (grid mode)
    rmat pair_matrix;   // v(x_i - x_j), minimal image (grid mode)
};

// Symmetrizes v <- (v(x) + v(-x))/2.
PotentialPair make_grid_potential(const TorusGrid& grid, const rvec& v);
PotentialPair make_contact_potential(double g);

// h = kinetic (-Delta) + multiplication + nonlocal kernel.
struct OneBodyOperator {
    bool kinetic = false;
    GridField mult;       // empty means zero
    GridKernel nonlocal;  // empty means zero, kernel convention

    GridField apply(const TorusGrid& grid, const GridField& f) const;
    // matrix acting on site values: D + diag(mult) + dx^d nonlocal
    cmat matrix(const TorusGrid& grid) const;
    // kernel of the operator: matrix / dx^d
    GridKernel kernel(const TorusGrid& grid) const;
};

std::shared_ptr<const rmat> shared_kinetic_matrix(const TorusGrid& grid);

GridField diag_of(const GridKernel& alpha);

// (v * n)(x) = int v(x-y) n(y) dy, computed spectrally
GridField convolve(const TorusGrid& grid, const PotentialPair& pot, const GridField& n);

// v(x-y) alpha(x;y); contact mode gives g d(alpha) on the diagonal as a kernel
GridKernel hadamard_v(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& alpha);

OneBodyOperator b_op(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& gamma);
OneBodyOperator k_op(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& sigma);
OneBodyOperator h_op(const TorusGrid& grid, const PotentialPair& pot, const GridField& V,
                     const GridKernel& gamma);

// kernel of |phi><phi| and phi (x) phi
GridKernel projector_kernel(const GridField& phi);
GridKernel pair_kernel(const GridField& phi);

}  // namespace hfb
