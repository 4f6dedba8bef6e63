#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hfb {

using cxd = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

// Fields are value vectors over sites, kernels are site x site matrices.
// Sites are stored row-major: index = sum_a i_a N^(d-1-a), x_a = -L + i_a dx.
using GridField = cvec;
using GridKernel = cmat;

// Periodic lattice on [-L, L]^d with N points per side.
struct TorusGrid {
    int dim = 1;
    int points_per_side = 2;
    double half_length = 1.0;
    double spacing = 1.0;
    double cell_volume = 1.0;
    int sites = 2;
    // modes(p, a) = (pi/L) m_a with m_a in -N/2..N/2-1, lexicographic in p
    rmat modes;

    double volume() const { return sites * cell_volume; }
    std::vector<int> site_coords(int index) const;
    int site_index(const std::vector<int>& coords) const;
    // coordinate of site index along axis a
    double position(int index, int axis) const;
    int zero_mode() const;
    // site index of -x_j
    int reflected_site(int index) const;
    // site index representing the periodic displacement x_i - x_j
    int displacement_site(int i, int j) const;
};

TorusGrid make_grid(int d, int N, double L);

// f^(k) = dx^d sum_x f(x) e^{-ik.x}, indexed by mode
GridField to_fourier(const TorusGrid& grid, const GridField& f);
// f(x) = |Lambda|^{-1} sum_k f^(k) e^{ik.x}
GridField from_fourier(const TorusGrid& grid, const GridField& fhat);

// |k|^2 per mode
rvec laplacian_symbol(const TorusGrid& grid);

// -Delta applied spectrally
GridField apply_minus_laplacian(const TorusGrid& grid, const GridField& f);

// Matrix of -Delta acting on site values (real symmetric).
rmat kinetic_matrix(const TorusGrid& grid);

// Unitary DFT between site values and mode amplitudes, F_{pj} = e^{-ik_p.x_j}/sqrt(N^d).
cmat unitary_dft(const TorusGrid& grid);

// Plane wave e^{ik_p.x} sampled on sites.
GridField plane_wave(const TorusGrid& grid, int mode);

}  // namespace hfb
