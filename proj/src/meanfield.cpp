#include "hfb/meanfield.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace hfb {

namespace {

void check_kernel(const TorusGrid& g, const GridKernel& a) {
    if (a.rows() != g.sites || a.cols() != g.sites)
        throw std::invalid_argument("kernel shape does not match grid");
}

}  // namespace

PotentialPair make_grid_potential(const TorusGrid& grid, const rvec& v) {
    if (v.size() != grid.sites) throw std::invalid_argument("pair potential size does not match grid");
    PotentialPair p;
    p.mode = PairMode::grid_function;
    p.pair.resize(grid.sites);
    for (int j = 0; j < grid.sites; ++j) p.pair(j) = 0.5 * (v(j) + v(grid.reflected_site(j)));
    p.pair_fourier = to_fourier(grid, p.pair.cast<cxd>());
    p.pair_matrix.resize(grid.sites, grid.sites);
    for (int i = 0; i < grid.sites; ++i)
        for (int j = 0; j < grid.sites; ++j) p.pair_matrix(i, j) = p.pair(grid.displacement_site(i, j));
    return p;
}

PotentialPair make_contact_potential(double g) {
    if (g < 0.0) throw std::invalid_argument("contact coupling must be >= 0");
    PotentialPair p;
    p.mode = PairMode::contact;
    p.g = g;
    return p;
}

std::shared_ptr<const rmat> shared_kinetic_matrix(const TorusGrid& grid) {
    static std::mutex m;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<const rmat>> cache;
    std::lock_guard<std::mutex> lock(m);
    auto key = std::make_tuple(grid.dim, grid.points_per_side, grid.half_length);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto D = std::make_shared<const rmat>(kinetic_matrix(grid));
    cache[key] = D;
    return D;
}

GridField OneBodyOperator::apply(const TorusGrid& grid, const GridField& f) const {
    GridField out = GridField::Zero(grid.sites);
    if (kinetic) out += apply_minus_laplacian(grid, f);
    if (mult.size()) out += mult.cwiseProduct(f);
    if (nonlocal.size()) out += grid.cell_volume * (nonlocal * f);
    return out;
}

cmat OneBodyOperator::matrix(const TorusGrid& grid) const {
    cmat M = cmat::Zero(grid.sites, grid.sites);
    if (kinetic) M += shared_kinetic_matrix(grid)->cast<cxd>();
    if (mult.size()) M.diagonal() += mult;
    if (nonlocal.size()) M += grid.cell_volume * nonlocal;
    return M;
}

GridKernel OneBodyOperator::kernel(const TorusGrid& grid) const {
    return matrix(grid) / grid.cell_volume;
}

GridField diag_of(const GridKernel& alpha) {
    if (alpha.rows() != alpha.cols()) throw std::invalid_argument("diag_of needs a square kernel");
    return alpha.diagonal();
}

GridField convolve(const TorusGrid& grid, const PotentialPair& pot, const GridField& n) {
    if (pot.mode == PairMode::contact) return pot.g * n;
    cvec nh = to_fourier(grid, n);
    return from_fourier(grid, pot.pair_fourier.cwiseProduct(nh));
}

GridKernel hadamard_v(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& alpha) {
    check_kernel(grid, alpha);
    if (pot.mode == PairMode::contact) {
        GridKernel out = GridKernel::Zero(grid.sites, grid.sites);
        out.diagonal() = (pot.g / grid.cell_volume) * alpha.diagonal();
        return out;
    }
    return pot.pair_matrix.cast<cxd>().cwiseProduct(alpha);
}

OneBodyOperator b_op(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& gamma) {
    check_kernel(grid, gamma);
    OneBodyOperator b;
    GridField n = diag_of(gamma);
    if (pot.mode == PairMode::contact) {
        b.mult = 2.0 * pot.g * n;
        return b;
    }
    b.mult = convolve(grid, pot, n);
    b.nonlocal = hadamard_v(grid, pot, gamma);
    return b;
}

OneBodyOperator k_op(const TorusGrid& grid, const PotentialPair& pot, const GridKernel& sigma) {
    check_kernel(grid, sigma);
    OneBodyOperator k;
    if (pot.mode == PairMode::contact) {
        k.mult = pot.g * diag_of(sigma);
        return k;
    }
    k.nonlocal = hadamard_v(grid, pot, sigma);
    return k;
}

OneBodyOperator h_op(const TorusGrid& grid, const PotentialPair& pot, const GridField& V,
                     const GridKernel& gamma) {
    if (V.size() && V.size() != grid.sites) throw std::invalid_argument("external potential size mismatch");
    OneBodyOperator h = b_op(grid, pot, gamma);
    h.kinetic = true;
    if (V.size()) h.mult = h.mult.size() ? GridField(h.mult + V) : V;
    return h;
}

GridKernel projector_kernel(const GridField& phi) { return phi * phi.adjoint(); }

GridKernel pair_kernel(const GridField& phi) { return phi * phi.transpose(); }

}  // namespace hfb
