#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hfb/dynamics.hpp"
#include "hfb/meanfield.hpp"
#include "test_util.hpp"

using namespace hfb;

namespace {

// smooth, even and periodic on [-L, L)
double bump(double x, double L) { return std::exp(std::cos(std::numbers::pi * x / L)); }

double bump_at(const TorusGrid& g, int i, int j) {
    double v = 1.0;
    for (int a = 0; a < g.dim; ++a) v *= bump(g.position(i, a) - g.position(j, a), g.half_length);
    return v;
}

rvec bump_field(const TorusGrid& g) {
    rvec v(g.sites);
    const int o = g.site_index(std::vector<int>(g.dim, g.points_per_side / 2));
    for (int j = 0; j < g.sites; ++j) v(j) = bump_at(g, j, o);
    return v;
}

cmat hermitian(int n, std::mt19937_64& rng) {
    cmat a = test::random_matrix(n, rng);
    return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("convolution and Hadamard product against nested loops") {
    std::mt19937_64 rng(3);
    for (auto [d, N, L] : {std::tuple{1, 16, 2.0}, std::tuple{2, 6, 1.5}}) {
        auto g = make_grid(d, N, L);
        auto pot = make_grid_potential(g, bump_field(g));
        cvec n = test::random_vector(g.sites, rng);
        cvec c = convolve(g, pot, n);
        cmat a = test::random_matrix(g.sites, rng);
        cmat h = hadamard_v(g, pot, a);
        for (int i = 0; i < g.sites; ++i) {
            cxd s = 0.0;
            for (int j = 0; j < g.sites; ++j) {
                s += g.cell_volume * bump_at(g, i, j) * n(j);
                CHECK(std::abs(h(i, j) - bump_at(g, i, j) * a(i, j)) < 1e-13 * std::abs(a(i, j)) + 1e-15);
            }
            CHECK(std::abs(c(i) - s) < 1e-12 * (1.0 + std::abs(s)));
        }
    }
}

TEST_CASE("grid potential is symmetrized") {
    auto g = make_grid(1, 8, 1.0);
    rvec v = rvec::Zero(g.sites);
    v(g.site_index({5})) = 2.0;
    auto pot = make_grid_potential(g, v);
    CHECK(pot.pair(g.site_index({5})) == doctest::Approx(1.0));
    CHECK(pot.pair(g.site_index({3})) == doctest::Approx(1.0));
    CHECK((pot.pair_matrix - pot.pair_matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(make_grid_potential(g, rvec::Zero(3)));
    CHECK_THROWS(make_contact_potential(-1.0));
}

TEST_CASE("contact mode equals a grid delta of height g/dx^d") {
    std::mt19937_64 rng(11);
    const double gc = 0.7;
    for (auto [d, N, L] : {std::tuple{1, 8, 1.3}, std::tuple{2, 4, 1.0}}) {
        auto g = make_grid(d, N, L);
        rvec delta = rvec::Zero(g.sites);
        delta(g.site_index(std::vector<int>(d, N / 2))) = gc / g.cell_volume;
        auto grid_pot = make_grid_potential(g, delta);
        auto contact = make_contact_potential(gc);
        cmat gam = hermitian(g.sites, rng);
        cmat a = test::random_matrix(g.sites, rng);
        cmat sig = a + a.transpose();
        CHECK(test::max_abs(b_op(g, grid_pot, gam).matrix(g) - b_op(g, contact, gam).matrix(g)) < 1e-12);
        CHECK(test::max_abs(k_op(g, grid_pot, sig).matrix(g) - k_op(g, contact, sig).matrix(g)) < 1e-12);
        CHECK(test::max_abs(hadamard_v(g, grid_pot, a) - hadamard_v(g, contact, a)) < 1e-12);

        auto rho = sample_random_state(g, 17, 0.6);
        rvec V = rvec::LinSpaced(g.sites, -0.3, 0.4);
        auto r1 = hfb_rhs(rho, grid_pot, V.cast<cxd>());
        auto r2 = hfb_rhs(rho, contact, V.cast<cxd>());
        CHECK(test::max_abs(r1.dphi - r2.dphi) < 1e-11);
        CHECK(test::max_abs(r1.dgamma - r2.dgamma) < 1e-11 * (1 + test::max_abs(r1.dgamma)));
        CHECK(test::max_abs(r1.dsigma - r2.dsigma) < 1e-11 * (1 + test::max_abs(r1.dsigma)));
    }
}

TEST_CASE("one-body operator matrix, kernel and apply agree") {
    std::mt19937_64 rng(5);
    auto g = make_grid(2, 4, 1.2);
    OneBodyOperator h;
    h.kinetic = true;
    h.mult = test::random_vector(g.sites, rng);
    h.nonlocal = test::random_matrix(g.sites, rng);
    cvec f = test::random_vector(g.sites, rng);
    cvec direct = apply_minus_laplacian(g, f) + h.mult.cwiseProduct(f) + g.cell_volume * h.nonlocal * f;
    CHECK(test::max_abs(h.apply(g, f) - direct) < 1e-12 * test::max_abs(direct));
    CHECK(test::max_abs(h.matrix(g) * f - direct) < 1e-11 * test::max_abs(direct));
    CHECK(test::max_abs(h.kernel(g) * g.cell_volume - h.matrix(g)) < 1e-12);
    CHECK(shared_kinetic_matrix(g).get() == shared_kinetic_matrix(g).get());
}

TEST_CASE("h_op with grid potential") {
    std::mt19937_64 rng(8);
    auto g = make_grid(1, 8, 2.0);
    auto pot = make_grid_potential(g, bump_field(g));
    cmat gam = hermitian(g.sites, rng);
    cvec V = test::random_vector(g.sites, rng).real().cast<cxd>();
    cmat H = h_op(g, pot, V, gam).matrix(g);
    cmat expect = kinetic_matrix(g).cast<cxd>();
    for (int i = 0; i < g.sites; ++i) {
        cxd dens = 0.0;
        for (int j = 0; j < g.sites; ++j) dens += g.cell_volume * bump_at(g, i, j) * gam(j, j);
        expect(i, i) += V(i) + dens;
        for (int j = 0; j < g.sites; ++j) expect(i, j) += g.cell_volume * bump_at(g, i, j) * gam(i, j);
    }
    CHECK(test::max_abs(H - expect) < 1e-11 * test::max_abs(expect));
    CHECK_THROWS(h_op(g, pot, cvec::Zero(3), gam));
    CHECK_THROWS(b_op(g, pot, cmat::Zero(3, 3)));
}

TEST_CASE("projector and pair kernels") {
    cvec phi(3);
    phi << cxd(1, 2), cxd(0, -1), cxd(0.5, 0);
    cmat P = projector_kernel(phi), Q = pair_kernel(phi);
    CHECK(P(0, 1) == phi(0) * std::conj(phi(1)));
    CHECK(Q(0, 1) == phi(0) * phi(1));
}
