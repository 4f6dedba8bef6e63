import math

import numpy as np
import pytest

hfb = pytest.importorskip("hfb")


def test_grid_and_fourier_roundtrip():
    g = hfb.make_grid(2, 4, 1.5)
    assert g.sites == 16
    assert g.cell_volume == pytest.approx((3.0 / 4) ** 2)
    rng = np.random.default_rng(0)
    f = rng.normal(size=16) + 1j * rng.normal(size=16)
    assert np.max(np.abs(hfb.from_fourier(g, hfb.to_fourier(g, f)) - f)) < 1e-12


def test_random_state_admissible_and_deterministic():
    g = hfb.make_grid(1, 8, 1.0)
    a = hfb.sample_random_state(g, 3, 0.6)
    b = hfb.sample_random_state(g, 3, 0.6)
    assert hfb.check_admissible(a)["admissible"]
    assert np.array_equal(a.gamma, b.gamma)
    assert np.array_equal(a.sigma, b.sigma)
    gam = hfb.build_gamma_operator(a)
    assert np.linalg.eigvalsh(gam).min() > -1e-10


def test_wick_two_point_against_arrays():
    g = hfb.make_grid(1, 4, 1.0)
    r = hfb.sample_random_state(g, 1, 0.5)
    val = hfb.wick_expectation(r, [(1, True), (2, False)])
    expect = r.gamma[2, 1] + np.conj(r.phi[1]) * r.phi[2]
    assert abs(val - expect) < 1e-14


def test_evolve_conserves_particle_number():
    g = hfb.make_grid(1, 16, math.pi)
    r = hfb.sample_random_state(g, 5, 0.5, bandwidth=1.5)
    tr = hfb.evolve(r, hfb.contact_potential(1.0), 1e-3, 0.1, stride=20)
    assert len(tr["t"]) == 6
    assert np.max(np.abs(tr["N"] - tr["N"][0])) < 1e-9 * tr["N"][0]
    assert np.max(np.abs(tr["E"] - tr["E"][0])) < 1e-6 * abs(tr["E"][0])


def test_inadmissible_state_is_rejected():
    g = hfb.make_grid(1, 4, 1.0)
    r = hfb.vacuum_state(g)
    s = np.array(r.sigma)
    s[0, 0] = 1.0
    r.sigma = s
    assert not hfb.check_admissible(r)["admissible"]
    with pytest.raises(ValueError):
        hfb.evolve(r, hfb.contact_potential(1.0), 1e-3, 0.01)


def test_diagonalization_reconstructs():
    g = hfb.make_grid(1, 8, 1.3)
    r = hfb.sample_random_state(g, 9, 0.8)
    res = hfb.diagonalize_gamma(r, 1e-8)
    assert res["residual"] <= 1e-7
    U = res["U"]
    assert hfb.check_symplectic(U) < 1e-10
    gp = res["gamma_prime"] * g.cell_volume
    back = hfb.transform_gamma(U, gp)
    assert np.max(np.abs(back - hfb.build_gamma_operator(r))) < 1e-7


def test_bogoliubov_modes_normalised():
    g = hfb.make_grid(1, 16, 4.0)
    modes = hfb.bogoliubov_modes(1.0, 0.8, 1.0, g)
    assert len(modes) == 16
    for m in modes:
        if m["stable"] and not m["gapless"]:
            assert abs(abs(m["u"]) ** 2 - abs(m["v"]) ** 2 - 1.0) < 1e-12
    assert sum(m["gapless"] for m in modes) == 1


def test_gibbs_sweep():
    nc = hfb.critical_density(1.0, 3)
    assert nc == pytest.approx(2.6123753486854883 * (4 * math.pi) ** -1.5, rel=1e-12)
    res = hfb.thermodynamic_sweep(1.0, 2 * nc, 1.0, 3, 8, [2.0, 4.0])
    assert res["condensate_fraction_predicted"] == pytest.approx(0.5)
    assert len(res["mu"]) == 2
