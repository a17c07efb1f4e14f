import numpy as np
import pytest

from qwalk.evolution import (
    MOMENTUM,
    POSITION,
    FieldState,
    approximation_bound,
    evolve_spectral,
    evolve_truncated,
    overlap,
    step_position,
    taylor_dispersion,
)
from qwalk.lattice import site_array_index
from qwalk.states import ParticleStateSpec, gaussian_particle_state, localized_state
from qwalk.walks import Degenerate, WalkModel, dispersion

from oracles import random_field

CASES = [
    (WalkModel.weyl(1), (64,)),
    (WalkModel.dirac(1, 0.3), (64,)),
    (WalkModel.weyl(2), (16, 12)),
    (WalkModel.dirac(2, 0.2), (16, 16)),
    (WalkModel.weyl(3), (6, 6, 6)),
    (WalkModel.dirac(3, 0.3), (8, 8, 8)),
]
case_ids = [f"{m.family}{m.dimension}" for m, _ in CASES]


def random_state(model, sizes, rng):
    grid = model.grid(*sizes)
    amps = random_field(rng, grid.shape + (model.coin_dim,))
    return FieldState(amps / np.linalg.norm(amps), grid, model)


def test_weyl_delta_moves_right():
    m = WalkModel.weyl(1)
    psi = localized_state(m, m.grid(16), [0], [1, 0])
    out = step_position(psi, 1)
    expect = np.zeros((16, 2), complex)
    expect[1, 0] = 1
    np.testing.assert_allclose(out.amplitudes, expect, atol=1e-15)
    assert out.time == 1
    # lower component moves left, across the seam
    out = step_position(localized_state(m, m.grid(16), [0], [0, 1]), 1)
    assert abs(out.amplitudes[15, 1]) == pytest.approx(1.0)


def test_full_mass_dirac_flips_spinor():
    m = WalkModel.dirac(1, 1.0)
    out = step_position(localized_state(m, m.grid(8), [3], [1, 0]), 1)
    expect = np.zeros((8, 2), complex)
    expect[3] = [0, 1j]
    np.testing.assert_allclose(out.amplitudes, expect, atol=1e-15)


@pytest.mark.parametrize("model,sizes", CASES, ids=case_ids)
def test_engines_agree(model, sizes, rng):
    psi = random_state(model, sizes, rng)
    t = 50 if model.dimension == 1 else 10
    a = step_position(psi, t)
    b = evolve_spectral(psi, t)
    assert b.domain == POSITION and b.time == t
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-10
    assert abs(a.norm() - 1) < 1e-10 * t
    assert abs(b.norm() - 1) < 1e-12 * t


def test_bcc_localized_engines_agree():
    m = WalkModel.dirac(3, 0.3)
    grid = m.grid(8, 8, 8)
    psi = localized_state(m, grid, [8, 8, 8], [1, 0, 0, 0])
    a = step_position(psi, 10)
    b = evolve_spectral(psi, 10)
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-10


def test_spectral_identity_and_domain(rng):
    m, sizes = CASES[1]
    psi = random_state(m, sizes, rng)
    np.testing.assert_allclose(evolve_spectral(psi, 0).amplitudes, psi.amplitudes, atol=1e-13)
    mom = psi.to_momentum()
    out = evolve_spectral(mom, 5)
    assert out.domain == MOMENTUM
    np.testing.assert_allclose(out.to_position().amplitudes, step_position(psi, 5).amplitudes, atol=1e-12)
    with pytest.raises(ValueError):
        evolve_spectral(psi, 1.5)
    with pytest.raises(ValueError):
        step_position(mom, 1)


@pytest.mark.parametrize("model,sizes,x0", [
    (WalkModel.dirac(1, 0.3), (32,), [16]),
    (WalkModel.dirac(2, 0.3), (16, 16), [8, 8]),
    (WalkModel.dirac(3, 0.3), (8, 8, 8), [8, 8, 8]),
])
def test_causality(model, sizes, x0):
    grid = model.grid(*sizes)
    spinor = np.ones(model.coin_dim) / np.sqrt(model.coin_dim)
    psi = localized_state(model, grid, x0, spinor)
    t = 3
    out = step_position(psi, t)
    # reachable set: sums of t generators (h=0 included for Dirac)
    reach = {tuple(x0)}
    gens = [np.array(h) for h in model.generators()]
    for _ in range(t):
        reach = {tuple((np.array(p) + h) % grid.periods) for p in reach for h in gens}
    mask = np.zeros(grid.shape, bool)
    for p in reach:
        mask[site_array_index(grid, p)] = True
    outside = out.amplitudes[~mask]
    assert np.all(outside == 0)
    assert np.sum(np.abs(out.amplitudes[mask]) ** 2) == pytest.approx(1.0)


def test_truncated_exact_dispersion_equals_spectral(rng):
    m = WalkModel.dirac(3, 0.3)
    psi = random_state(m, (6, 6, 6), rng)
    a = evolve_truncated(psi, [0.1, 0.2, 0.0], None, 7)
    b = evolve_spectral(psi, 7)
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-12


@pytest.mark.parametrize("order", [1, 2])
def test_truncated_weyl_is_exact(order):
    m = WalkModel.weyl(1)
    spec = ParticleStateSpec(m, (256,), (0.5,), (1 / 20,))
    psi = gaussian_particle_state(spec)
    a = evolve_truncated(psi, spec.k0, order, 60)
    b = evolve_spectral(psi, 60)
    assert abs(overlap(a, b)) == pytest.approx(1.0, abs=1e-10)


def test_truncated_rejects_singular_k0():
    m = WalkModel.weyl(3)
    psi = localized_state(m, m.grid(2, 2, 2), [0, 0, 0], [1, 0])
    with pytest.raises(Degenerate):
        evolve_truncated(psi, [0, 0, 0], 1, 1)


def test_taylor_dispersion_accuracy():
    m = WalkModel.dirac(1, 0.15)
    grid = m.grid(512)
    k0 = np.array([0.1])
    kappa = grid.slot_wavevectors().reshape(-1, 1)
    near = np.abs(kappa[:, 0] - 0.1) < 0.02
    exact = dispersion(kappa[near], m)
    err1 = np.abs(taylor_dispersion(kappa[near], k0, m, grid, 1) - exact).max()
    err2 = np.abs(taylor_dispersion(kappa[near], k0, m, grid, 2) - exact).max()
    assert err2 < err1 / 5
    assert taylor_dispersion(k0[None], k0, m, grid, 2)[0] == pytest.approx(dispersion(k0, m))


def test_bound_basics():
    m = WalkModel.dirac(3, 0.02)
    r = approximation_bound([0, 0.01, 0], 3 / 32, 0.01, 2, 0, m)
    assert r.bound == pytest.approx(0.99)
    assert r.remainder_order == 5
    r = approximation_bound([0.4], 0.1, 0.02, 1, 1000, WalkModel.weyl(1))
    assert r.gamma == pytest.approx(0.0, abs=1e-6)
    assert r.bound == pytest.approx(0.98, abs=1e-3)
    r1 = approximation_bound([0, 0.01, 0], 0.05, 0.0, 2, 10, m)
    r2 = approximation_bound([0, 0.01, 0], 0.05, 0.0, 2, 20, m)
    assert r2.bound < r1.bound


def test_truncated_respects_bound():
    m = WalkModel.dirac(1, 0.15)
    spec = ParticleStateSpec(m, (1024,), (0.3,), (1 / 40,))
    psi = gaussian_particle_state(spec)
    for order in (1, 2):
        for t in (10, 50):
            r = approximation_bound(spec.k0, 3 * np.array(spec.sigma), 0.003, order, t, m)
            ov = abs(overlap(evolve_truncated(psi, spec.k0, order, t), evolve_spectral(psi, t)))
            if r.bound >= 0:
                assert ov >= r.bound


def test_overlap(rng):
    m = WalkModel.dirac(1, 0.2)
    psi = random_state(m, (32,), rng)
    assert overlap(psi, psi) == pytest.approx(1.0)
    assert overlap(psi.to_momentum(), psi) == pytest.approx(1.0)
    grid = m.grid(32)
    a = localized_state(m, grid, [3], [1, 0])
    b = localized_state(m, grid, [3], [0, 1])
    assert abs(overlap(a, b)) < 1e-15
    assert abs(overlap(step_position(psi, 5), evolve_spectral(psi, 5))) <= 1 + 1e-12
    with pytest.raises(ValueError):
        overlap(psi, random_state(m, (16,), rng))


def test_field_state_validation():
    m = WalkModel.dirac(1, 0.2)
    with pytest.raises(ValueError):
        FieldState(np.zeros((8, 3)), m.grid(8), m)
    with pytest.raises(ValueError):
        FieldState(np.zeros((8, 2)), m.grid(8), m, domain="space")
