import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwalk.evolution import FieldState, overlap
from qwalk.lattice import wrap_difference
from qwalk.states import (
    ParticleStateSpec,
    band_concentration,
    branch_decompose,
    default_centre,
    eigenbasis_state,
    gaussian_envelope,
    gaussian_particle_state,
    localized_state,
    sign_split,
    superposition_state,
)
from qwalk.walks import Degenerate, WalkModel

from oracles import random_field

R2 = 1 / np.sqrt(2)


def fig5_spec():
    return ParticleStateSpec(WalkModel.dirac(1, 0.15), (2048,), (0.01 * np.pi,), (1 / 40,))


def test_localized_state():
    m = WalkModel.dirac(3, 0.03)
    grid = m.grid(8, 8, 8)
    psi = localized_state(m, grid, [8, 8, 8], [1, 0, 0, 0])
    assert psi.norm() == pytest.approx(1.0)
    flat = np.abs(psi.amplitudes).reshape(-1, 4)
    assert np.count_nonzero(flat) == 1
    dens = np.sum(np.abs(psi.to_momentum().amplitudes) ** 2, axis=-1)
    np.testing.assert_allclose(dens, 1 / dens.size, rtol=1e-10)
    with pytest.raises(ValueError):
        localized_state(m, grid, [1, 0, 0], [1, 0, 0, 0])  # odd site needs all odd
    with pytest.raises(ValueError):
        localized_state(m, grid, [0, 0, 0], [1, 1, 0, 0])
    with pytest.raises(ValueError):
        localized_state(m, grid, [16, 0, 0], [1, 0, 0, 0])


def test_default_centre():
    assert tuple(default_centre(WalkModel.dirac(3, 0.1).grid(8, 6, 6))) == (8, 6, 6)
    assert tuple(default_centre(WalkModel.dirac(1, 0.1).grid(9))) == (4,)


def test_spec_validation():
    m = WalkModel.dirac(3, 0.02)
    with pytest.raises(ValueError):
        ParticleStateSpec(m, (8, 8, 8), (0, 0), (0.1,))
    with pytest.raises(ValueError):
        ParticleStateSpec(m, (8, 8, 8), (0, 0, 0), (-0.1,))
    with pytest.raises(ValueError):
        ParticleStateSpec(m, (8, 8, 8), (0, 0, 0), (0.1,), branch=1)
    with pytest.raises(ValueError):
        ParticleStateSpec(m, (8, 8, 8), (0, 0, 0), (0.1,), branch=(1, 1), frame="other")
    spec = ParticleStateSpec(m, (64, 64, 64), (0, 0.01, 0), (1 / 32,), branch=(1, 1))
    assert spec.sigma == (1 / 32,) * 3
    # (family, k1, k2, k3); family 1 carries kappa = 0 at the centre slot
    assert spec.nearest_slot == (1, 32, 32, 32)
    assert spec.branch == (1, 1)
    assert ParticleStateSpec(m, (8, 8, 8), (0, 0, 0), (0.1,)).branch == (1, 1)
    one = ParticleStateSpec(WalkModel.dirac(1, 0.15), (2048,), (0.01 * np.pi,), (1 / 40,))
    assert one.branch == 1 and one.nearest_slot == (1014,)


def test_envelope_normalized_and_symmetric():
    spec = ParticleStateSpec(WalkModel.dirac(1, 0.15), (256,), (0.0,), (1 / 10,))
    g, delta = gaussian_envelope(spec)
    assert np.sum(g**2) == pytest.approx(1.0, abs=1e-14)
    # with k0 on a slot the profile is mirror symmetric about it
    order = np.argsort(delta[:, 0])
    d, gs = delta[order, 0], g[order]
    inner = np.abs(d) < np.pi - 1e-9
    np.testing.assert_allclose(gs[inner], gs[inner][::-1], atol=1e-12)


@pytest.mark.parametrize("spec", [
    fig5_spec(),
    ParticleStateSpec(WalkModel.dirac(1, 0.15), (512,), (0.4,), (1 / 20,), branch=-1),
    ParticleStateSpec(WalkModel.weyl(1), (256,), (0.5,), (1 / 20,)),
    ParticleStateSpec(WalkModel.dirac(2, 0.2), (32, 32), (0.5, 0.2), (1 / 8,), branch=(1, -1)),
    ParticleStateSpec(WalkModel.dirac(3, 0.3), (16, 16, 16), (0.3, 0.5, 0.2), (1 / 8,), branch=(-1, 1)),
])
def test_particle_state_on_requested_branch(spec):
    psi = gaussian_particle_state(spec)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    dec = branch_decompose(psi, spec)
    assert dec.components[spec.branch].norm() ** 2 >= 1 - 1e-12
    total = sum(c.norm() ** 2 for c in dec.components.values())
    assert total == pytest.approx(1.0, abs=1e-12)


def test_superposition_states():
    spec = fig5_spec()
    a = superposition_state(spec, 1.0, 0.0)
    b = gaussian_particle_state(spec)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-14)
    psi = superposition_state(spec, R2, R2)
    dec = branch_decompose(psi)
    assert dec.components[1].norm() ** 2 == pytest.approx(0.5, abs=1e-10)
    assert dec.components[-1].norm() ** 2 == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(ValueError):
        superposition_state(spec, 1.0, 1.0)


def test_eigenbasis_weights_four_component():
    m = WalkModel.dirac(3, 0.3)
    spec = ParticleStateSpec(m, (16, 16, 16), (0.0, 0.01 * np.pi, 0.0), (1 / 8,))
    psi = eigenbasis_state(spec, [R2, 0, R2, 0])
    dec = branch_decompose(psi, spec)
    assert dec.components[(1, 1)].norm() ** 2 == pytest.approx(0.5, abs=1e-10)
    assert dec.components[(-1, 1)].norm() ** 2 == pytest.approx(0.5, abs=1e-10)
    # the k = 0 slot sits inside this packet: the default basis sees its mass as degenerate
    plain = branch_decompose(psi)
    assert plain.degenerate_mass > 1e-3
    assert plain.components[(1, 1)].norm() ** 2 + plain.components[(1, -1)].norm() ** 2 == pytest.approx(0.5, abs=1e-10)
    sup = superposition_state(spec, R2, R2, p=1)
    np.testing.assert_allclose(sup.amplitudes, psi.amplitudes, atol=1e-14)
    with pytest.raises(ValueError):
        eigenbasis_state(spec, [1, 0, 0])


def test_orthogonal_branches():
    spec = fig5_spec()
    a = gaussian_particle_state(spec)
    b = gaussian_particle_state(ParticleStateSpec(spec.model, spec.sizes, spec.k0, spec.sigma, branch=-1))
    assert abs(overlap(a, b)) < 1e-10


def test_singular_support_rejected():
    m = WalkModel.weyl(3)
    spec = ParticleStateSpec(m, (16, 16, 16), (0.05, 0.0, 0.0), (1 / 8,))
    with pytest.raises(Degenerate):
        gaussian_particle_state(spec)


def test_smooth_frame_massive_origin():
    # the massive 4-component walk is regular at k = 0; both frames must work
    m = WalkModel.dirac(3, 0.3)
    for frame in ("helicity", "smooth"):
        spec = ParticleStateSpec(m, (16, 16, 16), (0.0, 0.0, 0.0), (1 / 8,), branch=(1, 1), frame=frame)
        psi = gaussian_particle_state(spec)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
        s = sign_split(psi)
        assert s.plus.norm() ** 2 == pytest.approx(1.0, abs=1e-10)


def test_band_concentration():
    m = WalkModel.dirac(1, 0.15)
    grid = m.grid(64)
    # momentum delta at k0 = 0 slot (index 32)
    amps = np.zeros((64, 2), complex)
    amps[32, 0] = 1
    psi = FieldState(amps, grid, m, "momentum")
    assert band_concentration(psi, [0.0], [0.01]) == 1.0
    flat = localized_state(m, grid, [0], [1, 0])
    frac = band_concentration(flat, [0.0], [np.pi / 8])
    assert frac == pytest.approx(1 / 8, abs=2 / 64)
    # Gaussian in a 3 sigma box: discrete sum of the same envelope
    spec = fig5_spec()
    g, delta = gaussian_envelope(spec)
    inside = np.abs(delta[:, 0]) <= 3 * spec.sigma[0]
    expect = np.sum(g[inside] ** 2)
    assert band_concentration(gaussian_particle_state(spec), spec.k0, 3 * np.array(spec.sigma)) == pytest.approx(expect, abs=1e-12)
    assert expect > 0.997


def test_sign_split_sums(rng):
    m = WalkModel.dirac(2, 0.3)
    grid = m.grid(8, 8)
    amps = random_field(rng, grid.shape + (4,))
    psi = FieldState(amps / np.linalg.norm(amps), grid, m)
    s = sign_split(psi)
    mom = psi.to_momentum()
    np.testing.assert_allclose(s.plus.amplitudes + s.minus.amplitudes, mom.amplitudes, atol=1e-13)
    assert abs(np.vdot(s.plus.amplitudes, s.minus.amplitudes)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([WalkModel.dirac(1, 0.4), WalkModel.dirac(3, 0.2), WalkModel.weyl(2)]))
def test_decomposition_complete(seed, model):
    rng = np.random.default_rng(seed)
    sizes = {1: (16,), 2: (6, 6), 3: (4, 4, 4)}[model.dimension]
    grid = model.grid(*sizes)
    amps = random_field(rng, grid.shape + (model.coin_dim,))
    psi = FieldState(amps / np.linalg.norm(amps), grid, model)
    dec = branch_decompose(psi)
    total = sum(c.amplitudes for c in dec.components.values())
    np.testing.assert_allclose(total, psi.to_momentum().amplitudes, atol=1e-12)
    assert sum(c.norm() ** 2 for c in dec.components.values()) == pytest.approx(1.0, abs=1e-12)


def test_envelope_wraps_near_zone_edge():
    spec = ParticleStateSpec(WalkModel.dirac(1, 0.2), (128,), (np.pi - 0.01,), (1 / 10,))
    g, delta = gaussian_envelope(spec)
    grid = spec.grid
    d = wrap_difference(grid, grid.slot_wavevectors() - np.array(spec.k0))
    np.testing.assert_allclose(delta, d)
    assert np.argmax(g) in (0, 127)
