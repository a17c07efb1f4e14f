import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwalk import spectral
from qwalk.lattice import GridSpec

from oracles import bcc_dft_loop, centred_dft_loop, random_field


@pytest.mark.parametrize("sizes", [(8,), (7,), (4, 5), (3, 2, 4)])
def test_rect_matches_loop(rng, sizes):
    g = GridSpec.cubic(*sizes)
    f = random_field(rng, sizes + (1,))[..., 0]
    np.testing.assert_allclose(spectral.dft_rect(f, g), centred_dft_loop(f, sizes), atol=1e-12)


def test_rect_delta_and_constant():
    g = GridSpec.cubic(8)
    delta = np.zeros(8)
    delta[0] = 1
    np.testing.assert_allclose(np.abs(spectral.dft_rect(delta, g)), 1 / np.sqrt(8))
    # a constant lands on the centred slot p = N // 2
    fh = spectral.dft_rect(np.ones(8), g)
    assert abs(fh[4]) == pytest.approx(np.sqrt(8))
    assert np.abs(np.delete(fh, 4)).max() < 1e-12


@pytest.mark.parametrize("sizes", [(2, 2, 2), (4, 4, 4), (3, 2, 4), (1, 1, 1)])
def test_bcc_matches_loop(rng, sizes):
    g = GridSpec.bcc(*sizes)
    f = random_field(rng, g.shape + (1,))[..., 0]
    np.testing.assert_allclose(spectral.bcc_dft(f, g), bcc_dft_loop(f, sizes), atol=1e-12)


def test_bcc_direct_transform_agrees(rng):
    g = GridSpec.bcc(4, 2, 3)
    f = random_field(rng, g.shape + (4,))
    np.testing.assert_allclose(spectral.forward(f, g), spectral.direct_transform(f, g), atol=1e-12)


def test_bcc_inverse_two_argument_form(rng):
    g = GridSpec.bcc(2)
    f = random_field(rng, g.shape + (2,))
    fh = spectral.bcc_dft(f, g)
    np.testing.assert_allclose(spectral.bcc_idft(fh[0], fh[1], g), f, atol=1e-12)
    with pytest.raises(ValueError):
        spectral.bcc_idft(fh[0], fh[1][:1], g)


def test_wrong_grid_kind_rejected():
    with pytest.raises(ValueError):
        spectral.dft_rect(np.zeros((2, 2, 2, 2)), GridSpec.bcc(2))
    with pytest.raises(ValueError):
        spectral.bcc_dft(np.zeros((4, 4, 4)), GridSpec.cubic(4, 4, 4))
    with pytest.raises(ValueError):
        spectral.dft_rect(np.zeros(5), GridSpec.cubic(4))


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(["cubic", "bcc"]),
    st.lists(st.integers(1, 6), min_size=3, max_size=3),
    st.integers(0, 2**31 - 1),
)
def test_round_trip_and_parseval(kind, sizes, seed):
    rng = np.random.default_rng(seed)
    if kind == "cubic":
        g = GridSpec.cubic(*[max(n, 2) for n in sizes])
    else:
        g = GridSpec.bcc(*sizes)
    f = rng.normal(size=g.shape + (2,)) + 1j * rng.normal(size=g.shape + (2,))
    fh = spectral.forward(f, g)
    assert abs(np.vdot(fh, fh) - np.vdot(f, f)) < 1e-12 * np.vdot(f, f).real
    np.testing.assert_allclose(spectral.inverse(fh, g), f, atol=1e-12)


def test_workers_setting_does_not_change_result(rng):
    g = GridSpec.bcc(4)
    f = random_field(rng, g.shape + (4,))
    a = spectral.forward(f, g)
    spectral.set_workers(2)
    try:
        b = spectral.forward(f, g)
    finally:
        spectral.set_workers(None)
    np.testing.assert_allclose(a, b, atol=1e-14)
