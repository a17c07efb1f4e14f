"""Three ways to advance a walk state: local stepping, exact spectral propagation
and a truncated Taylor expansion of the dispersion relation.
"""
from dataclasses import dataclass, replace
from functools import lru_cache
from math import factorial

import numpy as np

from . import _accel, spectral
from .lattice import wrap_difference
from .walks import (
    DEGENERACY_TOL,
    Degenerate,
    coefficients,
    dispersion,
    dispersion_derivatives,
    sin_omega,
    transition_matrices,
)

POSITION = "position"
MOMENTUM = "momentum"


@dataclass
class FieldState:
    amplitudes: np.ndarray
    grid: object
    model: object
    domain: str = POSITION
    time: int = 0

    def __post_init__(self):
        if self.domain not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown domain {self.domain!r}")
        self.amplitudes = np.asarray(self.grid.validate_field(self.amplitudes, self.model.coin_dim), dtype=complex)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def to_position(self):
        if self.domain == POSITION:
            return self
        return replace(self, amplitudes=spectral.inverse(self.amplitudes, self.grid), domain=POSITION)

    def to_momentum(self):
        if self.domain == MOMENTUM:
            return self
        return replace(self, amplitudes=spectral.forward(self.amplitudes, self.grid), domain=MOMENTUM)

    def copy(self):
        return replace(self, amplitudes=self.amplitudes.copy())


# --------------------------------------------------------------------------
# position engine


@lru_cache(maxsize=16)
def _stencil(model, grid):
    """Flattened stencil ``(src, dst, shifts, mats)`` for ``psi'(x) = sum_h U_h psi(x - h)``."""
    tset = transition_matrices(model)
    src, dst, shifts, mats = [], [], [], []
    t = np.ones(3, dtype=int)
    for h, mat in tset.items():
        if not np.any(mat):
            continue
        h = np.array(h)
        if not grid.is_bcc:
            src.append(0)
            dst.append(0)
            shifts.append(np.pad(h, (0, 3 - len(h))))
            mats.append(mat)
        elif not h.any():
            for sub in (0, 1):
                src.append(sub)
                dst.append(sub)
                shifts.append(np.zeros(3, int))
                mats.append(mat)
        else:
            # even site 2m reads odd site 2m - h = 2(m - (h+t)/2) + t
            src.append(1)
            dst.append(0)
            shifts.append((h + t) // 2)
            mats.append(mat)
            # odd site 2m + t reads even site 2(m + (t-h)/2)
            src.append(0)
            dst.append(1)
            shifts.append((h - t) // 2)
            mats.append(mat)
    return (
        np.array(src, dtype=np.int64),
        np.array(dst, dtype=np.int64),
        np.array(shifts, dtype=np.int64),
        np.ascontiguousarray(np.array(mats, dtype=complex)),
    )


def _as_block(arr, grid):
    # (sublattice, N1, N2, N3, coin) view expected by the stencil kernel
    sizes = grid.sizes + (1,) * (3 - grid.dimension)
    return np.ascontiguousarray(arr.reshape((grid.n_sublattices,) + sizes + (arr.shape[-1],)))


def step_position(state, steps=1):
    """Apply the local update rule ``steps`` times on the periodic grid."""
    if state.domain != POSITION:
        raise ValueError("step_position needs a position-domain state")
    if int(steps) != steps or steps < 0:
        raise ValueError(f"steps must be a non-negative integer, got {steps}")
    src, dst, shifts, mats = _stencil(state.model, state.grid)
    psi = _as_block(state.amplitudes, state.grid)
    for _ in range(int(steps)):
        psi = _accel.stencil_step(psi, src, dst, shifts, mats)
    return replace(state, amplitudes=psi.reshape(state.amplitudes.shape), time=state.time + int(steps))


# --------------------------------------------------------------------------
# spectral engine


@lru_cache(maxsize=8)
def _slot_table(model, grid):
    """Per-slot ``w``, and the coefficients of ``M_k / sin w`` (zero where degenerate)."""
    kappa = grid.slot_wavevectors().reshape(-1, grid.dimension)
    omega = dispersion(kappa, model)
    sw = sin_omega(kappa, model)
    coef = coefficients(kappa, model)
    degenerate = sw < DEGENERACY_TOL
    coef_hat = np.where(degenerate[:, None], 0.0, coef / np.where(degenerate, 1.0, sw)[:, None])
    return kappa, omega, np.ascontiguousarray(coef_hat), degenerate


def _propagate(psi_hat, model, grid, phase_omega, t):
    _, omega, coef_hat, _ = _slot_table(model, grid)
    w = omega if phase_omega is None else phase_omega
    flat = np.ascontiguousarray(psi_hat.reshape(-1, model.coin_dim))
    gam = np.ascontiguousarray(model.gammas)
    out = _accel.slot_propagate(flat, np.cos(w * t), np.sin(w * t), coef_hat, gam)
    return out.reshape(psi_hat.shape)


def evolve_spectral(state, t):
    """Exact ``t``-step evolution: every slot is multiplied by ``U_k^t``.

    The result is returned in the domain of the input.
    """
    if int(t) != t or t < 0:
        raise ValueError(f"t must be a non-negative integer, got {t}")
    domain = state.domain
    mom = state.to_momentum()
    out = replace(mom, amplitudes=_propagate(mom.amplitudes, state.model, state.grid, None, int(t)), time=state.time + int(t))
    return out.to_position() if domain == POSITION else out


def _multi_index_sum(tensor):
    """``sum_{|a|=r} |T_a| / a!`` from the full symmetric tensor of order r."""
    r = tensor.ndim
    return float(np.sum(np.abs(tensor)) / factorial(r))


def taylor_dispersion(kappa, k0, model, grid, order):
    """Order-``order`` Taylor polynomial of w about ``k0`` evaluated at ``kappa``.

    ``kappa - k0`` is reduced to the representative nearest zero.
    """
    k0 = np.atleast_1d(np.asarray(k0, dtype=float))
    kappa = np.asarray(kappa, dtype=float).reshape(-1, model.dimension)
    delta = wrap_difference(grid, kappa - k0)
    value = np.full(len(delta), float(dispersion(k0, model)))
    for r in range(1, order + 1):
        term = np.tensordot(delta, dispersion_derivatives(k0, model, r), axes=([-1], [0]))
        for _ in range(r - 1):
            term = np.einsum("bi,bi...->b...", delta, term)
        value = value + term / factorial(r)
    return value


def evolve_truncated(state, k0, order, t):
    """Evolve with the dispersion replaced by its Taylor polynomial about ``k0``.

    The positive and negative frequency parts of every slot keep their
    eigenvectors and pick up ``exp(-+ i w~(k) t)``.  ``order=None`` uses the
    exact dispersion, which reproduces :func:`evolve_spectral`.
    """
    model, grid = state.model, state.grid
    if sin_omega(k0, model) < DEGENERACY_TOL:
        raise Degenerate(f"k0 = {k0} is a singular point of the dispersion relation")
    domain = state.domain
    mom = state.to_momentum()
    if order is None:
        phase_omega = None
    else:
        kappa = _slot_table(model, grid)[0]
        phase_omega = taylor_dispersion(kappa, k0, model, grid, int(order))
    amps = _propagate(mom.amplitudes, model, grid, phase_omega, int(t))
    out = replace(mom, amplitudes=amps, time=state.time + int(t))
    return out.to_position() if domain == POSITION else out


@dataclass
class BoundReport:
    bound: float
    gamma: float
    sigma_max: float
    epsilon: float
    order: int
    t: float
    remainder_order: int  # the uncontrolled O(Sigma^remainder_order) t term is not included


def approximation_bound(k0, sigma, epsilon, order, t, model, mass=1.0):
    """Computable part of the lower bound on the truncated-evolution overlap.

    ``sigma`` are the half-widths of the wave-vector box that holds
    ``1 - epsilon`` of the envelope mass, ``mass`` is the total squared norm
    of the envelope.  The bound is ``1 - epsilon - gamma Sigma^(n+1) t`` with
    ``gamma = (n+1) sum_{|a|=n+1} |w^(a)(k0)| / a! * mass``.
    """
    if sin_omega(k0, model) < DEGENERACY_TOL:
        raise Degenerate(f"k0 = {k0} is a singular point of the dispersion relation")
    sigma_max = float(np.max(np.atleast_1d(sigma)))
    n = int(order)
    gamma = (n + 1) * _multi_index_sum(dispersion_derivatives(k0, model, n + 1)) * mass
    bound = 1.0 - epsilon - gamma * sigma_max ** (n + 1) * t
    return BoundReport(bound, gamma, sigma_max, float(epsilon), n, float(t), n + 3)


def overlap(a, b):
    """``<a|b>`` for two states on the same grid and coin space."""
    if a.grid != b.grid or a.amplitudes.shape != b.amplitudes.shape:
        raise ValueError("states live on different grids or coin spaces")
    if a.domain != b.domain:
        a, b = a.to_position(), b.to_position()
    return complex(np.vdot(a.amplitudes, b.amplitudes))
