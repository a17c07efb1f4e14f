"""Expectation values on walk states: distributions, mean position and its
particle/antiparticle decomposition, velocity and acceleration operators,
the Newton-Wigner position and the X-P commutator.
"""
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .evolution import MOMENTUM, FieldState, _slot_table, evolve_spectral
from .states import branch_vectors, sign_split
from .walks import (
    DEGENERACY_TOL,
    Degenerate,
    combine,
    coefficients,
    eigenvectors,
    weyl_terms,
    _sin_from_terms,
)

SEAM_BAND = 0.4  # |x - c| > SEAM_BAND * L counts as near the wrap seam
SEAM_LIMIT = 0.2


class SeamWarning(UserWarning):
    """Too much probability near the periodic seam for a meaningful mean position."""


def probability_distribution(state):
    if state.domain != "position":
        raise ValueError("probability_distribution needs a position-domain state")
    return np.sum(np.abs(state.amplitudes) ** 2, axis=-1)


def marginal(prob, grid, keep):
    """Sum ``prob`` over all physical axes not listed in ``keep``.

    The result is indexed by physical coordinates of the kept axes; on a BCC
    grid it has the full period ``2 N_i`` per kept axis.
    """
    keep = tuple(sorted(set(int(a) for a in keep)))
    if any(a < 0 or a >= grid.dimension for a in keep):
        raise ValueError(f"axes {keep} out of range for dimension {grid.dimension}")
    prob = np.asarray(prob, dtype=float)
    if not keep:
        return float(prob.sum())
    if not grid.is_bcc:
        drop = tuple(a for a in range(grid.dimension) if a not in keep)
        return prob.sum(axis=drop)
    pos = grid.positions()[..., keep]
    periods = grid.periods.astype(int)[list(keep)]
    flat = np.ravel_multi_index(tuple(np.moveaxis(pos, -1, 0)), tuple(periods))
    out = np.bincount(flat.ravel(), weights=prob.ravel(), minlength=int(np.prod(periods)))
    return out.reshape(tuple(periods))


def circular_centre(prob, grid):
    """Per-axis circular mean of the distribution."""
    pos = grid.positions().reshape(-1, grid.dimension).astype(float)
    w = np.asarray(prob).ravel()
    ang = 2 * np.pi * pos / grid.periods
    z = np.sum(w[:, None] * np.exp(1j * ang), axis=0)
    c = np.angle(z) * grid.periods / (2 * np.pi)
    return np.mod(c, grid.periods)


def unwrapped_positions(grid, centre):
    """Site coordinates mapped into ``[c - L/2, c + L/2)`` per axis."""
    pos = grid.positions().astype(float)
    L = grid.periods
    return centre + (pos - centre + L / 2) % L - L / 2


def seam_fraction(prob, grid, centre):
    x = unwrapped_positions(grid, centre)
    near = np.any(np.abs(x - centre) > SEAM_BAND * grid.periods, axis=-1)
    return float(np.sum(np.asarray(prob)[near]) / np.sum(prob))


def mean_position(state, centre=None):
    """``<X>`` with coordinates unwrapped around ``centre`` (default: circular mean).

    Emits :class:`SeamWarning` when more than 20% of the mass lies within the
    outer band of any axis.
    """
    pos_state = state.to_position()
    prob = probability_distribution(pos_state)
    grid = state.grid
    centre = circular_centre(prob, grid) if centre is None else np.asarray(centre, dtype=float)
    if seam_fraction(prob, grid, centre) > SEAM_LIMIT:
        warnings.warn("more than 20% of the probability lies near the periodic seam", SeamWarning, stacklevel=2)
    x = unwrapped_positions(grid, centre)
    return np.tensordot(prob, x, axes=prob.ndim) / prob.sum()


def position_spread(state, centre=None):
    """Root-mean-square distance of the packet from its mean position."""
    pos_state = state.to_position()
    prob = probability_distribution(pos_state)
    grid = state.grid
    centre = circular_centre(prob, grid) if centre is None else np.asarray(centre, dtype=float)
    x = unwrapped_positions(grid, centre)
    mean = np.tensordot(prob, x, axes=prob.ndim) / prob.sum()
    return float(np.sqrt(np.sum(prob * np.sum((x - mean) ** 2, axis=-1)) / prob.sum()))


@dataclass
class ObservableSeries:
    times: list
    values: np.ndarray
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = [int(t) for t in self.times]
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        self.values = np.asarray(self.values, dtype=float)


def position_series(state0, T, stride=1, centre=None):
    """Mean position every ``stride`` steps up to ``T`` (spectral engine).

    The unwrapping centre is fixed from the initial state unless given.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    pos0 = state0.to_position()
    if centre is None:
        centre = circular_centre(probability_distribution(pos0), state0.grid)
    mom = state0.to_momentum()
    times, values = [], []
    t = 0
    while True:
        times.append(t)
        values.append(mean_position(evolve_spectral(mom, t).to_position(), centre))
        if t + stride > T:
            break
        t += stride
    return ObservableSeries(times, np.array(values), {"centre": np.asarray(centre)})


# --------------------------------------------------------------------------
# velocity / acceleration operators, per slot


@dataclass
class KinematicOperators:
    kappa: np.ndarray
    omega: np.ndarray
    H: np.ndarray  # (..., s, s)
    V: np.ndarray  # (..., d, s, s)
    A: np.ndarray
    V_hat: np.ndarray
    Z_V: np.ndarray  # at time t
    Z_X: np.ndarray  # at time t
    Z_X0: np.ndarray
    f: np.ndarray  # (..., d, 3, 3) antisymmetric f^(j)_{mu nu}
    w: np.ndarray  # (..., d, 3)
    t: float = 0.0


def _dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _evolution_2h(omega, H, t):
    """``exp(2 i H t)`` using ``H^2 = w^2``."""
    s = H.shape[-1]
    c = np.cos(2 * omega * t)[..., None, None]
    sn = (np.sin(2 * omega * t) / omega)[..., None, None]
    return c * np.eye(s) + 1j * sn * H


def kinematic_operators(kappa, model, t=0.0):
    """Velocity ``V = dH/dk``, acceleration ``A = i[H, V]`` and their integrals.

    ``V_hat = V - Z_V(0)``, ``Z_V(t) = H^{-1} A(t) / 2i`` and
    ``Z_X(t) = -H^{-2} A(t) / 4`` with ``A(t) = exp(2iHt) A``.
    """
    k = np.asarray(kappa, dtype=float)
    if model.dimension == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    u, nt, du, dnt = weyl_terms(k, model.dimension)
    sw = _sin_from_terms(nt, model)
    if np.any(sw < DEGENERACY_TOL):
        raise Degenerate("kinematic operators need sin(omega) > 0")
    omega = np.arctan2(sw, model.n * u)
    grad = -model.n * du / sw[..., None]
    M = combine(coefficients(k, model), model.gammas)
    ratio = omega / sw
    dratio = ((sw - omega * np.cos(omega)) / sw**2)[..., None] * grad
    dM = model.n * np.einsum("...ja,axy->...jxy", dnt, model.gammas[:3])
    H = ratio[..., None, None] * M
    V = dratio[..., None, None] * M[..., None, :, :] + ratio[..., None, None, None] * dM
    Hx = H[..., None, :, :]
    A = 1j * (Hx @ V - V @ Hx)
    h_inv = H / (omega**2)[..., None, None]
    e2 = _evolution_2h(omega, H, t)[..., None, :, :]
    A_t = e2 @ A
    Z_V0 = (h_inv[..., None, :, :] @ A) / 2j
    Z_V = (h_inv[..., None, :, :] @ A_t) / 2j
    scale = (-0.25 / omega**2)[..., None, None, None]
    Z_X = scale * A_t
    Z_X0 = scale * A
    f = np.einsum("...n,...jm->...jmn", nt, dnt) - np.einsum("...m,...jn->...jmn", nt, dnt)
    w = np.stack(
        [
            nt[..., None, 2] * f[..., 0, 2] + nt[..., None, 1] * f[..., 0, 1],
            -nt[..., None, 0] * f[..., 0, 1] + nt[..., None, 2] * f[..., 1, 2],
            -nt[..., None, 0] * f[..., 0, 2] + nt[..., None, 1] * f[..., 1, 2],
        ],
        -1,
    )
    return KinematicOperators(k, omega, H, V, A, V - Z_V0, Z_V, Z_X, Z_X0, f, w, float(t))


def acceleration_closed_form(kappa, model):
    """``2 i n (w/sin w)^2 (n sum_{mu<nu} g^mu g^nu f_{mu nu} - m g.dnt)`` (four-component walk)."""
    from .walks import GAMMA

    if model.coin_dim != 4:
        raise ValueError("closed form is written for the four-component Dirac walk")
    k = np.asarray(kappa, dtype=float)
    u, nt, _, dnt = weyl_terms(k, model.dimension)
    sw = _sin_from_terms(nt, model)
    omega = np.arctan2(sw, model.n * u)
    ops = kinematic_operators(k, model)
    pairs = np.einsum("mab,nbc->mnac", GAMMA, GAMMA)
    upper = np.triu(np.ones((3, 3)), 1)
    term = model.n * np.einsum("...jmn,mn,mnac->...jac", ops.f, upper, pairs)
    term = term - model.mass * np.einsum("...jm,mac->...jac", dnt, GAMMA)
    return 2j * model.n * ((omega / sw) ** 2)[..., None, None, None] * term


# --------------------------------------------------------------------------
# state-level kinematics


def _slot_matvec(mats, vecs):
    return np.einsum("qij,qj->qi", mats, vecs)


def _x_matrix_element(a, b, grid, centre):
    """``<a|X|b>`` in position space with unwrapped coordinates (vector over axes)."""
    x = unwrapped_positions(grid, centre)
    dens = np.sum(np.conj(a.to_position().amplitudes) * b.to_position().amplitudes, axis=-1)
    return np.tensordot(dens, x, axes=dens.ndim)


class MeanPositionDecomposition(NamedTuple):
    x_plus: np.ndarray
    x_minus: np.ndarray
    x_int: np.ndarray
    degenerate_mass: float

    @property
    def total(self):
        return self.x_plus + self.x_minus + self.x_int


def mean_position_decomposition(state, t, centre=None):
    """Classical particle, antiparticle and interference parts of ``<X(t)>``.

    ``state`` is the initial state; ``t`` is counted from it.  Slots with
    sin(omega) = 0 contribute no velocity or Z_X terms and their mass is
    reported.
    """
    model, grid = state.model, state.grid
    pos0 = state.to_position()
    if centre is None:
        centre = circular_centre(probability_distribution(pos0), grid)
    centre = np.asarray(centre, dtype=float)
    split = sign_split(state)
    plus, minus = split.plus, split.minus
    norm2 = float(np.sum(np.abs(pos0.amplitudes) ** 2))

    kappa, _, _, degenerate = _slot_table(model, grid)
    good = ~degenerate
    fp = plus.amplitudes.reshape(-1, model.coin_dim)[good]
    fm = minus.amplitudes.reshape(-1, model.coin_dim)[good]
    ops = kinematic_operators(kappa[good], model, t)
    d = model.dimension
    x_plus = np.real(_x_matrix_element(plus, plus, grid, centre))
    x_minus = np.real(_x_matrix_element(minus, minus, grid, centre))
    x_int = 2 * np.real(_x_matrix_element(plus, minus, grid, centre))
    for j in range(d):
        vp = _slot_matvec(ops.V_hat[:, j], fp)
        vm = _slot_matvec(ops.V_hat[:, j], fm)
        x_plus[j] += t * np.real(np.vdot(fp, vp))
        x_minus[j] += t * np.real(np.vdot(fm, vm))
        z = _slot_matvec(ops.Z_X[:, j] - ops.Z_X0[:, j], fm)
        x_int[j] += 2 * np.real(np.vdot(fp, z))
    return MeanPositionDecomposition(x_plus / norm2, x_minus / norm2, x_int / norm2, split.degenerate_mass)


def foldy_wouthuysen(state, vectors=None):
    """Slot-wise rotation into the eigenbasis of ``U_k`` (momentum domain)."""
    model, grid = state.model, state.grid
    mom = state.to_momentum()
    if vectors is None:
        kappa = grid.slot_wavevectors().reshape(-1, model.dimension)
        vectors, _ = eigenvectors(kappa, model)
    vectors = vectors.reshape(-1, model.coin_dim, model.coin_dim)
    flat = mom.amplitudes.reshape(-1, model.coin_dim)
    rotated = np.einsum("qib,qi->qb", np.conj(vectors), flat)
    return FieldState(rotated.reshape(mom.amplitudes.shape), grid, model, MOMENTUM, state.time)


def newton_wigner_mean(state, t, centre=None, spec=None):
    """Mean of the position operator taken in the per-slot eigenbasis frame.

    The rotated amplitudes of branch ``s`` evolve as ``exp(-i s w t)``.  If the
    state was built from a :class:`ParticleStateSpec`, passing it selects the
    same eigenvector frame, including its limits at closed-form singularities.
    """
    model, grid = state.model, state.grid
    vectors = branch_vectors(spec) if spec is not None else None
    rot = foldy_wouthuysen(state, vectors)
    _, omega, _, _ = _slot_table(model, grid)
    labels = model.branch_labels
    signs = np.array([lab[0] if isinstance(lab, tuple) else lab for lab in labels])
    phase = np.exp(-1j * np.outer(omega, signs) * t)
    evolved = rot.amplitudes.reshape(-1, model.coin_dim) * phase
    frame = FieldState(evolved.reshape(rot.amplitudes.shape), grid, model, MOMENTUM)
    if centre is None:
        centre = circular_centre(probability_distribution(foldy_wouthuysen(state, vectors).to_position()), grid)
    return mean_position(frame.to_position(), centre)


def commutator_expectation(state, i, j):
    """``<[X_i, P_j]>`` including the zone-edge boundary term (cubic grids).

    The boundary density at ``k_i = +-pi`` is read from the edge slots: the
    single plane ``k_i = -pi`` for even ``N_i`` and the average of the two
    outermost planes for odd ``N_i``.
    """
    grid = state.grid
    if grid.is_bcc:
        raise ValueError("the boundary term is defined for cubic grids only")
    if i != j:
        return 0j
    mom = state.to_momentum()
    dens = np.sum(np.abs(mom.amplitudes) ** 2, axis=-1)
    dens = dens / dens.sum()
    n = grid.sizes[i]
    if n % 2 == 0:
        edge = np.take(dens, 0, axis=i).sum()
    else:
        edge = 0.5 * (np.take(dens, 0, axis=i).sum() + np.take(dens, n - 1, axis=i).sum())
    return 1j * (1.0 - n * edge)
