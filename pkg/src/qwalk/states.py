"""Initial states: localized spinors, Gaussian packets on an eigenbranch and
superpositions of positive and negative frequency packets.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .evolution import MOMENTUM, POSITION, FieldState, _slot_table
from .lattice import site_array_index, wrap_difference
from .walks import DEGENERACY_TOL, Degenerate, branch_projectors, eigenvectors, sin_omega


def localized_state(model, grid, x0, spinor):
    """``|x0> (x) |spinor>``; ``x0`` is a physical site position."""
    spinor = np.asarray(spinor, dtype=complex)
    if spinor.shape != (model.coin_dim,):
        raise ValueError(f"spinor must have {model.coin_dim} components")
    if abs(np.linalg.norm(spinor) - 1.0) > 1e-12:
        raise ValueError("spinor must be a unit vector")
    x0 = np.atleast_1d(np.asarray(x0, dtype=int))
    if np.any(x0 < 0) or np.any(x0 >= grid.periods):
        raise ValueError(f"site {tuple(x0)} lies outside the grid")
    amps = np.zeros(grid.shape + (model.coin_dim,), dtype=complex)
    amps[site_array_index(grid, x0)] = spinor
    return FieldState(amps, grid, model, POSITION)


def default_centre(grid):
    """Grid-centre site, on the even sublattice for BCC."""
    half = np.array([n // 2 for n in grid.sizes])
    return 2 * half if grid.is_bcc else half


@dataclass(frozen=True)
class ParticleStateSpec:
    model: object
    sizes: tuple
    k0: tuple
    sigma: tuple
    branch: object = None  # s for two-component walks, (s, p) for four; default is the first (+) branch
    centre: tuple = None
    frame: str = "helicity"  # or "smooth": project the k0 eigenvectors onto each slot's branch
    nearest_slot: tuple = field(init=False, default=None)

    def __post_init__(self):
        d = self.model.dimension
        k0 = tuple(float(v) for v in np.atleast_1d(self.k0))
        sigma = np.broadcast_to(np.atleast_1d(np.asarray(self.sigma, dtype=float)), (d,))
        if len(k0) != d:
            raise ValueError(f"k0 must have {d} components")
        if np.any(sigma <= 0):
            raise ValueError("sigma must be positive")
        if self.frame not in ("helicity", "smooth"):
            raise ValueError(f"frame must be 'helicity' or 'smooth', got {self.frame!r}")
        if self.branch is None:
            object.__setattr__(self, "branch", self.model.branch_labels[0])
        elif isinstance(self.branch, list):
            object.__setattr__(self, "branch", tuple(self.branch))
        if self.branch not in self.model.branch_labels:
            raise ValueError(f"branch {self.branch!r} not in {self.model.branch_labels}")
        object.__setattr__(self, "k0", k0)
        object.__setattr__(self, "sigma", tuple(float(s) for s in sigma))
        object.__setattr__(self, "sizes", tuple(int(n) for n in np.atleast_1d(self.sizes)))
        grid = self.grid
        dist = np.linalg.norm(wrap_difference(grid, grid.slot_wavevectors() - np.array(k0)), axis=-1)
        object.__setattr__(self, "nearest_slot", tuple(int(i) for i in np.unravel_index(np.argmin(dist), dist.shape)))

    @property
    def grid(self):
        return self.model.grid(*self.sizes)


def gaussian_envelope(spec):
    """Discrete-normalized ``exp(-sum (k - k0)^2 / (4 sigma^2))`` over the slots."""
    grid = spec.grid
    delta = wrap_difference(grid, grid.slot_wavevectors() - np.array(spec.k0))
    g = np.exp(-np.sum(delta**2 / (4.0 * np.array(spec.sigma) ** 2), axis=-1))
    return g / np.sqrt(np.sum(g**2)), delta


def branch_vectors(spec):
    """Eigenvectors of every branch on every slot, shape ``grid.shape + (s, s)``.

    Where the closed form is 0/0 but the frequency branch is still well
    defined (massive four-component walk at k = 0), the vectors are taken as
    the limit along the ray from ``k0`` and projected back onto the exact
    eigenspaces of the slot.
    """
    grid, model = spec.grid, spec.model
    kappa = grid.slot_wavevectors().reshape(-1, model.dimension)
    if spec.frame == "smooth":
        return _smooth_vectors(spec, kappa).reshape(grid.shape + (model.coin_dim,) * 2)
    vecs, degenerate = eigenvectors(kappa, model)
    for q in np.nonzero(degenerate)[0]:
        if sin_omega(kappa[q], model) < DEGENERACY_TOL:
            continue
        ray = wrap_difference(grid, np.array(spec.k0) - kappa[q])
        ray = ray / np.linalg.norm(ray) if np.linalg.norm(ray) > 0 else np.eye(model.dimension)[-1]
        near, _ = eigenvectors(kappa[q] + 1e-6 * ray, model)
        p_plus, p_minus, _ = branch_projectors(kappa[q], model)
        half = model.coin_dim // 2
        proj = np.concatenate([p_plus @ near[:, :half], p_minus @ near[:, half:]], axis=1)
        # re-orthonormalize inside each eigenspace
        for cols in (slice(0, half), slice(half, None)):
            qmat, r = np.linalg.qr(proj[:, cols])
            proj[:, cols] = qmat * np.sign(np.diag(r).real + (np.diag(r).real == 0))
        vecs[q] = proj
    return vecs.reshape(grid.shape + (model.coin_dim,) * 2)


def _smooth_vectors(spec, kappa):
    # P_s(k) u_b(k0), orthonormalized within each frequency branch
    model = spec.model
    ref, _ = eigenvectors(np.array(spec.k0), model)
    p_plus, p_minus, _ = branch_projectors(kappa, model)
    half = model.coin_dim // 2
    vecs = np.concatenate([p_plus @ ref[:, :half], p_minus @ ref[:, half:]], axis=-1)
    for cols in (slice(0, half), slice(half, None)):
        qmat, r = np.linalg.qr(vecs[..., cols])
        diag = np.diagonal(r, axis1=-2, axis2=-1)
        vecs[..., cols] = qmat * (np.conj(diag) / np.where(np.abs(diag) > 0, np.abs(diag), 1.0))[..., None, :]
    return vecs


def _check_support(spec):
    grid, model = spec.grid, spec.model
    delta = wrap_difference(grid, grid.slot_wavevectors() - np.array(spec.k0))
    inside = np.all(np.abs(delta) <= 6 * np.array(spec.sigma), axis=-1)
    sw = sin_omega(grid.slot_wavevectors()[inside], model)
    if np.any(sw < DEGENERACY_TOL):
        raise Degenerate("a slot with sin(omega) = 0 lies within 6 sigma of k0")


def eigenbasis_state(spec, weights):
    """Gaussian envelope attached to ``sum_b weights[b] |u_b(k)>`` on every slot.

    ``weights`` is ordered like ``model.branch_labels`` and must be unit norm.
    """
    model, grid = spec.model, spec.grid
    weights = np.asarray(weights, dtype=complex)
    if weights.shape != (model.coin_dim,):
        raise ValueError(f"need {model.coin_dim} branch weights")
    if abs(np.sum(np.abs(weights) ** 2) - 1.0) > 1e-12:
        raise ValueError("branch weights must satisfy sum |c|^2 = 1")
    _check_support(spec)
    g, _ = gaussian_envelope(spec)
    centre = default_centre(grid) if spec.centre is None else np.asarray(spec.centre, dtype=float)
    phase = np.exp(-1j * grid.slot_wavevectors() @ centre)
    vecs = branch_vectors(spec)
    amps = (g * phase)[..., None] * np.einsum("...ib,b->...i", vecs, weights)
    return FieldState(amps, grid, model, MOMENTUM).to_position()


def gaussian_particle_state(spec):
    """Gaussian packet on the single branch ``spec.branch``."""
    weights = np.zeros(spec.model.coin_dim)
    weights[spec.model.branch_labels.index(spec.branch)] = 1.0
    return eigenbasis_state(spec, weights)


def superposition_state(spec, c_plus, c_minus, p=1):
    """``c_plus |psi_+> + c_minus |psi_->`` with a shared envelope.

    For four-component walks both parts sit on the ``p`` helicity branch.
    """
    if abs(abs(c_plus) ** 2 + abs(c_minus) ** 2 - 1.0) > 1e-12:
        raise ValueError("need |c_plus|^2 + |c_minus|^2 = 1")
    labels = spec.model.branch_labels
    weights = np.zeros(len(labels), dtype=complex)
    if spec.model.coin_dim == 4:
        weights[labels.index((1, p))] = c_plus
        weights[labels.index((-1, p))] = c_minus
    else:
        weights[labels.index(1)] = c_plus
        weights[labels.index(-1)] = c_minus
    return eigenbasis_state(spec, weights)


def band_concentration(state, k0, sigma):
    """Fraction of the squared norm on slots with ``|k_i - k0_i| <= sigma_i``."""
    mom = state.to_momentum()
    grid = state.grid
    delta = wrap_difference(grid, grid.slot_wavevectors() - np.atleast_1d(np.asarray(k0, dtype=float)))
    sigma = np.broadcast_to(np.atleast_1d(np.asarray(sigma, dtype=float)), (grid.dimension,))
    inside = np.all(np.abs(delta) <= sigma * (1 + 1e-12), axis=-1)
    dens = np.sum(np.abs(mom.amplitudes) ** 2, axis=-1)
    return float(np.sum(dens[inside]) / np.sum(dens))


class SignSplit(NamedTuple):
    plus: FieldState
    minus: FieldState
    degenerate_mass: float


def sign_split(state):
    """Split into positive and negative frequency parts (momentum domain).

    Slots where sin(omega) = 0 are assigned with the fallback eigenbasis and
    their mass is reported.
    """
    model, grid = state.model, state.grid
    mom = state.to_momentum()
    kappa, _, coef_hat, degenerate = _slot_table(model, grid)
    flat = mom.amplitudes.reshape(-1, model.coin_dim)
    mhat_psi = np.einsum("qa,aij,qj->qi", coef_hat, model.gammas, flat)
    plus = 0.5 * (flat + mhat_psi)
    bad = np.nonzero(degenerate)[0]
    if len(bad):
        p_plus, _, _ = branch_projectors(kappa[bad], model)
        plus[bad] = np.einsum("qij,qj->qi", p_plus, flat[bad])
    minus = flat - plus
    deg_mass = float(np.sum(np.abs(flat[bad]) ** 2))
    shape = mom.amplitudes.shape
    return SignSplit(
        FieldState(plus.reshape(shape), grid, model, MOMENTUM, state.time),
        FieldState(minus.reshape(shape), grid, model, MOMENTUM, state.time),
        deg_mass,
    )


class BranchDecomposition(NamedTuple):
    components: dict
    degenerate_mass: float


def branch_decompose(state, spec=None):
    """Project every slot onto each eigenvector; components sum to the state.

    Where the frequency is degenerate the split inside an eigenspace is a
    convention.  Passing the ``spec`` a state was built from decomposes in
    the same basis the constructor used; otherwise the dense fallback basis
    is used.  Either way the mass on such slots is reported.
    """
    model, grid = state.model, state.grid
    mom = state.to_momentum()
    kappa = grid.slot_wavevectors().reshape(-1, model.dimension)
    vecs, degenerate = eigenvectors(kappa, model)
    if spec is not None:
        if spec.grid != grid or spec.model != model:
            raise ValueError("spec describes a different grid or model")
        vecs = branch_vectors(spec).reshape(vecs.shape)
    flat = mom.amplitudes.reshape(-1, model.coin_dim)
    coeffs = np.einsum("qib,qi->qb", np.conj(vecs), flat)
    shape = mom.amplitudes.shape
    comps = {}
    for b, label in enumerate(model.branch_labels):
        part = vecs[:, :, b] * coeffs[:, b : b + 1]
        comps[label] = FieldState(part.reshape(shape), grid, model, MOMENTUM, state.time)
    deg_mass = float(np.sum(np.abs(flat[degenerate]) ** 2))
    return BranchDecomposition(comps, deg_mass)
