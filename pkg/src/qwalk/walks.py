"""Weyl and Dirac walk unitaries in the wave-vector representation.

Every walk in the package has the form

    U_k = n u_k I - i M_k,    M_k = n sum_i nt_i(k) G_i - m G_0,

with anticommuting Hermitian involutions ``G`` (Pauli matrices for the
two-component Weyl walk, ``g0 g^i`` and ``g0`` for the four-component Dirac
walk, ``sigma_z`` and ``sigma_x`` for the decoupled one-dimensional Dirac
walk).  ``M_k^2 = sin^2 w_k`` and ``cos w_k = n u_k``, so the propagator for
``t`` steps is ``cos(w t) I - i sin(w t) M_k / sin w_k`` and the spectral
projectors are ``(I +- M_k / sin w_k) / 2``.

Two-dimensional walks are evaluated on generator axes ``(k1, k2)``; the
closed form in ``(kx, ky)`` is reached through ``kx = (k1 + k2)/2`` and
``ky = (k1 - k2)/2``, which makes ``U_k`` a trigonometric polynomial in the
four generators ``+-e1, +-e2`` only.
"""
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .lattice import BCC, CUBIC, GridSpec

WEYL = "weyl"
DIRAC = "dirac"

DEGENERACY_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
#: Spinorial representation.  The sign of g^i is chosen so that the gamma
#: form of the Dirac walk coincides with its block form diag-blocks (nW, nW^dag).
GAMMA0 = np.block([[_Z2, _I2], [_I2, _Z2]])
GAMMA = np.stack([np.block([[_Z2, -s], [s, _Z2]]) for s in PAULI])

BCC_GENERATORS = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]])


class Degenerate(ValueError):
    """Raised where a closed form has a 0/0 (sin w = 0)."""


@dataclass(frozen=True)
class WalkModel:
    family: str
    dimension: int
    mass: float = 0.0
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in (WEYL, DIRAC):
            raise ValueError(f"unknown walk family {self.family!r}")
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        m = float(self.mass)
        if self.family == WEYL and m != 0.0:
            raise ValueError("the Weyl walk is massless")
        if not 0.0 <= m <= 1.0:
            raise ValueError(f"mass must lie in [0, 1], got {m}")
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "gammas", _gammas(self.family, self.dimension))

    @classmethod
    def weyl(cls, dimension):
        return cls(WEYL, dimension, 0.0)

    @classmethod
    def dirac(cls, dimension, mass):
        return cls(DIRAC, dimension, mass)

    @property
    def n(self):
        return float(np.sqrt(1.0 - self.mass**2))

    @property
    def coin_dim(self):
        return 4 if (self.family == DIRAC and self.dimension > 1) else 2

    @property
    def lattice_kind(self):
        return BCC if self.dimension == 3 else CUBIC

    @property
    def branch_labels(self):
        if self.coin_dim == 4:
            return [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        return [1, -1]

    def generators(self):
        """Lattice steps with a non-zero transition matrix (0 only for Dirac)."""
        if self.dimension == 1:
            gens = [(1,), (-1,)]
        elif self.dimension == 2:
            gens = [(1, 0), (0, 1), (-1, 0), (0, -1)]
        else:
            gens = [tuple(h) for h in BCC_GENERATORS] + [tuple(-h) for h in BCC_GENERATORS]
        if self.family == DIRAC:
            gens.append((0,) * self.dimension)
        return gens

    def grid(self, *sizes):
        if self.dimension == 3:
            return GridSpec.bcc(*sizes)
        return GridSpec.cubic(*sizes)


def _gammas(family, dim):
    if family == WEYL:
        return np.concatenate([PAULI, np.zeros((1, 2, 2), complex)])
    if dim == 1:
        return np.stack([_Z2, _Z2, SIGMA_Z, SIGMA_X])
    return np.concatenate([np.einsum("ij,ajk->aik", GAMMA0, GAMMA), GAMMA0[None]])


# --------------------------------------------------------------------------
# closed-form ingredients, vectorised over leading axes of kappa


def _as_kappa(kappa, dim):
    k = np.asarray(kappa, dtype=float)
    if dim == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    if k.shape[-1] != dim:
        raise ValueError(f"wave-vector must have {dim} components, got shape {k.shape}")
    return k


def weyl_terms(kappa, dim):
    """Return ``u, nt, du, dnt`` with ``du[..., j] = d u / d k_j`` and
    ``dnt[..., j, i] = d nt_i / d k_j``."""
    k = _as_kappa(kappa, dim)
    if dim == 1:
        c, s = np.cos(k[..., 0]), np.sin(k[..., 0])
        zero = np.zeros_like(c)
        u = c
        nt = np.stack([zero, zero, s], -1)
        du = (-s)[..., None]
        dnt = np.stack([zero, zero, c], -1)[..., None, :]
        return u, nt, du, dnt
    if dim == 2:
        kx = 0.5 * (k[..., 0] + k[..., 1])
        ky = 0.5 * (k[..., 0] - k[..., 1])
        cx, sx, cy, sy = np.cos(kx), np.sin(kx), np.cos(ky), np.sin(ky)
        u = cx * cy
        nt = np.stack([sx * cy, cx * sy, sx * sy], -1)
        dx_u, dy_u = -sx * cy, -cx * sy
        dx_n = np.stack([cx * cy, -sx * sy, cx * sy], -1)
        dy_n = np.stack([-sx * sy, cx * cy, sx * cy], -1)
        du = 0.5 * np.stack([dx_u + dy_u, dx_u - dy_u], -1)
        dnt = 0.5 * np.stack([dx_n + dy_n, dx_n - dy_n], -2)
        return u, nt, du, dnt
    cx, cy, cz = np.cos(k[..., 0]), np.cos(k[..., 1]), np.cos(k[..., 2])
    sx, sy, sz = np.sin(k[..., 0]), np.sin(k[..., 1]), np.sin(k[..., 2])
    u = cx * cy * cz + sx * sy * sz
    nt = np.stack(
        [sx * cy * cz - cx * sy * sz, cx * sy * cz + sx * cy * sz, cx * cy * sz - sx * sy * cz], -1
    )
    du = np.stack(
        [-sx * cy * cz + cx * sy * sz, -cx * sy * cz + sx * cy * sz, -cx * cy * sz + sx * sy * cz], -1
    )
    d_by_x = np.stack([u, -sx * sy * cz + cx * cy * sz, -sx * cy * sz - cx * sy * cz], -1)
    d_by_y = np.stack([-sx * sy * cz - cx * cy * sz, cx * cy * cz - sx * sy * sz, -cx * sy * sz - sx * cy * cz], -1)
    d_by_z = np.stack([-sx * cy * sz - cx * sy * cz, -cx * sy * sz + sx * cy * cz, u], -1)
    dnt = np.stack([d_by_x, d_by_y, d_by_z], -2)
    return u, nt, du, dnt


def coefficients(kappa, model):
    """Coefficients of ``M_k`` on ``(G_1, G_2, G_3, G_0)``."""
    _, nt, _, _ = weyl_terms(kappa, model.dimension)
    mass = np.full(nt.shape[:-1] + (1,), -model.mass)
    return np.concatenate([model.n * nt, mass], -1)


def combine(coef, gammas):
    """``sum_a coef[..., a] G_a`` as matrices."""
    return np.einsum("...a,aij->...ij", coef, gammas)


def walk_matrix(kappa, model):
    """``U_k`` for any model (batched over leading axes of ``kappa``)."""
    u, nt, _, _ = weyl_terms(kappa, model.dimension)
    s = model.coin_dim
    coef = coefficients(kappa, model)
    return model.n * u[..., None, None] * np.eye(s) - 1j * combine(coef, model.gammas)


def weyl_unitary(kappa, model):
    if model.family != WEYL:
        raise ValueError("weyl_unitary needs a Weyl model")
    return walk_matrix(kappa, model)


def dirac_unitary(kappa, model):
    if model.family != DIRAC:
        raise ValueError("dirac_unitary needs a Dirac model")
    return walk_matrix(kappa, model)


def dirac_gamma_form(kappa, model):
    """``n u I - i n g0 g.nt + i m g0`` built from explicit gamma matrices."""
    if model.family != DIRAC or model.coin_dim != 4:
        raise ValueError("the gamma form exists for the four-component Dirac walk")
    u, nt, _, _ = weyl_terms(kappa, model.dimension)
    g0g = np.einsum("ij,ajk->aik", GAMMA0, GAMMA)
    return (
        model.n * u[..., None, None] * np.eye(4)
        - 1j * model.n * np.einsum("...a,aij->...ij", nt, g0g)
        + 1j * model.mass * GAMMA0
    )


def _sin_from_terms(nt, model):
    # 1 - n^2 u^2 = m^2 + n^2 |nt|^2, free of cancellation near u = 1
    return np.sqrt(model.mass**2 + model.n**2 * np.sum(nt**2, axis=-1))


def dispersion(kappa, model):
    u, nt, _, _ = weyl_terms(kappa, model.dimension)
    return np.arctan2(_sin_from_terms(nt, model), model.n * u)


def sin_omega(kappa, model):
    _, nt, _, _ = weyl_terms(kappa, model.dimension)
    return _sin_from_terms(nt, model)


def _require_regular(kappa, model):
    s = sin_omega(kappa, model)
    if np.any(s < DEGENERACY_TOL):
        raise Degenerate(f"sin(omega) < {DEGENERACY_TOL:g} at k = {np.asarray(kappa).tolist()}")
    return s


def interpolating_hamiltonian(kappa, model):
    """Hermitian ``H`` with ``exp(-i H) = U_k``."""
    s = _require_regular(kappa, model)
    w = dispersion(kappa, model)
    mat = combine(coefficients(kappa, model), model.gammas)
    return (w / s)[..., None, None] * mat


def _gradient(kappa, model):
    _, nt, du, _ = weyl_terms(kappa, model.dimension)
    return -model.n * du / _sin_from_terms(nt, model)[..., None]


def group_velocity(kappa, model):
    """Analytic gradient of the dispersion relation."""
    _require_regular(kappa, model)
    return _gradient(kappa, model)


def _fd_tensor(func, kappa, h):
    k = np.asarray(kappa, dtype=float)
    d = k.shape[-1]
    parts = []
    for j in range(d):
        step = np.zeros(d)
        step[j] = h
        parts.append((func(k + step) - func(k - step)) / (2 * h))
    return np.stack(parts, axis=0)


def dispersion_derivatives(kappa, model, order):
    """Symmetric tensor of ``order``-th partial derivatives of w at ``kappa``.

    Order 1 is analytic; higher orders nest central differences on the
    analytic gradient (step 1e-4 for the Hessian, 1e-3 beyond).
    """
    k = _as_kappa(kappa, model.dimension)
    _require_regular(k, model)
    if order < 1:
        raise ValueError("order must be >= 1")

    def nested(kk, r):
        if r == 1:
            return _gradient(kk, model)
        h = 1e-4 if r == 2 else 1e-3
        return _fd_tensor(lambda q: nested(q, r - 1), kk, h)

    tensor = nested(k, order)
    if order == 2:
        tensor = 0.5 * (tensor + tensor.T)
    return tensor


def diffusion_tensor(kappa, model):
    return dispersion_derivatives(kappa, model, 2)


# --------------------------------------------------------------------------
# eigenvectors


def _phase_fix(vecs, tol=1e-12):
    """Make the first non-negligible component of every column real positive."""
    mags = np.abs(vecs)
    first = np.argmax(mags > tol, axis=-2)
    lead = np.take_along_axis(vecs, first[..., None, :], axis=-2)
    lead = np.where(np.abs(lead) > 0, lead, 1.0)
    return vecs * (np.conj(lead) / np.abs(lead))


def _dense_eigenvectors(mat):
    """Eigenvectors of a Hermitian ``M`` ordered by decreasing eigenvalue (ties stable)."""
    vals, vecs = np.linalg.eigh(mat)
    order = np.argsort(-np.round(vals, 12), kind="stable")
    return _phase_fix(vecs[:, order])


def _stable_sum(root, x, rest2):
    """``root + x`` where ``root**2 = x**2 + rest2``, without cancellation."""
    with np.errstate(divide="ignore", invalid="ignore"):
        alt = rest2 / (root - x)
    return np.clip(np.where(x >= 0, root + x, np.where(root - x > 0, alt, 0.0)), 0.0, None)


def eigenvectors(kappa, model):
    """Closed-form eigenvector matrix, columns ordered as ``model.branch_labels``.

    Returns ``(vecs, degenerate)`` where ``degenerate`` marks the points where
    the closed form is 0/0 and a dense eigendecomposition of ``M_k`` was used.
    """
    k = _as_kappa(kappa, model.dimension)
    _, nt, _, _ = weyl_terms(k, model.dimension)
    n, m = model.n, model.mass
    # sin of the Weyl and walk eigenphases from |nt|, avoiding 1 - u^2
    rho2 = nt[..., 0] ** 2 + nt[..., 1] ** 2
    sin_weyl = np.sqrt(rho2 + nt[..., 2] ** 2)
    sin_w = np.sqrt(m**2 + (n * sin_weyl) ** 2)
    lead = k.shape[:-1]
    s = model.coin_dim
    vecs = np.zeros(lead + (s, s), dtype=complex)

    if model.family == DIRAC and model.dimension == 1:
        degenerate = sin_w < DEGENERACY_TOL
        safe = np.where(degenerate, 1.0, sin_w)
        x = n * nt[..., 2]
        for col, sgn in enumerate((1, -1)):
            plus = _stable_sum(safe, sgn * x, m**2) / safe
            minus = _stable_sum(safe, -sgn * x, m**2) / safe
            vecs[..., 0, col] = np.sqrt(plus / 2)
            vecs[..., 1, col] = -sgn * np.sqrt(minus / 2)
    else:
        degenerate = sin_weyl < DEGENERACY_TOL
        safe = np.where(degenerate, 1.0, sin_weyl)
        w = nt[..., 1] - 1j * nt[..., 0]
        eiphi = np.exp(1j * (np.angle(w) - np.pi / 2))
        # 1 - p v_W = (sin_weyl + p nt_3) / sin_weyl
        one_minus = {p: _stable_sum(safe, p * nt[..., 2], rho2) / safe for p in (1, -1)}
        if s == 2:
            for col, sgn in enumerate((1, -1)):
                vecs[..., 0, col] = np.sqrt(one_minus[sgn] / 2)
                vecs[..., 1, col] = -sgn * eiphi * np.sqrt(one_minus[-sgn] / 2)
        else:
            safe_w = np.where(sin_w < DEGENERACY_TOL, 1.0, sin_w)
            # 1 + q v_D = (sin_w + q n sin_weyl) / sin_w
            one_plus_d = {q: _stable_sum(safe_w, q * n * sin_weyl, m**2) / safe_w for q in (1, -1)}
            for col, (sgn, p) in enumerate(model.branch_labels):
                a = np.sqrt(one_minus[p])
                b = np.sqrt(one_minus[-p])
                c = np.sqrt(one_plus_d[sgn * p])
                e = np.sqrt(one_plus_d[-sgn * p])
                vecs[..., 0, col] = 0.5 * a * c
                vecs[..., 1, col] = -0.5 * p * eiphi * b * c
                vecs[..., 2, col] = -0.5 * sgn * a * e
                vecs[..., 3, col] = 0.5 * sgn * p * eiphi * b * e
    vecs = _phase_fix(vecs)
    if np.any(degenerate):
        mats = combine(coefficients(k, model), model.gammas)
        if lead == ():
            vecs = _dense_eigenvectors(mats)
        else:
            for idx in zip(*np.nonzero(degenerate)):
                vecs[idx] = _dense_eigenvectors(mats[idx])
    return vecs, degenerate


@dataclass
class SpectrumSlot:
    kappa: np.ndarray
    labels: list
    omega: float
    frequencies: np.ndarray  # signed eigenphases s * w, one per column
    vectors: np.ndarray  # columns are eigenvectors
    degenerate: bool
    u: float
    nt: np.ndarray
    z: complex
    w: complex
    phi: float
    v_weyl: float
    v_dirac: float


def eigensystem(kappa, model):
    k = _as_kappa(kappa, model.dimension)
    if k.ndim != 1:
        raise ValueError("eigensystem takes a single wave-vector; use eigenvectors() for batches")
    u, nt, _, _ = weyl_terms(k, model.dimension)
    u = float(u)
    omega = float(dispersion(k, model))
    vecs, deg = eigenvectors(k, model)
    sin_weyl = np.sqrt(max(1.0 - u * u, 0.0))
    sin_w = np.sin(omega)
    z = u - 1j * nt[2]
    w = nt[1] - 1j * nt[0]
    labels = model.branch_labels
    signs = np.array([lab[0] if isinstance(lab, tuple) else lab for lab in labels])
    return SpectrumSlot(
        kappa=k,
        labels=labels,
        omega=omega,
        frequencies=signs * omega,
        vectors=vecs,
        degenerate=bool(deg),
        u=u,
        nt=nt,
        z=complex(z),
        w=complex(w),
        phi=float(np.angle(w) - np.pi / 2),
        v_weyl=float(z.imag / sin_weyl) if sin_weyl >= DEGENERACY_TOL else float("nan"),
        v_dirac=float(model.n * sin_weyl / sin_w) if sin_w >= DEGENERACY_TOL else float("nan"),
    )


def branch_projectors(kappa, model):
    """Spectral projectors ``(P_plus, P_minus, degenerate)`` onto ``e^{-+ i w}``."""
    coef = coefficients(kappa, model)
    sw = sin_omega(kappa, model)
    degenerate = sw < DEGENERACY_TOL
    mhat = combine(coef / np.where(degenerate, 1.0, sw)[..., None], model.gammas)
    eye = np.eye(model.coin_dim)
    p_plus = 0.5 * (eye + mhat)
    if np.any(degenerate):
        vecs, _ = eigenvectors(kappa, model)
        half = model.coin_dim // 2
        fallback = np.einsum("...ia,...ja->...ij", vecs[..., :half], np.conj(vecs[..., :half]))
        p_plus = np.where(degenerate[..., None, None], fallback, p_plus)
    return p_plus, eye - p_plus, degenerate


# --------------------------------------------------------------------------
# position-space transition matrices


def transition_matrices(model, samples=4):
    """``{h: U_h}`` with ``U_k = sum_h exp(-i k.h) U_h``.

    Obtained by sampling ``U_k`` on a ``samples^d`` grid of wave-vectors and
    inverting the (orthogonal) exponential sum; ``samples`` must separate the
    generator offsets modulo ``samples``.
    """
    d = model.dimension
    ks = 2 * np.pi * np.array(list(product(range(samples), repeat=d))) / samples
    mats = walk_matrix(ks, model)
    out = {}
    for h in model.generators():
        ph = np.exp(1j * ks @ np.array(h, dtype=float))
        uh = np.einsum("q,qij->ij", ph, mats) / len(ks)
        re = np.where(np.abs(uh.real) < 1e-14, 0.0, uh.real)
        im = np.where(np.abs(uh.imag) < 1e-14, 0.0, uh.imag)
        out[tuple(h)] = re + 1j * im
    return out


def reconstruct(tset, kappa):
    k = np.atleast_2d(np.asarray(kappa, dtype=float))
    total = 0
    for h, uh in tset.items():
        total = total + np.exp(-1j * k @ np.array(h, dtype=float))[:, None, None] * uh
    return total


def unitarity_residuals(tset):
    """Max deviations of the four transition-matrix unitarity conditions."""
    hs = list(tset)
    s = next(iter(tset.values())).shape[0]
    eye = np.eye(s)
    r_left = np.abs(sum(tset[h].conj().T @ tset[h] for h in hs) - eye).max()
    r_right = np.abs(sum(tset[h] @ tset[h].conj().T for h in hs) - eye).max()
    diffs = {}
    for h, hp in product(hs, hs):
        delta = tuple(np.subtract(hp, h))
        if any(delta):
            left, right = diffs.get(delta, (0, 0))
            diffs[delta] = (left + tset[h].conj().T @ tset[hp], right + tset[hp] @ tset[h].conj().T)
    cross_left = max((np.abs(a).max() for a, _ in diffs.values()), default=0.0)
    cross_right = max((np.abs(b).max() for _, b in diffs.values()), default=0.0)
    return {
        "sum_UdagU": float(r_left),
        "sum_UUdag": float(r_right),
        "cross_UdagU": float(cross_left),
        "cross_UUdag": float(cross_right),
    }
