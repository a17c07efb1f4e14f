"""Hot kernels: numba-compiled loops with pure-numpy equivalents.

The backend is chosen at import time from the ``QWALK_DISABLE_NUMBA``
environment variable (any of ``1``, ``true``, ``yes`` selects numpy) and
can be switched at runtime with :func:`set_backend`.  Both paths take the
same arguments and return arrays that agree to rounding.
"""
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_OFF = {"1", "true", "yes", "on"}
_backend = "numpy" if (not HAS_NUMBA or os.environ.get("QWALK_DISABLE_NUMBA", "").lower() in _OFF) else "numba"


def backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


# --------------------------------------------------------------------------
# position-space stencil: out[dst, m] += mats[t] @ psi[src, m - shift]
# arrays are (sublattice, N1, N2, N3, coin); missing axes have length 1


def _stencil_step_numpy(psi, src, dst, shifts, mats):
    out = np.zeros_like(psi)
    for t in range(len(src)):
        moved = np.roll(psi[src[t]], tuple(shifts[t]), axis=(0, 1, 2))
        out[dst[t]] += moved @ mats[t].T
    return out


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _stencil_step_jit(psi, src, dst, shifts, mats):
        # one sweep per nonzero matrix entry; transition matrices are mostly zeros
        L, n1, n2, n3, s = psi.shape
        out = np.zeros_like(psi)
        for t in range(src.shape[0]):
            a = src[t]
            b = dst[t]
            d1 = shifts[t, 0]
            d2 = shifts[t, 1]
            d3 = shifts[t, 2]
            for r in range(s):
                for c in range(s):
                    v = mats[t, r, c]
                    if v == 0:
                        continue
                    for i in range(n1):
                        si = (i - d1) % n1
                        for j in range(n2):
                            sj = (j - d2) % n2
                            for k in range(n3):
                                sk = k - d3
                                if sk < 0:
                                    sk += n3
                                elif sk >= n3:
                                    sk -= n3
                                out[b, i, j, k, r] += v * psi[a, si, sj, sk, c]
        return out


def stencil_step(psi, src, dst, shifts, mats):
    if _backend == "numba":
        return _stencil_step_jit(psi, src, dst, shifts, mats)
    return _stencil_step_numpy(psi, src, dst, shifts, mats)


# --------------------------------------------------------------------------
# per-slot propagator: out = c*psi - i*sn * sum_a coef[a] * G[a] @ psi


def _slot_propagate_numpy(psi, c, sn, coef, gammas):
    gpsi = np.einsum("aij,nj->nai", gammas, psi)
    mixed = np.einsum("na,nai->ni", coef, gpsi)
    return c[:, None] * psi - 1j * sn[:, None] * mixed


if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _slot_propagate_jit(psi, c, sn, coef, gammas):
        n, s = psi.shape
        na = gammas.shape[0]
        out = np.empty_like(psi)
        for q in range(n):
            for r in range(s):
                acc = 0j
                for a in range(na):
                    ca = coef[q, a]
                    if ca == 0.0:
                        continue
                    g = 0j
                    for col in range(s):
                        g += gammas[a, r, col] * psi[q, col]
                    acc += ca * g
                out[q, r] = c[q] * psi[q, r] - 1j * sn[q] * acc
        return out


def slot_propagate(psi, c, sn, coef, gammas):
    """Apply ``cos(wt) I - i sin(wt) Mhat`` slot by slot on a flat (slots, coin) array."""
    if _backend == "numba":
        return _slot_propagate_jit(psi, c, sn, coef, gammas)
    return _slot_propagate_numpy(psi, c, sn, coef, gammas)
