"""Centred unitary DFTs on cubic grids and the BCC transform built from two of them.

Convention (cubic, per axis of length N with p = floor(N/2))::

    fhat_k = N^{-1/2} sum_n f_n exp(-2 pi i p n / N) exp(2 pi i k n / N)
    f_n    = exp(2 pi i p n / N) N^{-1/2} sum_k fhat_k exp(-2 pi i k n / N)

A BCC field is split into its even and odd sublattice sequences f0, f1 and::

    fhat0 = (F f0 - a F f1) / sqrt 2,   fhat1 = (F f0 + a F f1) / sqrt 2
    a_k   = exp(i pi sum_i (k_i - p_i) / N_i)

Arrays may carry any number of trailing axes (coin components, batches);
only the lattice axes are transformed.
"""
import numpy as np
import scipy.fft as sfft

_workers = None


def set_workers(n):
    """Number of threads handed to scipy.fft (None = library default)."""
    global _workers
    _workers = None if n is None else max(1, int(n))


def _centre_phase(sizes, sign):
    # exp(sign * 2 pi i p.n / N) on the grid, broadcastable over trailing axes later
    phase = np.ones(tuple(sizes), dtype=complex)
    for ax, n in enumerate(sizes):
        shape = [1] * len(sizes)
        shape[ax] = n
        p = n // 2
        phase = phase * np.exp(sign * 2j * np.pi * p * np.arange(n) / n).reshape(shape)
    return phase


def _rect_forward(f, sizes):
    d = len(sizes)
    f = np.asarray(f, dtype=complex)
    ph = _centre_phase(sizes, -1.0).reshape(tuple(sizes) + (1,) * (f.ndim - d))
    return sfft.ifftn(f * ph, axes=tuple(range(d)), norm="ortho", workers=_workers)


def _rect_inverse(fh, sizes):
    d = len(sizes)
    fh = np.asarray(fh, dtype=complex)
    ph = _centre_phase(sizes, 1.0).reshape(tuple(sizes) + (1,) * (fh.ndim - d))
    return ph * sfft.fftn(fh, axes=tuple(range(d)), norm="ortho", workers=_workers)


def _check_cubic(grid, arr):
    if grid.is_bcc:
        raise ValueError("rectangular DFT needs a simple cubic grid")
    if tuple(arr.shape[: grid.dimension]) != grid.sizes:
        raise ValueError(f"array shape {arr.shape} does not match grid sizes {grid.sizes}")


def dft_rect(f, grid):
    """Centred unitary DFT of a field on a cubic grid."""
    f = np.asarray(f)
    _check_cubic(grid, f)
    return _rect_forward(f, grid.sizes)


def idft_rect(fh, grid):
    fh = np.asarray(fh)
    _check_cubic(grid, fh)
    return _rect_inverse(fh, grid.sizes)


def bcc_phase(sizes):
    """The a_k factor of the BCC reduction on the centred index."""
    sizes = tuple(sizes)
    ks = np.meshgrid(*[np.arange(n) - n // 2 for n in sizes], indexing="ij")
    return np.exp(1j * np.pi * sum(k / n for k, n in zip(ks, sizes)))


def _check_bcc(grid, arr):
    if not grid.is_bcc:
        raise ValueError("BCC transform needs a BCC grid")
    if tuple(arr.shape[:4]) != grid.shape:
        raise ValueError(f"array shape {arr.shape} does not match BCC grid {grid.shape}")


def bcc_dft(f, grid):
    """Forward BCC transform; returns the stacked pair ``[fhat0, fhat1]``."""
    f = np.asarray(f)
    _check_bcc(grid, f)
    f0 = _rect_forward(f[0], grid.sizes)
    f1 = _rect_forward(f[1], grid.sizes)
    a = bcc_phase(grid.sizes).reshape(grid.sizes + (1,) * (f.ndim - 4))
    af1 = a * f1
    out = np.empty(f.shape, dtype=complex)
    out[0] = (f0 - af1) / np.sqrt(2.0)
    out[1] = (f0 + af1) / np.sqrt(2.0)
    return out


def bcc_idft(fh0, fh1=None, grid=None):
    """Inverse BCC transform.

    Accepts either the stacked pair returned by :func:`bcc_dft` or the two
    sequences separately: ``bcc_idft(pair, grid=g)`` / ``bcc_idft(fh0, fh1, g)``.
    """
    if fh1 is None:
        pair = np.asarray(fh0)
    else:
        fh0, fh1 = np.asarray(fh0), np.asarray(fh1)
        if fh0.shape != fh1.shape:
            raise ValueError(f"sequence shapes differ: {fh0.shape} vs {fh1.shape}")
        pair = np.stack([fh0, fh1])
    _check_bcc(grid, pair)
    a = bcc_phase(grid.sizes).reshape(grid.sizes + (1,) * (pair.ndim - 4))
    out = np.empty(pair.shape, dtype=complex)
    out[0] = _rect_inverse(pair[0] + pair[1], grid.sizes) / np.sqrt(2.0)
    out[1] = _rect_inverse(np.conj(a) * (pair[1] - pair[0]), grid.sizes) / np.sqrt(2.0)
    return out


def forward(f, grid):
    """Position field -> spectral field for either lattice kind."""
    return bcc_dft(f, grid) if grid.is_bcc else dft_rect(f, grid)


def inverse(fh, grid):
    return bcc_idft(fh, grid=grid) if grid.is_bcc else idft_rect(fh, grid)


def direct_transform(f, grid):
    """Slow reference transform: ``|sites|^{-1/2} sum_x f(x) exp(-i k.x)`` per slot.

    Uses the slot wave-vectors and physical site positions directly; meant for
    checking the fast transforms on small grids.
    """
    f = np.asarray(f, dtype=complex)
    if f.shape[: len(grid.shape)] != grid.shape:
        raise ValueError(f"array shape {f.shape} does not match grid {grid.shape}")
    nsites = int(np.prod(grid.shape))
    pos = grid.positions().reshape(nsites, grid.dimension)
    kap = grid.slot_wavevectors().reshape(nsites, grid.dimension)
    kernel = np.exp(-1j * kap @ pos.T) / np.sqrt(nsites)
    flat = f.reshape(nsites, -1)
    return (kernel @ flat).reshape(f.shape)
