"""Slow reference implementations used only by the tests."""
import numpy as np


def centred_dft_loop(f, sizes):
    """fhat_k = N^-1/2 sum_n f_n exp(-2 pi i p.n/N) exp(2 pi i k.n/N), by explicit loops."""
    sizes = tuple(sizes)
    p = np.array([n // 2 for n in sizes])
    N = np.array(sizes)
    out = np.zeros(f.shape, dtype=complex)
    total = np.sqrt(np.prod(N))
    for k in np.ndindex(*sizes):
        acc = 0
        for n in np.ndindex(*sizes):
            arg = 2 * np.pi * np.sum((np.array(k) - p) * np.array(n) / N)
            acc = acc + f[n] * np.exp(1j * arg)
        out[k] = acc / total
    return out


def bcc_dft_loop(f, sizes):
    """BCC transform by direct summation over the physical sites.

    Family 1 slot k collects exp(2 pi i (k - p).x / 2N); family 0 slot k is
    shifted by N_1 along the first axis.
    """
    sizes = tuple(sizes)
    N = np.array(sizes)
    p = N // 2
    sites = []
    for sub in (0, 1):
        for m in np.ndindex(*sizes):
            sites.append((sub, m, 2 * np.array(m) + sub))
    out = np.zeros(f.shape, dtype=complex)
    norm = np.sqrt(len(sites))
    shift = np.array([N[0], 0, 0])
    for fam in (0, 1):
        for k in np.ndindex(*sizes):
            kt = np.array(k) - p + (shift if fam == 0 else 0)
            acc = 0
            for sub, m, x in sites:
                acc = acc + f[(sub,) + m] * np.exp(1j * np.pi * np.sum(kt * x / N))
            out[(fam,) + k] = acc / norm
    return out


def dense_eigh_unitary(U):
    """Eigenphases of a unitary matrix from a dense solver, sorted."""
    lam = np.linalg.eigvals(U)
    return np.sort(np.angle(lam))


def fd_gradient(func, k, h=1e-5):
    k = np.asarray(k, dtype=float)
    out = []
    for j in range(len(k)):
        e = np.zeros_like(k)
        e[j] = h
        out.append((func(k + e) - func(k - e)) / (2 * h))
    return np.array(out)


def random_field(rng, shape):
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return a / np.linalg.norm(a)
