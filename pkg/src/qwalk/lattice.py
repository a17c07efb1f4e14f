"""Finite periodic lattices, site ordering and the wave-vector of every spectral slot.

Two kinds of grid exist.  A simple cubic grid samples ``Z^d`` on the box
``0 <= x_i < N_i``.  A BCC grid samples ``2Z^3 u (2Z^3 + t)``, ``t = (1,1,1)``,
on ``2n`` (even sublattice) and ``2n + t`` (odd sublattice) for ``n`` in the
generating box; physical coordinates therefore have period ``2 N_i``.

Field arrays are stored as ``grid.shape + (coin,)`` where ``grid.shape`` is
``(N_1, ..., N_d)`` for cubic grids and ``(2, N_1, N_2, N_3)`` for BCC
(sublattice axis first, even = 0).  C order of that array is the canonical
site order used for dumps: row-major, even sublattice first, coin fastest.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

CUBIC = "cubic"
BCC = "bcc"

#: Wave-vector offset of the f^0 slot family relative to the f^1 family on a
#: BCC grid.  Found by transforming plane waves with the brute-force BCC sum
#: (see tests/test_lattice.py); any odd multiple of pi along one axis is the
#: same point modulo the BCC reciprocal lattice.
BCC_FAMILY_OFFSET = np.array([np.pi, 0.0, 0.0])


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    kind: str = CUBIC
    sizes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.kind not in (CUBIC, BCC):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == BCC and self.dimension != 3:
            raise ValueError("BCC grids are three-dimensional")
        if len(self.sizes) != self.dimension:
            raise ValueError(f"need {self.dimension} sizes, got {self.sizes}")
        # N=1 is allowed for BCC only, where it still yields two sites
        floor = 1 if self.kind == BCC else 2
        if any(n < floor for n in self.sizes):
            raise ValueError(f"grid sizes must be >= {floor}, got {self.sizes}")

    @classmethod
    def cubic(cls, *sizes):
        return cls(len(sizes), CUBIC, sizes)

    @classmethod
    def bcc(cls, n1, n2=None, n3=None):
        n2 = n1 if n2 is None else n2
        n3 = n1 if n3 is None else n3
        return cls(3, BCC, (n1, n2, n3))

    @property
    def is_bcc(self):
        return self.kind == BCC

    @property
    def n_sublattices(self):
        return 2 if self.is_bcc else 1

    @property
    def shape(self):
        return ((2,) if self.is_bcc else ()) + self.sizes

    @property
    def grid_axes(self):
        """Array axes that carry lattice coordinates (sublattice axis excluded)."""
        start = 1 if self.is_bcc else 0
        return tuple(range(start, start + self.dimension))

    @property
    def periods(self):
        """Physical period of the torus along each axis."""
        factor = 2 if self.is_bcc else 1
        return np.array([factor * n for n in self.sizes], dtype=float)

    def positions(self):
        """Physical integer coordinates of every site, shape ``shape + (d,)``."""
        idx = np.stack(np.meshgrid(*[np.arange(n) for n in self.sizes], indexing="ij"), axis=-1)
        if not self.is_bcc:
            return idx
        return np.stack([2 * idx, 2 * idx + 1])

    def slot_wavevectors(self):
        """Wave-vector of every spectral slot, shape ``shape + (d,)``."""
        ks = np.stack(np.meshgrid(*[np.arange(n) for n in self.sizes], indexing="ij"), axis=-1)
        centred = ks - np.array([n // 2 for n in self.sizes])
        if not self.is_bcc:
            return wrap_angle(-2.0 * np.pi * centred / np.array(self.sizes))
        base = -np.pi * centred / np.array(self.sizes)
        return np.stack([wrap_angle(base + BCC_FAMILY_OFFSET), base])

    def validate_field(self, arr, coin_dim=None):
        arr = np.asarray(arr)
        if arr.shape[: len(self.shape)] != self.shape or arr.ndim != len(self.shape) + 1:
            raise ValueError(f"field shape {arr.shape} does not match grid {self.shape} + (coin,)")
        if coin_dim is not None and arr.shape[-1] != coin_dim:
            raise ValueError(f"coin dimension {arr.shape[-1]} != {coin_dim}")
        return arr


def site_count(grid):
    return int(np.prod(grid.sizes)) * grid.n_sublattices


def wrap_angle(x):
    """Map angles into [-pi, pi)."""
    return (np.asarray(x) + np.pi) % (2.0 * np.pi) - np.pi


def _closest_d3(y):
    """Nearest point of the checkerboard lattice {z in Z^3: sum z even}."""
    f = np.rint(y)
    odd = (np.sum(f, axis=-1) % 2) != 0
    if np.any(odd):
        err = y - f
        worst = np.argmax(np.abs(err), axis=-1)
        step = np.where(np.take_along_axis(err, worst[..., None], -1)[..., 0] >= 0, 1.0, -1.0)
        fix = np.zeros_like(f)
        np.put_along_axis(fix, worst[..., None], step[..., None], axis=-1)
        f = np.where(odd[..., None], f + fix, f)
    return f


def wrap_difference(grid, dk):
    """Representative of a wave-vector difference nearest zero.

    Cubic grids reduce modulo ``2 pi Z^d``; BCC grids reduce modulo the BCC
    reciprocal lattice ``pi * {z in Z^3 : sum z even}``.
    """
    dk = np.asarray(dk, dtype=float)
    if not grid.is_bcc:
        return wrap_angle(dk)
    return dk - np.pi * _closest_d3(dk / np.pi)


def wavevector_of_slot(grid, slot):
    """Wave-vector of the plane wave ``exp(i k.x)`` that transforms to a delta at ``slot``.

    ``slot`` is a tuple of grid indices; for BCC the first entry is the family
    (0 for the f^0 sequence, 1 for f^1).
    """
    slot = tuple(int(i) for i in np.atleast_1d(slot))
    if len(slot) != len(grid.shape):
        raise IndexError(f"slot {slot} has wrong rank for grid shape {grid.shape}")
    for i, n in zip(slot, grid.shape):
        if not 0 <= i < n:
            raise IndexError(f"slot {slot} out of range for grid shape {grid.shape}")
    sizes = np.array(grid.sizes)
    k = np.array(slot[-grid.dimension:])
    if not grid.is_bcc:
        return wrap_angle(-2.0 * np.pi * (k - sizes // 2) / sizes)
    base = -np.pi * (k - sizes // 2) / sizes
    return wrap_angle(base + BCC_FAMILY_OFFSET) if slot[0] == 0 else base


class SiteCoord(NamedTuple):
    index: tuple
    sublattice: int
    position: tuple


def iterate_sites(grid):
    """Yield every site in canonical order (row-major, BCC even sublattice first)."""
    for sub in range(grid.n_sublattices):
        for idx in np.ndindex(*grid.sizes):
            pos = tuple(2 * i + sub for i in idx) if grid.is_bcc else tuple(idx)
            yield SiteCoord(idx, sub, pos)


def site_array_index(grid, position):
    """Array index (without coin axis) of a physical site position."""
    pos = np.asarray(position, dtype=int)
    if pos.shape != (grid.dimension,):
        raise ValueError(f"position {position} is not a {grid.dimension}-vector")
    if not grid.is_bcc:
        return tuple(int(p) % n for p, n in zip(pos, grid.sizes))
    parity = pos % 2
    if not (np.all(parity == 0) or np.all(parity == 1)):
        raise ValueError(f"{tuple(pos)} is not a BCC lattice site")
    sub = int(parity[0])
    return (sub,) + tuple(int((p - sub) // 2) % n for p, n in zip(pos, grid.sizes))
