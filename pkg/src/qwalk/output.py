"""CSV tables and the binary state dump."""
import struct

import numpy as np

MAGIC = b"QWLK"
DUMP_VERSION = 1


def fmt(x):
    """Full-precision decimal text for a float."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in row) + "\n")


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def write_marginal(path, table, periods_kept):
    """Long-format grid ``x_1,...,x_k,p`` of a marginal distribution."""
    table = np.atleast_1d(np.asarray(table))
    k = table.ndim
    header = [f"x_{i + 1}" for i in range(k)] + ["p"]
    rows = []
    for idx in np.ndindex(*table.shape):
        rows.append(tuple(int(i) for i in idx) + (table[idx],))
    write_csv(path, header, rows)


def write_dump(path, amplitudes):
    """Magic, version byte, rank byte, uint32 dims, then little-endian float64 (re, im) pairs.

    Values follow C order of the amplitude array: sublattice (BCC only), lattice
    axes, coin component fastest.
    """
    arr = np.ascontiguousarray(amplitudes, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<BB", DUMP_VERSION, arr.ndim))
        fh.write(struct.pack("<" + "I" * arr.ndim, *arr.shape))
        fh.write(arr.astype("<c16").tobytes())


def read_dump(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a state dump")
        version, ndim = struct.unpack("<BB", fh.read(2))
        if version != DUMP_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        shape = struct.unpack("<" + "I" * ndim, fh.read(4 * ndim))
        data = np.frombuffer(fh.read(), dtype="<c16")
    return data.reshape(shape).astype(np.complex128)
