"""Bitstring conventions.

Character ``i`` of a bitstring is the occupation ``n_i`` of site ``i``; in the
state vector, basis index ``k`` has ``n_i = (k >> i) & 1``.
"""
from __future__ import annotations

import numpy as np


def as_bits(b, m: int | None = None) -> np.ndarray:
    """Coerce a string like ``"1010"`` or a 0/1 sequence into an int8 array."""
    if isinstance(b, str):
        if not set(b) <= {"0", "1"}:
            raise ValueError(f"bitstring {b!r} contains characters other than 0/1")
        arr = np.frombuffer(b.encode(), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(b).reshape(-1)
        if arr.size and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("bits must be 0 or 1")
    arr = arr.astype(np.int8)
    if m is not None and arr.size != m:
        raise ValueError(f"bitstring has length {arr.size}, expected {m}")
    return arr


def to_str(bits) -> str:
    return "".join("1" if x else "0" for x in np.asarray(bits).reshape(-1))


def to_index(bits) -> int:
    bits = as_bits(bits)
    return int(sum(int(x) << i for i, x in enumerate(bits)))


def from_index(index: int, m: int) -> str:
    return "".join("1" if (index >> i) & 1 else "0" for i in range(m))


def occupation_table(m: int) -> np.ndarray:
    """``(2**m, m)`` int8 table; row ``k`` holds the occupations of basis state ``k``."""
    k = np.arange(2**m, dtype=np.int64)
    return ((k[:, None] >> np.arange(m)) & 1).astype(np.int8)


def rows_to_str(rows: np.ndarray) -> list[str]:
    rows = np.asarray(rows, dtype=np.uint8)
    chars = (rows + ord("0")).astype(np.uint8)
    return [r.tobytes().decode() for r in chars]
