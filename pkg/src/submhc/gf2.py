"""GF(2) linear algebra on int bitsets, plus packed-word helpers for batches.

A single bit vector is a Python ``int`` whose bit ``i`` is coordinate ``i``.
Batches of vectors (Monte Carlo shots) are ``uint64`` word arrays of shape
``(shots, words)`` so parities reduce to a popcount.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

WORD = 64


def from_bits(bits: Iterable[int]) -> int:
    """Pack a 0/1 sequence (index 0 first) into an int bitset."""
    v = 0
    for i, b in enumerate(bits):
        if b:
            v |= 1 << i
    return v


def to_bits(v: int, n: int) -> list[int]:
    if v >> n:
        raise ValueError(f"vector has bits beyond length {n}")
    return [(v >> i) & 1 for i in range(n)]


def support(v: int) -> list[int]:
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def weight(v: int) -> int:
    return v.bit_count()


def _as_int(v, n: int | None) -> tuple[int, int | None]:
    if isinstance(v, (int, np.integer)):
        return int(v), n
    bits = list(v)
    if n is not None and len(bits) != n:
        raise ValueError(f"length mismatch: {len(bits)} != {n}")
    return from_bits(bits), len(bits)


def overlap_parity(a, b) -> int:
    """Parity of ``|supp(a) & supp(b)|``; 1 means an X- and a Z-type Pauli anticommute.

    Accepts int bitsets or equal-length 0/1 sequences.
    """
    a_int, n = _as_int(a, None)
    b_int, _ = _as_int(b, n)
    return (a_int & b_int).bit_count() & 1


def _eliminate(rows: Sequence[int]) -> dict[int, tuple[int, int]]:
    """Forward elimination keyed by pivot bit (lowest set bit).

    Returns ``{pivot_bit: (reduced_row, combination_mask)}`` where
    ``combination_mask`` records which input rows XOR to ``reduced_row``.
    Rows are scanned in order, so the result is deterministic.
    """
    basis: dict[int, tuple[int, int]] = {}
    for idx, row in enumerate(rows):
        v, combo = row, 1 << idx
        while v:
            low = v & -v
            if low not in basis:
                basis[low] = (v, combo)
                break
            bv, bc = basis[low]
            v ^= bv
            combo ^= bc
    return basis


def rank(rows: Sequence[int]) -> int:
    return len(_eliminate(rows))


def row_reduce(rows: Sequence[int]) -> list[int]:
    """Reduced row echelon form, rows sorted by pivot (lowest set bit) position."""
    basis = {p: v for p, (v, _) in _eliminate(rows).items()}
    pivots = sorted(basis)
    for p in pivots:
        for q in pivots:
            if q != p and basis[q] & p:
                basis[q] ^= basis[p]
    return [basis[p] for p in pivots]


def in_span(v: int, rows: Sequence[int]) -> bool:
    return express(v, rows) is not None


def express(v: int, rows: Sequence[int]) -> int | None:
    """Return a mask ``c`` with ``XOR_{i in c} rows[i] == v``, or None if ``v`` is not in the span."""
    basis = _eliminate(rows)
    combo = 0
    while v:
        low = v & -v
        if low not in basis:
            return None
        bv, bc = basis[low]
        v ^= bv
        combo ^= bc
    return combo


def independent_subset(rows: Sequence[int], start: Sequence[int] = ()) -> list[int]:
    """Indices of ``rows`` kept by greedy in-order selection, independent modulo ``span(start)``."""
    basis = _eliminate(list(start))
    kept = []
    for idx, row in enumerate(rows):
        v = row
        while v:
            low = v & -v
            if low not in basis:
                basis[low] = (v, 0)
                kept.append(idx)
                break
            v ^= basis[low][0]
    return kept


def mat_vec(rows: Sequence[int], x: int) -> int:
    """``M x`` over GF(2); bit ``i`` of the result is ``rows[i] . x``."""
    out = 0
    for i, row in enumerate(rows):
        if (row & x).bit_count() & 1:
            out |= 1 << i
    return out


def solve_affine(rows: Sequence[int], target: int, ncols: int) -> int | None:
    """Any ``x`` (``ncols`` bits) with ``rows[i] . x == target_i`` for all ``i``, else None."""
    aug = [row | (((target >> i) & 1) << ncols) for i, row in enumerate(rows)]
    mask = (1 << ncols) - 1
    basis: dict[int, int] = {}
    for v in aug:
        while v & mask:
            low = v & -v
            if low not in basis:
                basis[low] = v
                break
            v ^= basis[low]
        else:
            if v:
                return None
    x = 0
    # back-substitute: process pivots from highest to lowest so each pivot
    # variable is set after the free/higher variables it depends on
    for low in sorted(basis, reverse=True):
        v = basis[low]
        rhs = (v >> ncols) & 1
        rest = (v & mask) ^ low
        if ((rest & x).bit_count() & 1) ^ rhs:
            x |= low
    return x


def nullspace(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of ``{x : rows[i] . x == 0 for all i}``."""
    rref = row_reduce(rows)
    pivots = [r & -r for r in rref]
    pivot_set = 0
    for p in pivots:
        pivot_set |= p
    out = []
    for f in range(ncols):
        fb = 1 << f
        if pivot_set & fb:
            continue
        x = fb
        for r, p in zip(rref, pivots):
            if r & fb:
                x |= p
        out.append(x)
    return out


def right_inverse(rows: Sequence[int], ncols: int) -> list[int]:
    """Columns ``r_t`` with ``M r_t == e_t``; requires full row rank."""
    out = []
    for t in range(len(rows)):
        x = solve_affine(rows, 1 << t, ncols)
        if x is None:
            raise ValueError("matrix does not have full row rank")
        out.append(x)
    return out


def span_elements(generators: Sequence[int]) -> np.ndarray:
    """All ``2^len(generators)`` XOR combinations, indexed by coefficient mask (needs < 63 bits)."""
    out = np.zeros(1 << len(generators), dtype=np.int64)
    for i, g in enumerate(generators):
        half = 1 << i
        out[half : 2 * half] = out[:half] ^ np.int64(g)
    return out


# -- packed batches -------------------------------------------------------------


def n_words(n: int) -> int:
    return (n + WORD - 1) // WORD


def rows_to_words(rows: Sequence[int], n: int) -> np.ndarray:
    """Int bitsets -> ``(len(rows), words)`` uint64 array."""
    w = n_words(n)
    out = np.zeros((len(rows), w), dtype=np.uint64)
    mask = (1 << WORD) - 1
    for i, row in enumerate(rows):
        for j in range(w):
            out[i, j] = (row >> (WORD * j)) & mask
    return out


def pack_bool(bits: np.ndarray) -> np.ndarray:
    """Boolean ``(shots, n)`` -> little-endian uint64 words ``(shots, words)``."""
    shots, n = bits.shape
    w = n_words(n)
    packed = np.packbits(bits, axis=1, bitorder="little")
    if packed.shape[1] != 8 * w:
        packed = np.pad(packed, ((0, 0), (0, 8 * w - packed.shape[1])))
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False).reshape(shots, w)


def words_to_ints(words: np.ndarray) -> list[int]:
    out = []
    for row in words:
        v = 0
        for j, x in enumerate(row):
            v |= int(x) << (WORD * j)
        out.append(v)
    return out


def batch_parity(words: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Parity of each shot against each row: ``(shots, words) x (m, words) -> (shots, m)`` uint8."""
    if rows.shape[0] == 0:
        return np.zeros((words.shape[0], 0), dtype=np.uint8)
    counts = np.zeros((words.shape[0], rows.shape[0]), dtype=np.uint8)
    for j in range(words.shape[1]):
        counts += np.bitwise_count(words[:, j, None] & rows[None, :, j])
    return counts & 1


def bits_to_keys(bits: np.ndarray) -> np.ndarray:
    """0/1 array ``(shots, m)`` with ``m < 63`` -> int64 keys with bit ``i`` = column ``i``."""
    m = bits.shape[1]
    if m >= 63:
        raise ValueError("too many bits for an int64 key")
    weights = (np.int64(1) << np.arange(m, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def keys_to_bits(keys: np.ndarray, m: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    return ((keys[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(np.uint8)
