"""Decoders for bit-flip noise: bounded-distance formula, exhaustive MAP,
recursive block MAP (subsystem family) and level-by-level minimum distance
(original family), plus the Monte Carlo evaluation loop.

All syndrome decoders return the logical label as an int bitset (bit ``j`` is
logical qubit ``j``) in the frame of the canonical pure errors. Since those
commute with every Z logical, the label of an error is just its vector of
Z-logical parities, which is what the recursions propagate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import gf2
from .channel import SyndromeExtractor, iter_error_chunks
from .codes import CodeSpec, build_code

TIE_RTOL = 1e-9
WILSON_Z = 1.959963984540054
MAX_COMBOS = 1 << 20


class CapacityError(ValueError):
    """The requested decoder is infeasible at this code size."""


@dataclass(frozen=True)
class DecodeResult:
    label: int
    k: int
    posterior: float | None = None
    tie_broken: bool = False

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.label >> j) & 1 for j in range(self.k))


def bd_logical_rate(r: int, p: float) -> float:
    """Failure probability of a decoder that corrects exactly the errors of weight < 2^(r-1).

    Evaluated as the upper binomial tail with log-space terms, which stays
    accurate where ``1 - sum(...)`` would cancel.
    """
    if r < 1:
        raise ValueError("level must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n, t = 4**r, 2 ** (r - 1)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    terms = [
        math.exp(math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lp + (n - j) * lq)
        for j in range(t, n + 1)
    ]
    return math.fsum(terms)


def wilson_interval(errors: int, shots: int, z: float = WILSON_Z) -> tuple[float, float]:
    if shots <= 0:
        return 0.0, 1.0
    phat = errors / shots
    denom = 1 + z * z / shots
    centre = (phat + z * z / (2 * shots)) / denom
    half = z * math.sqrt(phat * (1 - phat) / shots + z * z / (4 * shots * shots)) / denom
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == shots else min(1.0, centre + half)
    return lo, hi


def lex_rank(k: int) -> np.ndarray:
    """Rank of each label under lexicographic order of ``(l_0, l_1, ..., l_{k-1})``."""
    labels = np.arange(1 << k, dtype=np.int64)
    rank = np.zeros_like(labels)
    for j in range(k):
        rank |= ((labels >> j) & 1) << (k - 1 - j)
    return rank


def _pick(scores: np.ndarray, lex: np.ndarray, maximize: bool) -> tuple[int, bool]:
    if maximize:
        best = scores.max()
        ties = scores >= best * (1 - TIE_RTOL) if best > 0 else np.ones(scores.shape, bool)
    else:
        ties = scores == scores.min()
    cand = np.flatnonzero(ties)
    return int(cand[np.argmin(lex[cand])]), len(cand) > 1


def _as_syndrome_int(syndrome, m: int) -> int:
    if isinstance(syndrome, (int, np.integer)):
        s = int(syndrome)
    else:
        bits = list(syndrome)
        if len(bits) != m:
            raise ValueError(f"syndrome has {len(bits)} bits, expected {m}")
        s = gf2.from_bits(bits)
    if s >> m:
        raise ValueError(f"syndrome has bits beyond {m}")
    return s


# -- exhaustive enumeration -------------------------------------------------------


def _enumerate(code: CodeSpec, p: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Label key, syndrome key and weight for each of the ``2^n`` X patterns (``n <= 16``)."""
    n = code.n
    if n > 16:
        raise CapacityError(f"exhaustive enumeration needs n <= 16, got {n}")
    errors = np.arange(1 << n, dtype=np.int64)
    bits = ((errors[:, None] >> np.arange(n)) & 1).astype(bool)
    ext = SyndromeExtractor(code)
    batch = ext.label_batch(bits)
    syn = gf2.bits_to_keys(batch.syndromes)
    lab = gf2.bits_to_keys(batch.labels)
    return lab, syn, bits.sum(axis=1)


def enumerate_joint(code: CodeSpec, p: float) -> np.ndarray:
    """``P(label, syndrome)`` as a ``(2^k, 2^m)`` array by summing all ``2^n`` patterns."""
    lab, syn, w = _enumerate(code, p)
    n, m = code.n, code.num_syndrome_bits
    probs = np.power(p, w) * np.power(1 - p, n - w)
    flat = np.bincount(lab * (1 << m) + syn, weights=probs, minlength=(1 << code.k) << m)
    return flat.reshape(1 << code.k, 1 << m)


def enumerate_min_weight(code: CodeSpec) -> np.ndarray:
    """Minimum error weight per ``(label, syndrome)``; ``inf`` where unreachable."""
    lab, syn, w = _enumerate(code, 0.0)
    m = code.num_syndrome_bits
    flat = np.full((1 << code.k) << m, np.inf)
    np.minimum.at(flat, lab * (1 << m) + syn, w.astype(float))
    return flat.reshape(1 << code.k, 1 << m)


@dataclass
class MapTable:
    joint: np.ndarray
    labels: np.ndarray
    ties: np.ndarray

    def decode(self, syndrome: int) -> DecodeResult:
        col = self.joint[:, syndrome]
        total = col.sum()
        label = int(self.labels[syndrome])
        k = int(self.joint.shape[0]).bit_length() - 1
        return DecodeResult(label, k, float(col[label] / total) if total > 0 else None, bool(self.ties[syndrome]))


def exhaustive_map_table(code: CodeSpec, p: float) -> MapTable:
    """Brute-force MAP label for every syndrome, lexicographically smallest on ties."""
    joint = enumerate_joint(code, p)
    lex = lex_rank(code.k)
    picks = [_pick(joint[:, s], lex, maximize=True) for s in range(joint.shape[1])]
    return MapTable(joint, np.array([a for a, _ in picks]), np.array([b for _, b in picks]))


# -- recursion structure ------------------------------------------------------------


@dataclass
class LevelMap:
    """How a level-r code's Z stabilizers and logicals read off its four level-(r-1) blocks.

    ``syn_rows`` are the parent syndrome bits that are XORs of child syndrome bits
    (``syn_matrix`` rows over the ``4 * child_m`` concatenated child syndromes);
    ``lab_rows`` are the ones that are XORs of child labels. ``label_matrix`` has
    one row per parent logical followed by one per ``lab_rows`` bit, over the
    ``4 * child_k`` concatenated child labels.
    """

    child_m: int
    child_k: int
    k: int
    syn_rows: list[int]
    syn_matrix: list[int]
    lab_rows: list[int]
    label_matrix: list[int]

    @cached_property
    def syndrome_inverse(self) -> list[int]:
        return gf2.right_inverse(self.syn_matrix, 4 * self.child_m)

    @cached_property
    def syndrome_freedom(self) -> np.ndarray:
        """Child-syndrome patterns that leave every observed parent bit unchanged."""
        null = gf2.nullspace(self.syn_matrix, 4 * self.child_m)
        return gf2.span_elements(null)

    @cached_property
    def _label_parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ncols = 4 * self.child_k
        inv = gf2.right_inverse(self.label_matrix, ncols)
        kernel = gf2.nullspace(self.label_matrix, ncols)
        if (1 << self.k) * (1 << len(kernel)) > MAX_COMBOS:
            raise CapacityError("too many child-label combinations for this level")
        return (
            gf2.span_elements(inv[: self.k]),
            gf2.span_elements(inv[self.k :]),
            gf2.span_elements(kernel),
        )

    def child_syndromes(self, observed: int) -> np.ndarray:
        """All concatenated child-syndrome vectors consistent with the observed parent bits."""
        base = 0
        for t in gf2.support(observed):
            base ^= self.syndrome_inverse[t]
        return self.syndrome_freedom ^ np.int64(base)

    def child_label_indices(self, type_b: int) -> list[np.ndarray]:
        """Per block, the child label for every ``(parent label, free choice)`` pair.

        Each returned array has shape ``(2^k, 2^kernel)``.
        """
        by_label, by_b, free = self._label_parts
        mu = by_label[:, None] ^ by_b[type_b] ^ free[None, :]
        mask = (1 << self.child_k) - 1
        return [(mu >> (b * self.child_k)) & mask for b in range(4)]


def derive_level_map(parent: CodeSpec, child: CodeSpec) -> LevelMap:
    """Express each parent Z generator block by block in the child's Z basis.

    Each restriction to a block must be a combination of child Z stabilizers and
    child Z logicals only; a parent row must depend on child syndromes or on child
    labels, not both.
    """
    cn, cm, ck = child.n, child.num_syndrome_bits, child.k
    basis = list(child.z_stabilizers) + list(child.z_logicals) + list(child.z_gauge)
    mask = (1 << cn) - 1

    def decompose(row: int) -> tuple[int, int]:
        syn = lab = 0
        for b in range(4):
            combo = gf2.express((row >> (b * cn)) & mask, basis)
            if combo is None or combo >> (cm + ck):
                raise ValueError("parent operator is not built from child stabilizers and logicals")
            syn |= (combo & ((1 << cm) - 1)) << (b * cm)
            lab |= (combo >> cm) << (b * ck)
        return syn, lab

    syn_rows, syn_matrix, lab_rows, lab_syn = [], [], [], []
    for i, row in enumerate(parent.z_stabilizers):
        syn, lab = decompose(row)
        if syn and lab:
            raise ValueError(f"parent stabilizer {i} mixes child syndromes and labels")
        if lab:
            lab_rows.append(i)
            lab_syn.append(lab)
        else:
            syn_rows.append(i)
            syn_matrix.append(syn)
    logical_rows = []
    for row in parent.z_logicals:
        syn, lab = decompose(row)
        if syn:
            raise ValueError("parent logical depends on child syndromes")
        logical_rows.append(lab)
    return LevelMap(cm, ck, parent.k, syn_rows, syn_matrix, lab_rows, logical_rows + lab_syn)


def _gather_bits(s: int, rows: list[int]) -> int:
    out = 0
    for t, i in enumerate(rows):
        out |= ((s >> i) & 1) << t
    return out


# -- decoders ---------------------------------------------------------------------


class SyndromeDecoder:
    """Shared batch path: decode each distinct syndrome once and memoize the label."""

    code: CodeSpec

    def decode(self, syndrome) -> DecodeResult:
        raise NotImplementedError

    def decode_batch(self, syndromes: np.ndarray) -> np.ndarray:
        keys = gf2.bits_to_keys(syndromes)
        uniq, inv = np.unique(keys, return_inverse=True)
        cache = self.__dict__.setdefault("_label_cache", {})
        out = np.empty(len(uniq), dtype=np.int64)
        for i, key in enumerate(uniq.tolist()):
            label = cache.get(key)
            if label is None:
                label = cache[key] = self.decode(key).label
            out[i] = label
        return out[inv]


class ExhaustiveMapDecoder(SyndromeDecoder):
    def __init__(self, code: CodeSpec, p: float):
        self.code = code
        self.table = exhaustive_map_table(code, p)

    def decode(self, syndrome) -> DecodeResult:
        return self.table.decode(_as_syndrome_int(syndrome, self.code.num_syndrome_bits))


class BlockMapDecoder(SyndromeDecoder):
    """Recursive joint-probability decoder for the subsystem family (levels 1-3).

    Level-1 tables come from enumerating the 16 four-qubit patterns. A level-L
    table entry sums, over child syndromes consistent with the observed
    pairwise-XOR bits and over child labels consistent with the observed type-B
    bits, the product of the four child table entries.
    """

    max_level = 3

    def __init__(self, code: CodeSpec, p: float):
        if code.family != "subsystem":
            raise ValueError("block MAP decoding is implemented for the subsystem family")
        if code.level > self.max_level:
            raise CapacityError(f"block MAP is limited to level <= {self.max_level}")
        self.code, self.p = code, p
        self.codes = {L: build_code(L, "subsystem") for L in range(1, code.level + 1)}
        self.maps = {L: derive_level_map(self.codes[L], self.codes[L - 1]) for L in range(2, code.level + 1)}
        self.tables = {1: enumerate_joint(self.codes[1], p)}
        for L in range(2, code.level):
            self.tables[L] = self.full_table(L)
        self.lex = lex_rank(code.k)

    def full_table(self, L: int) -> np.ndarray:
        """Normalized ``P(label, syndrome)`` over every syndrome of level ``L``."""
        if L == 1:
            return self.tables[1]
        m = self.codes[L].num_syndrome_bits
        table = np.stack([self.joint(L, s) for s in range(1 << m)], axis=1)
        total = table.sum()
        if abs(total - 1.0) > 1e-9:
            raise ArithmeticError(f"level-{L} joint table sums to {total}")
        return table / total

    def joint(self, L: int, syndrome: int) -> np.ndarray:
        """Unnormalized ``P(label, syndrome)`` for one level-``L`` syndrome, as a vector over labels."""
        if L == 1:
            return self.tables[1][:, syndrome]
        lm = self.maps[L]
        child = self.tables[L - 1]
        sigmas = lm.child_syndromes(_gather_bits(syndrome, lm.syn_rows))
        idx = lm.child_label_indices(_gather_bits(syndrome, lm.lab_rows))
        cmask = (1 << lm.child_m) - 1
        prod = None
        for b in range(4):
            v = child[:, (sigmas >> (b * lm.child_m)) & cmask].T
            term = v[:, idx[b]]
            prod = term if prod is None else prod * term
        return prod.sum(axis=(0, 2))

    def decode(self, syndrome) -> DecodeResult:
        s = _as_syndrome_int(syndrome, self.code.num_syndrome_bits)
        scores = self.joint(self.code.level, s)
        label, tie = _pick(scores, self.lex, maximize=True)
        total = scores.sum()
        return DecodeResult(label, self.code.k, float(scores[label] / total) if total > 0 else None, tie)


class MinDistanceDecoder(SyndromeDecoder):
    """Level-by-level minimum-distance decoder for the original family.

    Each level-1 block reports, for every logical value, the minimum weight of a
    local error with that value and its observed syndrome. A level-L block
    combines its four children's distance vectors with the type-B constraints and
    reports the minimum total weight per level-L logical value. The top level
    picks the smallest distance, lexicographically smallest label on ties.
    """

    max_level = 3

    def __init__(self, code: CodeSpec):
        if code.family != "original":
            raise ValueError("the level-by-level MD decoder targets the original family")
        if code.level > self.max_level:
            raise CapacityError(f"MD decoding is limited to level <= {self.max_level}")
        self.code = code
        self.codes = {L: build_code(L, "original") for L in range(1, code.level + 1)}
        self.maps = {L: derive_level_map(self.codes[L], self.codes[L - 1]) for L in range(2, code.level + 1)}
        self.base = enumerate_min_weight(self.codes[1])
        self.lex = lex_rank(code.k)

    def distances(self, L: int, syndrome: int) -> np.ndarray:
        if L == 1:
            return self.base[:, syndrome]
        lm = self.maps[L]
        sigma = int(lm.child_syndromes(_gather_bits(syndrome, lm.syn_rows))[0])
        idx = lm.child_label_indices(_gather_bits(syndrome, lm.lab_rows))
        cmask = (1 << lm.child_m) - 1
        total = None
        for b in range(4):
            d = self.distances(L - 1, (sigma >> (b * lm.child_m)) & cmask)[idx[b]]
            total = d if total is None else total + d
        return total.min(axis=1)

    def decode(self, syndrome) -> DecodeResult:
        s = _as_syndrome_int(syndrome, self.code.num_syndrome_bits)
        label, tie = _pick(self.distances(self.code.level, s), self.lex, maximize=False)
        return DecodeResult(label, self.code.k, None, tie)


def make_decoder(name: str, code: CodeSpec, p: float):
    """Decoder by id: ``oracle``, ``blockmap``, ``md`` or ``nn:<model path>``."""
    if name == "oracle":
        return ExhaustiveMapDecoder(code, p)
    if name == "blockmap":
        return BlockMapDecoder(code, p)
    if name == "md":
        return MinDistanceDecoder(code)
    if name.startswith("nn:"):
        from .nn import NeuralDecoder, load_model

        return NeuralDecoder(load_model(name[3:], code=code))
    raise ValueError(f"unknown decoder {name!r}")


# -- Monte Carlo ----------------------------------------------------------------------


@dataclass(frozen=True)
class EvalResult:
    errors: int
    shots: int

    @property
    def rate(self) -> float:
        return self.errors / self.shots if self.shots else 0.0

    @property
    def wilson_ci(self) -> tuple[float, float]:
        return wilson_interval(self.errors, self.shots)


def count_errors(decoder, code: CodeSpec, p: float, seed: int, start: int, stop: int) -> int:
    """Logical errors (any differing label bit) over shot indices ``[start, stop)``."""
    ext = SyndromeExtractor(code)
    errors = 0
    for chunk in iter_error_chunks(p, code.n, seed, start, stop):
        batch = ext.label_batch(chunk)
        truth = gf2.bits_to_keys(batch.labels)
        errors += int(np.count_nonzero(decoder.decode_batch(batch.syndromes) != truth))
    return errors


def evaluate_decoder(decoder, code: CodeSpec, p: float, shots: int, seed: int) -> EvalResult:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return EvalResult(count_errors(decoder, code, p, seed, 0, shots), shots)
