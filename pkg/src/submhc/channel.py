"""I.i.d. bit-flip channel, syndrome extraction and logical labels.

Shots are grouped into fixed chunks of ``CHUNK`` consecutive shot indices; chunk
``c`` draws from its own generator seeded with ``(seed, c)``. Any split of a run
into contiguous shot ranges therefore reproduces the same errors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import gf2
from .codes import CodeSpec

CHUNK = 1 << 14


@dataclass(frozen=True)
class NoiseParams:
    p: float
    seed: int = 0
    shots: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"bit-flip probability must lie in [0, 0.5], got {self.p}")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")


@dataclass
class LabeledBatch:
    """Packed errors with their syndromes and ground-truth labels; row ``i`` is one shot."""

    errors: np.ndarray
    syndromes: np.ndarray
    labels: np.ndarray


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), chunk]))


def iter_error_chunks(p: float, n: int, seed: int, start: int, stop: int) -> Iterator[np.ndarray]:
    """Boolean ``(shots, n)`` error arrays covering shot indices ``[start, stop)``."""
    shot = start
    while shot < stop:
        c = shot // CHUNK
        lo = shot - c * CHUNK
        hi = min(stop - c * CHUNK, CHUNK)
        if p == 0.0:
            yield np.zeros((hi - lo, n), dtype=bool)
        else:
            draws = chunk_rng(seed, c).random((hi, n))
            yield draws[lo:hi] < p
        shot = c * CHUNK + hi


def sample_errors(params: NoiseParams, n: int, start: int = 0) -> np.ndarray:
    """All errors of a run as one boolean array ``(shots, n)``."""
    parts = list(iter_error_chunks(params.p, n, params.seed, start, start + params.shots))
    if not parts:
        return np.zeros((0, n), dtype=bool)
    return np.concatenate(parts)


class SyndromeExtractor:
    """Precomputed packed rows for batch syndrome/label extraction on one code."""

    def __init__(self, code: CodeSpec):
        self.code = code
        n = code.n
        self.z_stab_words = gf2.rows_to_words(list(code.z_stabilizers), n)
        self.z_log_words = gf2.rows_to_words(list(code.z_logicals), n)
        # label correction from the pure-error frame: sum_i s_i <T_i, Z_L>
        self.frame = np.array(
            [[gf2.overlap_parity(t, z) for z in code.z_logicals] for t in code.pure_errors], dtype=np.uint8
        ).reshape(len(code.pure_errors), code.k)

    def syndromes(self, words: np.ndarray) -> np.ndarray:
        return gf2.batch_parity(words, self.z_stab_words)

    def labels(self, words: np.ndarray, syndromes: np.ndarray | None = None) -> np.ndarray:
        raw = gf2.batch_parity(words, self.z_log_words)
        if self.frame.any():
            if syndromes is None:
                syndromes = self.syndromes(words)
            raw ^= (syndromes.astype(np.int64) @ self.frame.astype(np.int64) & 1).astype(np.uint8)
        return raw

    def label_batch(self, errors: np.ndarray) -> LabeledBatch:
        words = gf2.pack_bool(errors)
        syn = self.syndromes(words)
        return LabeledBatch(words, syn, self.labels(words, syn))


def extract_syndrome(code: CodeSpec, error: int) -> int:
    """Syndrome bitset: bit ``i`` is the parity of ``error`` against Z stabilizer ``i``."""
    return gf2.mat_vec(list(code.z_stabilizers), error)


def pure_error(code: CodeSpec, syndrome: int) -> int:
    t = 0
    for i in gf2.support(syndrome):
        t ^= code.pure_errors[i]
    return t


def logical_label(code: CodeSpec, error: int) -> int:
    """X-logical coset index of ``error`` times its pure error, as a bitset over logical qubits."""
    t = pure_error(code, extract_syndrome(code, error))
    return gf2.mat_vec(list(code.z_logicals), error ^ t)


def sample_labeled(code: CodeSpec, params: NoiseParams, start: int = 0) -> LabeledBatch:
    errors = sample_errors(params, code.n, start)
    return SyndromeExtractor(code).label_batch(errors)
