"""Construction of the subsystem and original [[4,2,2]]-concatenated codes.

Qubits sit on a hyperlattice with coordinates ``(x_1, ..., x_r)``, each in
``1..4``; the linear index is ``sum((x_i - 1) * 4**(i - 1))`` so ``x_1`` runs
fastest and the four level-(r-1) blocks (``x_r = 1..4``) are contiguous.

Operators are X/Z-decoupled, so each is stored as an int bitset support.
Logical operators are indexed by ``(j_1, ..., j_r)`` with ``j_i`` in ``{1, 2}``
mapped to the integer ``sum((j_i - 1) * 2**(i - 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

from . import gf2

Family = Literal["subsystem", "original"]
MAX_LEVEL = 5


class CodeConstructionError(RuntimeError):
    """An internal consistency check failed while building a code."""


@dataclass(frozen=True)
class CodeSpec:
    level: int
    family: Family
    x_checks: tuple[int, ...]
    z_checks: tuple[int, ...]
    check_axes: tuple[int, ...]
    z_stabilizers: tuple[int, ...]
    x_stabilizers: tuple[int, ...]
    stabilizer_axes: tuple[int, ...]
    x_logicals: tuple[int, ...]
    z_logicals: tuple[int, ...]
    x_gauge: tuple[int, ...] = ()
    z_gauge: tuple[int, ...] = ()
    pure_errors: tuple[int, ...] = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return 4**self.level

    @property
    def k(self) -> int:
        return len(self.x_logicals)

    @property
    def num_gauge(self) -> int:
        return len(self.x_gauge)

    @property
    def num_syndrome_bits(self) -> int:
        return len(self.z_stabilizers)


def coord_to_index(coords: tuple[int, ...]) -> int:
    if any(not 1 <= c <= 4 for c in coords):
        raise ValueError(f"coordinates must lie in 1..4: {coords}")
    return sum((c - 1) * 4**i for i, c in enumerate(coords))


def index_to_coord(idx: int, level: int) -> tuple[int, ...]:
    if not 0 <= idx < 4**level:
        raise ValueError(f"index {idx} out of range for level {level}")
    return tuple((idx // 4**i) % 4 + 1 for i in range(level))


def _check_level(r: int) -> None:
    if not isinstance(r, int) or not 1 <= r <= MAX_LEVEL:
        raise ValueError(f"level must be an integer in 1..{MAX_LEVEL}, got {r!r}")


def enumerate_checks(r: int) -> tuple[list[int], list[int], list[int]]:
    """Weight-four lines of the level-``r`` hyperlattice.

    Returns ``(x_checks, z_checks, axes)``; X and Z checks share supports.
    Lines are ordered by axis, then by the linear index of their ``x_axis = 1`` end.
    """
    _check_level(r)
    lines, axes = [], []
    for axis in range(r):
        stride = 4**axis
        for start in range(4**r):
            if (start // stride) % 4:
                continue
            lines.append(sum(1 << (start + t * stride) for t in range(4)))
            axes.append(axis)
    return list(lines), list(lines), axes


def _embed(v: int, block: int, child_n: int) -> int:
    """Place a child-level support into block ``block`` (1..4) along the top axis."""
    return v << ((block - 1) * child_n)


def _level1_operators() -> dict:
    full = 0b1111
    return {
        "z_stab": [full],
        "x_stab": [full],
        "axes": [0],
        # X_L1 = X2X3, X_L2 = X1X2 ; Z_L1 = Z1Z2, Z_L2 = Z2Z3
        "x_log": [0b0110, 0b0011],
        "z_log": [0b0011, 0b0110],
    }


def _lift_logicals(child: dict, child_n: int) -> tuple[list[int], list[int]]:
    kc = len(child["x_log"])
    x_log, z_log = [], []
    for jr in (1, 2):
        for j in range(kc):
            x_log.append(_embed(child["x_log"][j], 3 - jr, child_n) | _embed(child["x_log"][j], 4 - jr, child_n))
            z_log.append(_embed(child["z_log"][j], jr, child_n) | _embed(child["z_log"][j], jr + 1, child_n))
    return x_log, z_log


def _type_b_stabilizers(child: dict, child_n: int) -> tuple[list[int], list[int]]:
    """Products of child logicals over all four blocks; X uses the complementary index 3 - j."""
    kc = len(child["x_log"])
    flip = kc - 1
    z, x = [], []
    for j in range(kc):
        z.append(sum(_embed(child["z_log"][j], b, child_n) for b in range(1, 5)))
        x.append(sum(_embed(child["x_log"][j ^ flip], b, child_n) for b in range(1, 5)))
    return z, x


def _subsystem_operators(r: int) -> dict:
    if r == 1:
        return _level1_operators()
    child = _subsystem_operators(r - 1)
    cn = 4 ** (r - 1)
    z_stab, x_stab, axes = [], [], []
    for sz, sx, ax in zip(child["z_stab"], child["x_stab"], child["axes"]):
        for jr in (1, 2, 3):
            z_stab.append(_embed(sz, jr, cn) | _embed(sz, jr + 1, cn))
            x_stab.append(_embed(sx, jr, cn) | _embed(sx, jr + 1, cn))
            axes.append(ax)
    bz, bx = _type_b_stabilizers(child, cn)
    z_stab += bz
    x_stab += bx
    axes += [r - 1] * len(bz)
    x_log, z_log = _lift_logicals(child, cn)
    return {"z_stab": z_stab, "x_stab": x_stab, "axes": axes, "x_log": x_log, "z_log": z_log}


def _original_operators(r: int) -> dict:
    if r == 1:
        return _level1_operators()
    child = _original_operators(r - 1)
    cn = 4 ** (r - 1)
    z_stab, x_stab, axes = [], [], []
    for b in range(1, 5):
        for sz, sx, ax in zip(child["z_stab"], child["x_stab"], child["axes"]):
            z_stab.append(_embed(sz, b, cn))
            x_stab.append(_embed(sx, b, cn))
            axes.append(ax)
    bz, bx = _type_b_stabilizers(child, cn)
    z_stab += bz
    x_stab += bx
    axes += [r - 1] * len(bz)
    x_log, z_log = _lift_logicals(child, cn)
    return {"z_stab": z_stab, "x_stab": x_stab, "axes": axes, "x_log": x_log, "z_log": z_log}


def _independent(ops: dict) -> dict:
    """Drop dependent generators, keeping the original (unreduced) supports in order."""
    keep_z = set(gf2.independent_subset(ops["z_stab"]))
    keep_x = set(gf2.independent_subset(ops["x_stab"]))
    if keep_z != keep_x:
        raise CodeConstructionError("X and Z stabilizer candidates reduce differently")
    keep = sorted(keep_z)
    out = dict(ops)
    for key in ("z_stab", "x_stab", "axes"):
        out[key] = [ops[key][i] for i in keep]
    return out


def _on_boundary(line: int, axis: int, r: int) -> bool:
    """True if the line lies in some hyperplane ``x_m = 4`` with ``m != axis``."""
    q = gf2.support(line)[0]
    coords = index_to_coord(q, r)
    return any(c == 4 for m, c in enumerate(coords) if m != axis)


def select_gauge_generators(
    r: int, checks: list[int], axes: list[int], z_stabilizers: list[int], logicals: list[int]
) -> tuple[list[int], list[int]]:
    """Pair up the check-group elements outside the stabilizer group into gauge qubits.

    X-gauge generators are boundary lines (lines inside a hyperplane ``x_m = 4``)
    that are independent modulo the stabilizer group. Z partners are solved for
    inside the span of boundary lines so that ``<x_i, z_j> = delta_ij``, then
    greedily shortened.
    """
    n_gauge = gf2.rank(checks) - len(z_stabilizers)
    if n_gauge == 0:
        return [], []
    boundary = [c for c, a in zip(checks, axes) if _on_boundary(c, a, r)]
    picked = [boundary[i] for i in gf2.independent_subset(boundary, start=z_stabilizers)]
    if len(picked) < n_gauge:
        raise CodeConstructionError(f"only {len(picked)} of {n_gauge} gauge generators found on the boundary")
    x_gauge = picked[:n_gauge]

    # z = sum_k c_k boundary[k]; constraint <x_i, z> = delta_ij is linear in c
    gram = [gf2.from_bits(gf2.overlap_parity(x, b) for b in boundary) for x in x_gauge]
    null = gf2.nullspace(gram, len(boundary))
    null_vecs = [_combine(boundary, c) for c in null]
    z_gauge = []
    for j in range(n_gauge):
        coeffs = gf2.solve_affine(gram, 1 << j, len(boundary))
        if coeffs is None:
            raise CodeConstructionError(f"no Z partner for gauge generator {j}")
        z_gauge.append(_shorten(_combine(boundary, coeffs), null_vecs))

    for i, x in enumerate(x_gauge):
        for j, z in enumerate(z_gauge):
            if gf2.overlap_parity(x, z) != (i == j):
                raise CodeConstructionError("gauge pairing is not symplectic")
    for g in x_gauge + z_gauge:
        if any(g & lg for lg in logicals):
            raise CodeConstructionError("gauge generator overlaps a logical support")
    return x_gauge, z_gauge


def _combine(rows: list[int], coeffs: int) -> int:
    v = 0
    for i in gf2.support(coeffs):
        v ^= rows[i]
    return v


def _shorten(v: int, moves: list[int]) -> int:
    """Greedy weight reduction of ``v`` by XOR with elements of ``moves``."""
    improved = True
    while improved:
        improved = False
        for m in moves:
            if gf2.weight(v ^ m) < gf2.weight(v):
                v ^= m
                improved = True
    return v


def compute_pure_errors(
    z_stabilizers: list[int],
    z_logicals: list[int],
    z_gauge: list[int],
    x_stabilizers: list[int],
    n: int,
) -> list[int]:
    """X-type ``T_i`` flipping stabilizer ``i`` only, commuting with every Z logical and Z gauge element.

    Each ``T_i`` is the deterministic solver output shortened greedily by X stabilizers,
    which span the remaining freedom.
    """
    constraints = list(z_stabilizers) + list(z_logicals) + list(z_gauge)
    free_dim = n - gf2.rank(constraints)
    if gf2.rank(x_stabilizers) != free_dim or any(gf2.mat_vec(constraints, s) for s in x_stabilizers):
        raise CodeConstructionError("X stabilizers do not span the pure-error freedom")
    out = []
    for i in range(len(z_stabilizers)):
        t = gf2.solve_affine(constraints, 1 << i, n)
        if t is None:
            raise CodeConstructionError(f"no pure error for stabilizer {i}")
        out.append(_shorten(t, list(x_stabilizers)))
    return out


def _finish(r: int, family: Family, ops: dict, checks, check_axes, x_gauge, z_gauge) -> CodeSpec:
    n = 4**r
    pure = compute_pure_errors(ops["z_stab"], ops["z_log"], z_gauge, ops["x_stab"], n)
    return CodeSpec(
        level=r,
        family=family,
        x_checks=tuple(checks),
        z_checks=tuple(checks),
        check_axes=tuple(check_axes),
        z_stabilizers=tuple(ops["z_stab"]),
        x_stabilizers=tuple(ops["x_stab"]),
        stabilizer_axes=tuple(ops["axes"]),
        x_logicals=tuple(ops["x_log"]),
        z_logicals=tuple(ops["z_log"]),
        x_gauge=tuple(x_gauge),
        z_gauge=tuple(z_gauge),
        pure_errors=tuple(pure),
    )


_CACHE: dict[tuple[str, int], CodeSpec] = {}


def build_subsystem_code(r: int) -> CodeSpec:
    _check_level(r)
    key = ("subsystem", r)
    if key not in _CACHE:
        ops = _independent(_subsystem_operators(r))
        checks, _, axes = enumerate_checks(r)
        x_gauge, z_gauge = select_gauge_generators(r, checks, axes, ops["z_stab"], ops["x_log"] + ops["z_log"])
        _CACHE[key] = _finish(r, "subsystem", ops, checks, axes, x_gauge, z_gauge)
    return _CACHE[key]


def build_original_code(r: int) -> CodeSpec:
    """The concatenated code without gauge qubits; its measured checks are its stabilizers."""
    _check_level(r)
    key = ("original", r)
    if key not in _CACHE:
        ops = _independent(_original_operators(r))
        _CACHE[key] = _finish(r, "original", ops, ops["z_stab"], ops["axes"], [], [])
    return _CACHE[key]


def build_code(r: int, family: Family = "subsystem") -> CodeSpec:
    if family == "subsystem":
        return build_subsystem_code(r)
    if family == "original":
        return build_original_code(r)
    raise ValueError(f"unknown code family {family!r}")


def compose_stabilizer_from_checks(code: CodeSpec, stabilizer_index: int) -> list[int]:
    """Indices of the ``2^(r-1)`` parallel Z checks whose product is the given Z stabilizer."""
    if code.family != "subsystem":
        raise ValueError("only subsystem codes measure stabilizers through checks")
    target = code.z_stabilizers[stabilizer_index]
    inside = [i for i, c in enumerate(code.z_checks) if c & target == c]
    acc = 0
    for i in inside:
        acc ^= code.z_checks[i]
    if acc == target and len(inside) == 2 ** (code.level - 1):
        return inside
    combo = gf2.express(target, list(code.z_checks))
    if combo is None or gf2.weight(combo) != 2 ** (code.level - 1):
        raise CodeConstructionError(f"stabilizer {stabilizer_index} has no {2 ** (code.level - 1)}-check decomposition")
    return gf2.support(combo)


def ancilla_report(code: CodeSpec) -> dict:
    per_direction = 2 * 4 ** (code.level - 1)
    return {
        "ancillas_per_direction": per_direction,
        "total_with_reuse": per_direction,
        "total_without_reuse": per_direction * code.level,
        "overhead_ratio": (code.n + per_direction) / code.n,
    }


def stabilizer_counts_by_axis(code: CodeSpec) -> list[int]:
    """Number of (X plus Z) stabilizer generators extending along each axis."""
    counts = [0] * code.level
    for a in code.stabilizer_axes:
        counts[a] += 2
    return counts


def expected_counts(r: int, family: Family = "subsystem") -> dict:
    """Closed-form structural counts for a level-``r`` code."""
    out = {"n": 4**r, "k": 2**r, "logical_weight": 2**r, "distance": 2**r}
    if family == "subsystem":
        out.update(
            gauge=4**r + 2**r - 2 * 3**r,
            stabilizers=2 * (3**r - 2**r),
            checks=2 * r * 4 ** (r - 1),
        )
    else:
        out.update(gauge=0, stabilizers=4**r - 2**r, checks=4**r - 2**r)
    return out


def dressed_distance(code: CodeSpec, bare: bool = False) -> int:
    """Exhaustive minimum weight of an X operator with zero syndrome and a nonzero logical label.

    With ``bare=True`` the operator must also commute with every Z gauge generator.
    Only feasible for ``n <= 16``.
    """
    if code.n > 16:
        raise ValueError("exhaustive distance search is limited to n <= 16")
    import numpy as np

    n = code.n
    errors = np.arange(1 << n, dtype=np.int64)
    bits = ((errors[:, None] >> np.arange(n)) & 1).astype(bool)
    words = gf2.pack_bool(bits)
    rows = list(code.z_stabilizers) + (list(code.z_gauge) if bare else [])
    syn = gf2.batch_parity(words, gf2.rows_to_words(rows, n))
    lab = gf2.batch_parity(words, gf2.rows_to_words(list(code.z_logicals), n))
    ok = (~syn.any(axis=1)) & lab.any(axis=1)
    weights = bits.sum(axis=1)
    return int(weights[ok].min())


def verify_code(code: CodeSpec) -> list[str]:
    """Check every structural invariant; returns the names of violated properties."""
    failures: list[str] = []
    r, n = code.level, code.n
    exp = expected_counts(r, code.family)

    def check(name: str, cond: bool) -> None:
        if not cond:
            failures.append(name)

    check("qubit count n == 4^r", n == exp["n"])
    check("logical count k == 2^r", code.k == exp["k"] and len(code.z_logicals) == exp["k"])
    check("logical weight == 2^r", all(gf2.weight(v) == 2**r for v in code.x_logicals + code.z_logicals))
    check(
        "stabilizer count",
        len(code.z_stabilizers) + len(code.x_stabilizers) == exp["stabilizers"]
        and len(code.z_stabilizers) == len(code.x_stabilizers),
    )
    check("stabilizers independent", gf2.rank(list(code.z_stabilizers)) == len(code.z_stabilizers)
          and gf2.rank(list(code.x_stabilizers)) == len(code.x_stabilizers))
    check("gauge qubit count", code.num_gauge == exp["gauge"] and len(code.z_gauge) == exp["gauge"])
    if code.family == "subsystem":
        check("check count == 2 r 4^(r-1)", len(code.x_checks) + len(code.z_checks) == exp["checks"])
        check("check weight == 4", all(gf2.weight(c) == 4 for c in code.x_checks + code.z_checks))
        check("stabilizer weight == 2^(r+1)", all(gf2.weight(s) == 2 ** (r + 1) for s in code.z_stabilizers + code.x_stabilizers))
        checks = list(code.z_checks)
        check("stabilizers lie in the check group", all(gf2.in_span(s, checks) for s in code.z_stabilizers + code.x_stabilizers))
        check("gauge generators lie in the check group", all(gf2.in_span(g, checks) for g in code.x_gauge + code.z_gauge))
        check(
            "stabilizers commute with all checks",
            all(gf2.overlap_parity(s, c) == 0 for s in code.z_stabilizers + code.x_stabilizers for c in checks),
        )
        center_dim = _center_dimension(checks, n)
        check("stabilizers span the center of the check group", center_dim == len(code.z_stabilizers))
        check("check group rank == stabilizers + gauge", gf2.rank(checks) == len(code.z_stabilizers) + code.num_gauge)
        try:
            ok = all(
                len(compose_stabilizer_from_checks(code, i)) == 2 ** (r - 1) for i in range(len(code.z_stabilizers))
            )
        except CodeConstructionError:
            ok = False
        check("stabilizer = product of 2^(r-1) checks", ok)
        check("gauge supports avoid logicals", all(not (g & lg) for g in code.x_gauge + code.z_gauge
                                                   for lg in code.x_logicals + code.z_logicals))
        check("gauge supports lie on the x_m = 4 hyperplanes", all(_in_boundary(g, r) for g in code.x_gauge + code.z_gauge))
    check(
        "Z stabilizers commute with X logicals, X stabilizers and X gauge",
        all(gf2.overlap_parity(s, x) == 0 for s in code.z_stabilizers for x in code.x_logicals + code.x_stabilizers + code.x_gauge),
    )
    check(
        "X stabilizers commute with Z logicals and Z gauge",
        all(gf2.overlap_parity(s, z) == 0 for s in code.x_stabilizers for z in code.z_logicals + code.z_gauge),
    )
    check(
        "logical pairing X_Lj . Z_Lk == delta_jk",
        all(gf2.overlap_parity(x, z) == (j == k) for j, x in enumerate(code.x_logicals) for k, z in enumerate(code.z_logicals)),
    )
    check(
        "gauge pairing",
        all(gf2.overlap_parity(x, z) == (i == j) for i, x in enumerate(code.x_gauge) for j, z in enumerate(code.z_gauge)),
    )
    check("gauge commutes with logicals", all(gf2.overlap_parity(g, l) == 0 for g in code.x_gauge for l in code.z_logicals)
          and all(gf2.overlap_parity(g, l) == 0 for g in code.z_gauge for l in code.x_logicals))
    check("one pure error per Z stabilizer", len(code.pure_errors) == len(code.z_stabilizers))
    check(
        "pure errors flip only their own stabilizer",
        all(gf2.overlap_parity(t, s) == (i == j) for i, t in enumerate(code.pure_errors) for j, s in enumerate(code.z_stabilizers)),
    )
    check(
        "pure errors commute with Z logicals and Z gauge",
        all(gf2.overlap_parity(t, z) == 0 for t in code.pure_errors for z in code.z_logicals + code.z_gauge),
    )
    return failures


def _center_dimension(checks: list[int], n: int) -> int:
    """Dimension of ``span(checks) ∩ span(checks)^⊥`` (checks self-paired as X and Z)."""
    basis = gf2.row_reduce(checks)
    # y^T B lies in the center iff B (B^T y) = 0, i.e. y in ker(B B^T)
    gram = [gf2.from_bits(gf2.overlap_parity(a, b) for b in basis) for a in basis]
    kernel = gf2.nullspace(gram, len(basis))
    return gf2.rank([_combine(basis, y) for y in kernel])


def _in_boundary(v: int, r: int) -> bool:
    """Every qubit of ``v`` lies on some hyperplane ``x_m = 4``."""
    return all(4 in index_to_coord(q, r) for q in gf2.support(v))


def logical_coords(code: CodeSpec) -> list[tuple[int, ...]]:
    """The ``(j_1, ..., j_r)`` index of each logical, matching ``x_logicals`` order."""
    return [tuple(((i >> m) & 1) + 1 for m in range(code.level)) for i in range(code.k)]
