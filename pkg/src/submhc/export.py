"""Parity-check matrix export in alist (MacKay) and CSV layouts."""

from __future__ import annotations

from pathlib import Path

from . import gf2
from .codes import CodeSpec

FORMATS = ("alist", "csv")


def alist_text(rows: list[int], n: int) -> str:
    cols = [[i + 1 for i, row in enumerate(rows) if (row >> j) & 1] for j in range(n)]
    row_lists = [[q + 1 for q in gf2.support(row)] for row in rows]
    col_max = max((len(c) for c in cols), default=0)
    row_max = max((len(r) for r in row_lists), default=0)

    def padded(entries: list[int], width: int) -> str:
        return " ".join(str(v) for v in entries + [0] * (width - len(entries)))

    lines = [
        f"{n} {len(rows)}",
        f"{col_max} {row_max}",
        " ".join(str(len(c)) for c in cols),
        " ".join(str(len(r)) for r in row_lists),
    ]
    lines += [padded(c, col_max) for c in cols]
    lines += [padded(r, row_max) for r in row_lists]
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> tuple[list[int], int]:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        row_deg = [int(v) for v in lines[3]]
        rows = []
        for i in range(m):
            entries = [int(v) for v in lines[4 + n + i]]
            rows.append(gf2.from_bits(1 if j + 1 in entries[: row_deg[i]] else 0 for j in range(n)))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed alist: {exc}") from exc
    return rows, n


def csv_text(rows: list[int], n: int) -> str:
    return "".join(",".join(str(b) for b in gf2.to_bits(row, n)) + "\n" for row in rows)


def parse_csv(text: str) -> tuple[list[int], int]:
    rows, n = [], None
    for ln in text.strip().splitlines():
        bits = [int(v) for v in ln.split(",")]
        if n is not None and len(bits) != n:
            raise ValueError("ragged CSV matrix")
        n = len(bits)
        rows.append(gf2.from_bits(bits))
    return rows, n or 0


def export_parity_check(code: CodeSpec, fmt: str, path) -> Path:
    """Write the Z-stabilizer matrix (rows = stabilizers, columns = qubits)."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    rows = list(code.z_stabilizers)
    text = alist_text(rows, code.n) if fmt == "alist" else csv_text(rows, code.n)
    path = Path(path)
    path.write_text(text)
    return path


def load_parity_check(path, fmt: str | None = None) -> tuple[list[int], int]:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "alist")
    text = path.read_text()
    return parse_csv(text) if fmt == "csv" else parse_alist(text)
