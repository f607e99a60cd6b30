"""Logical error rate vs p for several levels and decoders, with the BD reference.

Writes one CSV per (family, level, decoder) into --out-dir. Use --relative to
print rate / BD alongside each point.

    python scripts/sweep_levels.py --levels 1 2 3 --shots 200000
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from submhc.harness import SweepConfig, log_grid, run_sweep, write_curve


@dataclass
class LevelSweep:
    family: str = "subsystem"
    decoder: str = "blockmap"
    levels: list[int] = field(default_factory=lambda: [1, 2, 3])
    p_start: float = 3e-3
    p_stop: float = 0.1
    num_p: int = 9
    shots: int = 200_000
    seed: int = 0
    out_dir: Path = Path("results/sweep")
    relative: bool = False


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = LevelSweep()
    ap.add_argument("--family", default=d.family, choices=("subsystem", "original"))
    ap.add_argument("--decoder", default=d.decoder)
    ap.add_argument("--levels", type=int, nargs="+", default=d.levels)
    ap.add_argument("--shots", type=int, default=d.shots)
    ap.add_argument("--num-p", type=int, default=d.num_p)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--out-dir", type=Path, default=d.out_dir)
    ap.add_argument("--relative", action="store_true")
    a = ap.parse_args()
    cfg = LevelSweep(a.family, a.decoder, a.levels, d.p_start, d.p_stop, a.num_p, a.shots, a.seed, a.out_dir, a.relative)

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    grid = log_grid(cfg.p_start, cfg.p_stop, cfg.num_p)
    for r in cfg.levels:
        for decoder in (cfg.decoder, "bd"):
            sc = SweepConfig(family=cfg.family, level=r, decoder=decoder, p_grid=grid, shots=cfg.shots, seed=cfg.seed)
            points = run_sweep(sc)
            write_curve(points, sc, cfg.out_dir / f"{cfg.family}_r{r}_{decoder}.csv")
            for pt in points:
                rel = f"  rel={pt.relative_rate:.3f}" if cfg.relative else ""
                print(f"{cfg.family} r={r} {decoder:8s} p={pt.p:.4g} rate={pt.logical_error_rate:.4g}{rel}")


if __name__ == "__main__":
    main()
