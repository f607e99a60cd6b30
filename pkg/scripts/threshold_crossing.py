"""Locate where the level-r and level-(r+1) curves cross for one family and decoder.

    python scripts/threshold_crossing.py --family subsystem --decoder blockmap
    python scripts/threshold_crossing.py --family original --decoder md --p-min 0.04 --p-max 0.1
"""

import argparse
from dataclasses import dataclass

import numpy as np

from submhc.harness import SweepConfig, crossing_point, run_sweep


@dataclass
class CrossingConfig:
    family: str = "subsystem"
    decoder: str = "blockmap"
    low_level: int = 2
    p_min: float = 0.01
    p_max: float = 0.04
    num_p: int = 7
    shots: int = 50_000
    seed: int = 0


def find_crossing(cfg: CrossingConfig):
    grid = [float(p) for p in np.linspace(cfg.p_min, cfg.p_max, cfg.num_p)]
    curves = []
    for r in (cfg.low_level, cfg.low_level + 1):
        sc = SweepConfig(family=cfg.family, level=r, decoder=cfg.decoder, p_grid=grid, shots=cfg.shots, seed=cfg.seed + r)
        curves.append(run_sweep(sc))
    rates = [[pt.logical_error_rate for pt in c] for c in curves]
    return grid, rates, crossing_point(grid, *rates)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, value in vars(CrossingConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(value), default=value)
    cfg = CrossingConfig(**vars(ap.parse_args()))
    grid, (low, high), p_star = find_crossing(cfg)
    for p, a, b in zip(grid, low, high):
        print(f"p={p:.4f}  r={cfg.low_level}: {a:.4g}  r={cfg.low_level + 1}: {b:.4g}")
    print("crossing:", "not found in range" if p_star is None else f"{p_star:.4f}")


if __name__ == "__main__":
    main()
