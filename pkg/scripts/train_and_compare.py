"""Train a neural decoder at one level and compare it with block MAP and BD at a few p.

    python scripts/train_and_compare.py --level 2 --samples 1048576 --shots 1000000
"""

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from submhc import codes, nn
from submhc.harness import SweepConfig, run_sweep


@dataclass
class Experiment:
    level: int = 2
    samples: int = 1 << 20
    epochs: int = 6
    seed: int = 0
    eval_seed: int = 1000
    shots: int = 1_000_000
    p_eval: list[float] = field(default_factory=lambda: [0.02, 0.04])
    out_dir: Path = Path("results/nn")


def main() -> None:
    d = Experiment()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=d.level)
    ap.add_argument("--samples", type=int, default=d.samples)
    ap.add_argument("--epochs", type=int, default=d.epochs)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--shots", type=int, default=d.shots)
    ap.add_argument("--p-eval", type=float, nargs="+", default=d.p_eval)
    ap.add_argument("--out-dir", type=Path, default=d.out_dir)
    a = ap.parse_args()
    exp = Experiment(a.level, a.samples, a.epochs, a.seed, d.eval_seed, a.shots, a.p_eval, a.out_dir)
    exp.out_dir.mkdir(parents=True, exist_ok=True)

    code = codes.build_code(exp.level)
    tcfg = nn.TrainConfig(num_samples=exp.samples, epochs=exp.epochs, seed=exp.seed)
    x, y = nn.generate_dataset(code, tcfg.p_train, tcfg.num_samples, tcfg.seed)
    result = nn.train(nn.init_mlp(exp.level, seed=exp.seed), tcfg, x, y)
    model = exp.out_dir / f"r{exp.level}.bin"
    nn.save_model(result.spec, model)
    print("loss by epoch:", " ".join(f"{v:.4f}" for v in result.loss_history))

    rows = []
    decoders = [f"nn:{model}", "bd"] + (["blockmap"] if exp.level <= 3 else [])
    for dec in decoders:
        sc = SweepConfig(level=exp.level, decoder=dec, p_grid=exp.p_eval, shots=exp.shots, seed=exp.eval_seed)
        for pt in run_sweep(sc):
            rows.append({"decoder": dec.split(":")[0], "p": pt.p, "rate": pt.logical_error_rate,
                         "ci": [pt.ci_low, pt.ci_high]})
            print(f"{rows[-1]['decoder']:8s} p={pt.p:.3g} rate={pt.logical_error_rate:.5f} "
                  f"[{pt.ci_low:.5f}, {pt.ci_high:.5f}]")
    report = {"experiment": {k: str(v) if isinstance(v, Path) else v for k, v in asdict(exp).items()},
              "loss_history": result.loss_history, "results": rows}
    (exp.out_dir / f"r{exp.level}_compare.json").write_text(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
