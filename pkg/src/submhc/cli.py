"""``submhc`` command line: build, sweep, train, eval, export.

Exit codes: 0 success, 1 invariant/validation failure, 2 usage or config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import codes, gf2
from .channel import extract_syndrome, logical_label
from .decoders import CapacityError
from .export import FORMATS, export_parity_check
from .harness import ConfigError, SweepConfig, curve_csv, curve_json, run_sweep, write_curve

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def count_line(code: codes.CodeSpec) -> str:
    stab = len(code.z_stabilizers) + len(code.x_stabilizers)
    if code.family == "subsystem":
        n_checks = len(code.x_checks) + len(code.z_checks)
        indep = 2 * gf2.rank(list(code.z_checks))
        checks = f"checks={n_checks}({indep} indep)"
    else:
        checks = f"checks={stab}"
    return f"n={code.n} k={code.k} g={code.num_gauge} stab={stab} {checks} d={2**code.level}"


def channel_invariants(code: codes.CodeSpec, trials: int = 200, seed: int = 0) -> list[str]:
    """Randomized checks of syndrome linearity and label invariance; returns failed property names."""
    rnd = random.Random(seed)
    full = (1 << code.n) - 1
    failures = []
    group = list(code.x_stabilizers) + list(code.x_gauge)
    for _ in range(trials):
        e1, e2 = rnd.getrandbits(code.n) & full, rnd.getrandbits(code.n) & full
        if extract_syndrome(code, e1 ^ e2) != extract_syndrome(code, e1) ^ extract_syndrome(code, e2):
            failures.append("syndrome linearity")
            break
        g = group[rnd.randrange(len(group))]
        if logical_label(code, e1 ^ g) != logical_label(code, e1):
            failures.append("label invariance under stabilizer/gauge elements")
            break
        j = rnd.randrange(code.k)
        if logical_label(code, e1 ^ code.x_logicals[j]) != logical_label(code, e1) ^ (1 << j):
            failures.append("label shift under logical X")
            break
    if any(extract_syndrome(code, g) for g in code.x_gauge):
        failures.append("gauge elements have zero syndrome")
    return failures


def cmd_build(args) -> int:
    code = codes.build_code(args.level, args.family)
    print(count_line(code))
    axes = codes.stabilizer_counts_by_axis(code)
    print("stabilizers by axis: " + " ".join(f"x{a + 1}={c}" for a, c in enumerate(axes)))
    print(f"gauge={code.num_gauge} logical_weight={gf2.weight(code.x_logicals[0])}")
    rep = codes.ancilla_report(code)
    print(f"ancillas_per_direction={rep['ancillas_per_direction']} overhead_ratio={rep['overhead_ratio']}")
    if not args.validate:
        return EXIT_OK
    failures = codes.verify_code(code) + channel_invariants(code)
    if code.n <= 16:
        d = codes.dressed_distance(code)
        print(f"exhaustive distance: {d}")
        if d != 2**code.level:
            failures.append(f"distance == 2^r (found {d})")
    for name in failures:
        print(f"FAILED: {name}", file=sys.stderr)
    if failures:
        return EXIT_INVALID
    print("all invariants hold")
    return EXIT_OK


def _print_points(points, relative: bool) -> None:
    for pt in points:
        extra = f" relative={pt.relative_rate:.4g}" if relative else ""
        print(
            f"p={pt.p:.4g} rate={pt.logical_error_rate:.4g} ci=[{pt.ci_low:.4g},{pt.ci_high:.4g}] "
            f"errors={pt.errors}/{pt.shots} bd={pt.bd_reference:.4g}{extra} ({pt.wall_time:.1f}s)",
            file=sys.stderr,
        )


def _emit(points, cfg: SweepConfig, out: str | None, fmt: str) -> None:
    if out:
        write_curve(points, cfg, out)
    else:
        sys.stdout.write(curve_json(points) if fmt == "json" else curve_csv(points))


def cmd_sweep(args) -> int:
    cfg = SweepConfig.loads(Path(args.config).read_text())
    if args.out:
        cfg.output = args.out
    if args.workers:
        cfg.workers = args.workers
    cfg.validate()
    points = run_sweep(cfg)
    _print_points(points, args.relative)
    _emit(points, cfg, cfg.output, args.format)
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = SweepConfig(
        family=args.family, level=args.level, decoder=args.decoder, p_grid=args.p, shots=args.shots,
        seed=args.seed, output=args.out, workers=args.workers,
    )
    cfg.validate()
    points = run_sweep(cfg)
    _print_points(points, args.relative)
    _emit(points, cfg, cfg.output, args.format)
    return EXIT_OK


def cmd_train(args) -> int:
    from . import nn

    if args.samples < 1:
        raise ConfigError("--samples must be >= 1")
    if not 0.0 <= args.p <= 0.5:
        raise ConfigError("--p must lie in [0, 0.5]")
    code = codes.build_code(args.level, "subsystem")
    cfg = nn.TrainConfig(
        p_train=args.p, num_samples=args.samples, batch_size=args.batch_size, learning_rate=args.lr,
        epochs=args.epochs, seed=args.seed,
    )
    x, y = nn.generate_dataset(code, cfg.p_train, cfg.num_samples, args.seed)
    spec = nn.init_mlp(args.level, seed=args.seed, dims=nn.default_dims(args.level, args.hidden_layers, args.width))
    result = nn.train(spec, cfg, x, y)
    nn.save_model(result.spec, args.out)
    report = {"level": args.level, "dims": result.spec.dims, "config": vars(cfg), "loss_history": result.loss_history}
    Path(str(args.out) + ".report.json").write_text(json.dumps(report, indent=2))
    for epoch, loss in enumerate(result.loss_history):
        print(f"epoch {epoch}: loss {loss:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    code = codes.build_code(args.level, args.family)
    path = export_parity_check(code, args.format, args.out)
    print(f"wrote {len(code.z_stabilizers)}x{code.n} Z-stabilizer matrix to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submhc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def code_args(p):
        p.add_argument("--level", "-r", type=int, required=True)
        p.add_argument("--family", choices=("subsystem", "original"), default="subsystem")

    p = sub.add_parser("build", help="construct a code and print its counts")
    code_args(p)
    p.add_argument("--validate", action="store_true", help="run the full invariant suite")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format when no --out")
    p.add_argument("--relative", action="store_true", help="also report rate / BD rate")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="evaluate one decoder on a list of p values")
    code_args(p)
    p.add_argument("--decoder", required=True, help="bd | oracle | blockmap | md | nn:<model>")
    p.add_argument("--p", type=float, nargs="+", required=True)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--relative", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train", help="train a neural-network decoder")
    p.add_argument("--level", "-r", type=int, required=True)
    p.add_argument("--p", type=float, default=0.04)
    p.add_argument("--samples", type=int, default=1 << 20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=6)
    p.add_argument("--batch-size", type=int, default=512)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--hidden-layers", type=int, default=3)
    p.add_argument("--width", type=int, default=None, help="hidden width (default 16*3^r)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="write the Z-stabilizer parity-check matrix")
    code_args(p)
    p.add_argument("--format", choices=FORMATS, default="alist")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
