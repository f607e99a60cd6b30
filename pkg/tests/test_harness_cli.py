import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from submhc import cli, nn
from submhc.decoders import bd_logical_rate
from submhc.export import load_parity_check
from submhc.harness import (
    CHUNK,
    ConfigError,
    SweepConfig,
    curve_csv,
    curve_json,
    run_sweep,
    shard_ranges,
)

DATA = Path(__file__).parent / "data"


@settings(max_examples=50)
@given(
    family=st.sampled_from(["subsystem", "original"]),
    level=st.integers(1, 5),
    grid=st.lists(st.floats(0.0, 0.5), min_size=1, max_size=6, unique=True).map(sorted),
    shots=st.integers(1, 10**8),
    seed=st.integers(0, 2**63),
)
def test_config_roundtrip(family, level, grid, shots, seed):
    cfg = SweepConfig(family=family, level=level, decoder="bd", p_grid=grid, shots=shots, seed=seed)
    back = SweepConfig.loads(cfg.dumps())
    assert back == cfg and back.result_hash() == cfg.result_hash()


def test_p_range_expands_to_log_grid():
    cfg = SweepConfig.loads(json.dumps({"decoder": "bd", "p_range": {"start": 0.001, "stop": 0.1, "num": 3}}))
    assert cfg.p_grid == pytest.approx([0.001, 0.01, 0.1])


@pytest.mark.parametrize(
    "patch",
    [
        {"p_grid": []},
        {"p_grid": [0.02, 0.01]},
        {"p_grid": [0.7]},
        {"shots": 0},
        {"level": 9},
        {"family": "toric"},
        {"decoder": "magic"},
        {"decoder": "nn:/nonexistent/model.bin"},
        {"decoder": "blockmap", "level": 4},
        {"decoder": "md", "family": "subsystem"},
        {"schema_version": 99},
    ],
)
def test_invalid_configs(patch):
    with pytest.raises(ConfigError):
        SweepConfig(**{**SweepConfig().to_dict(), **patch}).validate()


def test_unknown_keys_and_bad_json():
    with pytest.raises(ConfigError):
        SweepConfig.loads('{"levle": 2}')
    with pytest.raises(ConfigError):
        SweepConfig.loads("{not json")


def test_shard_ranges():
    assert shard_ranges(10, 4) == [(0, 10)]
    ranges = shard_ranges(3 * CHUNK + 5, 2)
    assert ranges[0][0] == 0 and ranges[-1][1] == 3 * CHUNK + 5
    assert all(a % CHUNK == 0 for a, _ in ranges)
    assert all(b == c for (_, b), (c, _) in zip(ranges, ranges[1:]))


def _strip_time(points):
    return [{k: v for k, v in vars(pt).items() if k != "wall_time"} for pt in points]


def test_worker_count_invariance():
    cfg = SweepConfig(level=2, decoder="blockmap", p_grid=[0.03], shots=40_000, seed=13)
    one = run_sweep(cfg, workers=1)
    two = run_sweep(cfg, workers=2)
    assert _strip_time(one) == _strip_time(two)


def test_golden_curve():
    cfg = SweepConfig(family="subsystem", level=2, decoder="blockmap", p_grid=[0.01, 0.04], shots=20000, seed=7)
    pts = run_sweep(cfg, workers=1)
    for pt in pts:
        pt.wall_time = 0.0
        assert pt.logical_error_rate == pt.errors / pt.shots
        assert pt.ci_low <= pt.logical_error_rate <= pt.ci_high
    assert curve_csv(pts) == (DATA / "golden_r2_blockmap.csv").read_text()


def test_bd_sweep_exact():
    pts = run_sweep(SweepConfig(level=3, decoder="bd", p_grid=[0.001, 0.01], shots=0), workers=1)
    assert [pt.logical_error_rate for pt in pts] == [bd_logical_rate(3, 0.001), bd_logical_rate(3, 0.01)]
    assert all(pt.relative_rate == 1.0 for pt in pts)
    rows = json.loads(curve_json(pts))
    assert rows[0]["relative_rate"] == 1.0


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "argv, expected",
    [
        (["-r", 1], "n=4 k=2 g=0 stab=2 checks=2(2 indep) d=2"),
        (["-r", 2], "n=16 k=4 g=2 stab=10 checks=16(14 indep) d=4"),
        (["-r", 2, "--family", "original"], "n=16 k=4 g=0 stab=12 checks=12 d=4"),
    ],
)
def test_cli_build_counts(capsys, argv, expected):
    code, out, _ = run_cli(capsys, "build", *argv)
    assert code == 0 and out.splitlines()[0] == expected


def test_cli_build_level3(capsys):
    code, out, _ = run_cli(capsys, "build", "-r", 3, "--validate")
    first = out.splitlines()[0]
    assert code == 0 and "stab=38" in first and "g=18" in first
    assert "x1=18 x2=12 x3=8" in out and "all invariants hold" in out


def test_cli_build_validate_level2(capsys):
    code, out, _ = run_cli(capsys, "build", "-r", 2, "--validate")
    assert code == 0 and "exhaustive distance: 4" in out


def test_cli_export_roundtrip(capsys, tmp_path, code2):
    out = tmp_path / "h.alist"
    code, _, _ = run_cli(capsys, "export", "-r", 2, "--format", "alist", "--out", out)
    assert code == 0
    rows, n = load_parity_check(out, "alist")
    assert rows == list(code2.z_stabilizers) and n == 16


def test_cli_export_bad_format(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["export", "-r", "2", "--format", "json", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_cli_io_error(capsys, tmp_path):
    code, _, err = run_cli(capsys, "export", "-r", 2, "--format", "csv", "--out", tmp_path / "no" / "such" / "f.csv")
    assert code == 3 and "I/O error" in err


def test_cli_train_rejects_empty(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "train", "-r", 2, "--samples", 0, "--out", tmp_path / "m.bin")
    assert code == 2


def test_cli_train_deterministic(capsys, tmp_path):
    args = ["train", "-r", 2, "--samples", 2048, "--epochs", 2, "--width", 16, "--seed", 4]
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    assert run_cli(capsys, *args, "--out", a)[0] == 0
    assert run_cli(capsys, *args, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(Path(str(a) + ".report.json").read_text())
    assert len(report["loss_history"]) == 3
    nn.load_model(a)

    code, out, _ = run_cli(capsys, "eval", "-r", 2, "--decoder", f"nn:{a}", "--p", 0.02, "--shots", 2000)
    assert code == 0 and out.startswith("level,family,decoder")


def test_cli_eval_missing_model(capsys, tmp_path):
    code, _, err = run_cli(capsys, "eval", "-r", 2, "--decoder", f"nn:{tmp_path / 'none.bin'}", "--p", 0.01)
    assert code == 2 and "model file not found" in err


def test_cli_eval_capacity(capsys):
    code, _, _ = run_cli(capsys, "eval", "-r", 4, "--decoder", "blockmap", "--p", 0.01)
    assert code == 2


def test_cli_sweep_writes_files(capsys, tmp_path):
    cfg = SweepConfig(level=2, decoder="blockmap", p_grid=[0.02, 0.04], shots=5000, seed=1)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.dumps())
    out = tmp_path / "curve.csv"
    code, _, err = run_cli(capsys, "sweep", path, "--out", out, "--workers", 1, "--relative")
    assert code == 0 and "relative=" in err
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    meta = json.loads(Path(str(out) + ".meta.json").read_text())
    assert meta["config_hash"] == cfg.result_hash()


def test_cli_sweep_bad_config(capsys, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"p_grid": [0.1, 0.05]}')
    assert run_cli(capsys, "sweep", path)[0] == 2
    assert run_cli(capsys, "sweep", tmp_path / "missing.json")[0] == 3


def test_cli_eval_json_stdout(capsys):
    code, out, _ = run_cli(capsys, "eval", "-r", 1, "--decoder", "bd", "--p", 0.01, 0.02, "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["p"] for r in rows] == [0.01, 0.02]


def test_crossing_point():
    from submhc.harness import crossing_point

    grid = [0.01, 0.02, 0.04]
    # high-level curve p^4 * 1000 crosses p^2 at p = 1/sqrt(1000)
    low = [p**2 for p in grid]
    high = [1000 * p**4 for p in grid]
    assert crossing_point(grid, low, high) == pytest.approx(1000**-0.5, rel=1e-12)
    assert crossing_point(grid, high, low) is None
    assert crossing_point(grid, [0.0, 1, 1], [1, 1, 1]) is None


def test_loglog_slope_exact_power():
    from submhc.harness import loglog_slope

    grid = [1e-3, 2e-3, 4e-3]
    shots = [10**9] * 3
    errors = [round(1e9 * 5 * p**3) for p in grid]
    slope, se = loglog_slope(grid, errors, shots)
    assert slope == pytest.approx(3.0, abs=1e-3) and se > 0
    with pytest.raises(ValueError):
        loglog_slope(grid, [0, 1, 2], shots)
