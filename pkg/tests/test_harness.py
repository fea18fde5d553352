import math
import struct
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bbwave import cli
from bbwave.checks import spectral_exponents
from bbwave.config import ConfigError, RunConfig, dump_config, load_config, parse_config
from bbwave.dynamics import State
from bbwave.experiments import (
    PUBLISHED_ERRORS,
    PUBLISHED_RATES,
    convergence_rates,
    cross_section_y0,
    error_norms,
    format_table,
    rate_table,
    run,
    sweep_dt,
    table_config,
)
from bbwave.fileio import (
    DIAGNOSTICS_HEADER,
    MAGIC,
    SnapshotFormatError,
    read_diagnostics,
    read_snapshot,
    write_snapshot,
)
from bbwave.spectral import Grid2D, GridMismatchError
from bbwave.waves import gaussian_ic

SMALL = dict(N=32, T=0.2, dt=0.05)


# -- norms and rates ----------------------------------------------------------


def test_error_norms_closed_forms():
    g = Grid2D(3.0, 16)
    z = State.zeros(g)
    assert error_norms(z, z) == {"zeta": (0.0, 0.0), "v1": (0.0, 0.0), "v2": (0.0, 0.0)}
    c = State(g, np.full(g.shape, 0.7), np.zeros(g.shape), np.zeros(g.shape))
    l2, linf = error_norms(c, z)["zeta"]
    assert l2 == pytest.approx(2 * g.L * 0.7, rel=1e-14) and linf == 0.7
    with pytest.raises(GridMismatchError):
        error_norms(z, State.zeros(Grid2D(3.0, 8)))


def test_published_rates():
    # the published rate columns are truncated, not rounded (1.99755 prints as 1.997)
    assert convergence_rates([2.9955e-1, 7.5015e-2])[0] == pytest.approx(1.997, abs=1e-3)
    assert convergence_rates([5.2223e-2, 1.3049e-2])[0] == pytest.approx(2.000, abs=1e-3)
    assert convergence_rates([3.0, 0.75]) == [2.0]
    for j, key in enumerate(("l2_zeta", "l2_v1", "linf_zeta", "linf_v1")):
        got = convergence_rates([row[j] for row in PUBLISHED_ERRORS])
        assert got == pytest.approx(PUBLISHED_RATES[key], abs=1.5e-3)


@pytest.mark.parametrize("errs", [[1.0], [], [1.0, 0.0], [1.0, -2.0]])
def test_rates_domain(errs):
    with pytest.raises(ValueError):
        convergence_rates(errs)


def test_spectral_exponents_stop_at_floor():
    Ns = [64, 96, 128, 160]
    errs = [1.0, 1e-2, 1e-4, 1e-6]
    out = spectral_exponents(Ns, errs)
    assert [p[:2] for p in out] == [(64, 96), (96, 128)]
    assert out[0][2] == pytest.approx(math.log(100) / math.log(1.5))


def test_cross_section():
    g = Grid2D(64.0, 128)
    x, z = cross_section_y0(gaussian_ic(0.4, 5.0, 25.0, g))
    assert np.array_equal(x, g.nodes)
    assert np.max(np.abs(z - 0.4 * np.exp(-x**2 / 5))) <= 1e-16
    assert np.array_equal(z[1:], z[1:][::-1])


# -- configuration ------------------------------------------------------------


def test_config_round_trip():
    cfg = RunConfig(gamma=0.3, delta=1.2, N=64, snapshots=(0.5, 1.0), dealias=True, c_s="2.0")
    back = parse_config(dump_config(cfg))
    assert back == cfg


def test_config_parse_comments_and_types():
    cfg = parse_config("# header\nN = 64  # grid\ndealias = yes\nsnapshots = 0.1, 0.2\n\nc_s = exact\n")
    assert cfg.N == 64 and cfg.dealias is True and cfg.snapshots == (0.1, 0.2)
    assert cfg.speed() == pytest.approx(2.5 * math.sqrt(cfg.physical().r1 * cfg.physical().r2))


@pytest.mark.parametrize("text,key", [
    ("nonsense = 1", "nonsense"),
    ("N = abc", "N"),
    ("N", "line 1"),
    ("dealias = maybe", "dealias"),
])
def test_config_parse_errors(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


@pytest.mark.parametrize("change,key", [
    ({"N": 31}, "N"), ({"L": -1.0}, "L"), ({"dt": 0.0}, "dt"), ({"T": 1.0, "dt": 0.3}, "T"),
    ({"ic": "vortex"}, "ic"), ({"gamma": 1.2}, "gamma/delta"), ({"c_s": "fast"}, "c_s"),
    ({"a": -0.1}, "a/b/c/d"), ({"alpha1": 0.5}, "alpha1/alpha2/beta"),
    ({"snapshots": (0.33,)}, "snapshots"), ({"stride": 0}, "stride"),
    ({"ic": "line", "L": 3.0}, "L"),
])
def test_config_validation(change, key):
    with pytest.raises(ConfigError) as info:
        replace(RunConfig(), **change).validate()
    assert info.value.key == key


def test_config_coefficient_sources():
    explicit = RunConfig(a=-0.1, b=0.2, c=-0.1, d=0.2).coeffs()
    assert (explicit.a, explicit.b, explicit.c, explicit.d) == (-0.1, 0.2, -0.1, 0.2)
    knobs = RunConfig(alpha1=0.5, alpha2=0.0, beta=0.1).coeffs()
    assert knobs.d == 0.1
    assert RunConfig().coeffs().b == pytest.approx(0.191799, abs=1e-6)


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.txt")


# -- file formats -------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 100.0), st.floats(-10.0, 10.0))
def test_snapshot_round_trip_bit_exact(seed, L, t):
    import tempfile
    from pathlib import Path

    g = Grid2D(L, 8)
    W = np.random.default_rng(seed).normal(size=(3, 8, 8))
    s = State.from_stack(g, W, t)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "s.bin"
        write_snapshot(path, s)
        back = read_snapshot(path)
    assert back.t == t and back.grid == g
    assert np.array_equal(back.stack(), s.stack())


def test_snapshot_layout(tmp_path):
    g = Grid2D(2.0, 8)
    z = np.arange(64.0).reshape(8, 8)
    write_snapshot(tmp_path / "s.bin", State(g, z, -z, 2 * z, 0.5))
    raw = (tmp_path / "s.bin").read_bytes()
    assert raw[:8] == MAGIC
    assert struct.unpack("<Idd", raw[8:28]) == (8, 2.0, 0.5)
    assert len(raw) == 28 + 3 * 64 * 8
    body = np.frombuffer(raw[28:], dtype="<f8").reshape(3, 8, 8)
    assert np.array_equal(body[0], z) and body[0][0, 1] == 1.0


def test_snapshot_bad_file(tmp_path):
    (tmp_path / "bad.bin").write_bytes(b"NOTMAGIC" + bytes(20))
    with pytest.raises(SnapshotFormatError):
        read_snapshot(tmp_path / "bad.bin")
    g = Grid2D(2.0, 8)
    write_snapshot(tmp_path / "cut.bin", State.zeros(g))
    (tmp_path / "cut.bin").write_bytes((tmp_path / "cut.bin").read_bytes()[:-8])
    with pytest.raises(SnapshotFormatError):
        read_snapshot(tmp_path / "cut.bin")


# -- runs ---------------------------------------------------------------------


def test_zero_run_outputs(tmp_path):
    cfg = RunConfig(ic="zero", snapshots=(0.0, 0.2), **SMALL)
    res = run(cfg, tmp_path)
    assert all(r.H == 0.0 for r in res.records)
    assert res.errors["zeta"] == (0.0, 0.0)
    assert (tmp_path / "diagnostics.csv").read_text().splitlines()[0] == ",".join(DIAGNOSTICS_HEADER)
    for n in (0, 4):
        s = read_snapshot(tmp_path / f"snap_{n:07d}.bin")
        assert np.all(s.stack() == 0)
        assert (tmp_path / f"section_{n:07d}.csv").exists()
    assert parse_config((tmp_path / "config.txt").read_text()) == cfg


def test_diagnostics_without_reference(tmp_path):
    cfg = RunConfig(ic="gaussian", L=8.0, stride=2, **SMALL)
    res = run(cfg, tmp_path)
    recs = read_diagnostics(tmp_path / "diagnostics.csv")
    assert [r.t for r in recs] == pytest.approx([0.0, 0.1, 0.2])
    assert all(r.err_l2_zeta is None for r in recs) and res.errors is None
    line = (tmp_path / "diagnostics.csv").read_text().splitlines()[1]
    assert line.endswith(",,,,,")


def test_run_is_deterministic(tmp_path):
    cfg = RunConfig(**SMALL)
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    assert (tmp_path / "a" / "diagnostics.csv").read_bytes() == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_sweep_isolation(tmp_path):
    cfg = RunConfig(N=32, T=0.2, dt=0.05)
    dts = (0.05, 0.025)
    seq = sweep_dt(cfg, dts, jobs=1, out_dir=tmp_path / "seq")
    par = sweep_dt(cfg, dts, jobs=2, out_dir=tmp_path / "par")
    assert [c.errors for c in seq] == [c.errors for c in par]
    for dt in dts:
        name = f"dt_{dt:.6g}/diagnostics.csv"
        assert (tmp_path / "seq" / name).read_bytes() == (tmp_path / "par" / name).read_bytes()


def test_failed_cell_does_not_abort_sweep():
    cfg = RunConfig(N=32, T=0.2, dt=0.05, max_iter=8)
    cells = sweep_dt(cfg, (0.2, 0.005))
    assert cells[0].failure is not None and "step 1" in cells[0].failure
    assert cells[1].failure is None
    text = format_table(rate_table(cells))
    assert "failed" in text


def test_table_setups():
    lit, dts = table_config("literal")
    assert (lit.gamma, lit.delta, lit.speed(), lit.x0, lit.L, lit.N, lit.T) == (0.5, 0.9, 2.5, -10.0, 16.0, 256, 5.0)
    assert dts == (2.5e-2, 1.25e-2, 6.25e-3, 3.125e-3)
    surf, sdts = table_config("surface")
    assert (surf.gamma, surf.delta) == (0.0, 1.0) and sdts[0] == 1.25e-2
    with pytest.raises(ValueError):
        table_config("other")


# -- command line -------------------------------------------------------------


def test_cli_run_zero(tmp_path, capsys):
    code = cli.main(["run", "--set", "ic=zero", "--set", "N=16", "--set", "T=0.1",
                     "--snapshots", "0.1", "--out", str(tmp_path)])
    assert code == cli.EXIT_OK
    assert np.all(read_snapshot(tmp_path / "snap_0000004.bin").stack() == 0)
    assert "H=0.0" in capsys.readouterr().out


def test_cli_config_file(tmp_path):
    (tmp_path / "c.txt").write_text("ic = zero\nN = 16\nT = 0.05\n")
    assert cli.main(["run", "--config", str(tmp_path / "c.txt"), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "diagnostics.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run", "--set", "N=15"],
    ["run", "--set", "bogus=1"],
    ["run", "--set", "gamma=1.5"],
    ["run", "--config", "/nonexistent/config.txt"],
    ["run", "--set", "N=16", "--set", "T=0.1", "--snapshots", "0.03"],
    ["run", "--set", "N=16", "--set", "c_s=0.1"],
])
def test_cli_config_errors(argv, capsys):
    assert cli.main(argv) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_cli_numerical_failure(tmp_path):
    argv = ["run", "--set", "N=16", "--set", "T=0.1", "--max-iter", "2", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_NUMERICAL


def test_cli_sweeps(tmp_path, capsys):
    base = ["--set", "N=32", "--set", "T=0.1", "--out", str(tmp_path)]
    assert cli.main(["sweep-dt", *base, "--set", "dt=0.05", "--levels", "2"]) == 0
    out = capsys.readouterr().out
    assert "5.0000e-02" in out and "2.5000e-02" in out
    assert (tmp_path / "rates.txt").exists() and (tmp_path / "dt_0.025" / "diagnostics.csv").exists()
    assert cli.main(["sweep-N", *base, "--set", "dt=0.05", "--Ns", "16,32"]) == 0
    assert (tmp_path / "N_16").is_dir()


def test_cli_validate_quick(capsys):
    assert cli.main(["validate"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 5


def test_cli_validate_failure(monkeypatch, capsys):
    from bbwave.checks import CheckResult

    monkeypatch.setattr(cli.checks, "QUICK_CHECKS", (lambda: CheckResult("x", False, "forced"),))
    assert cli.main(["validate"]) == cli.EXIT_VALIDATION
    assert "FAIL x" in capsys.readouterr().out
