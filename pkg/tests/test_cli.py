import csv
import io
import json
import math
import os
import shutil
import subprocess
import sys

import numpy as np
import pytest

from dho import __version__, cli
from dho.presets import PRESETS, preset


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    lines = text.splitlines()
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    return lines[0], rows[0], np.array(rows[1:], dtype=float)


def test_presets_cover_all_figures():
    assert sorted(PRESETS) == [f"fig{k}" for k in range(1, 9)]
    with pytest.raises(KeyError):
        preset("fig9")
    p = preset("fig1")
    p["alpha"] = 5
    assert PRESETS["fig1"]["alpha"] == 1.0


def test_header_contract(capsys):
    code, out, _ = run(["mss", "--alpha", "1", "--gamma0", "0", "--t-max", "1", "--dt", "0.5"], capsys)
    assert code == 0
    head, cols, data = read_csv(out)
    assert head == f"# dho v{__version__} preset=custom"
    assert cols == ["t", "mss_MB_gamma0=0", "mss_BE_gamma0=0", "mss_FD_gamma0=0"]
    assert data[0, 1] == 9.0


def test_mss_period(capsys):
    code, out, _ = run(["mss", "--alpha", "1", "--gamma0", "0", "--stats", "MB", "--t-max", "6.3", "--dt", "0.01"], capsys)
    _, _, data = read_csv(out)
    t, m = data[:, 0], data[:, 1]
    assert m.max() == pytest.approx(9.0)
    shifted = np.interp(t[t < 3.1] + math.pi, t, m)
    assert np.max(np.abs(shifted - m[t < 3.1])) < 1e-2  # linear interpolation error only


def test_coherence_time_series(capsys):
    code, out, _ = run(["coherence", "--preset", "fig1", "--sweep", "time"], capsys)
    assert code == 0
    head, cols, data = read_csv(out)
    assert head == f"# dho v{__version__} preset=fig1"
    assert np.ptp(data[:, 1]) < 1e-10  # no damping: constant
    assert np.all(np.diff(data[1:, 1:], axis=1) < 0)  # more damping, less coherence


def test_coherence_alpha2_zero_row(capsys):
    _, out, _ = run(["coherence", "--preset", "fig1", "--sweep", "alpha2"], capsys)
    _, cols, data = read_csv(out)
    assert cols[0] == "alpha2" and np.all(data[0, 1:] == 0.0)


def test_states_sweep(capsys):
    _, out, _ = run(["coherence", "--preset", "fig2", "--alpha2-max", "2"], capsys)
    _, cols, data = read_csv(out)
    c = {name: data[:, k] for k, name in enumerate(cols)}
    assert np.all(c["cat_phi"] <= c["bound_cat"])
    assert np.all(c["two_cat_T"] <= c["bound_two_cat"])


def test_continuous_basis(capsys):
    _, out, _ = run(["coherence", "--basis", "position", "--gamma0", "0,0.3", "--t-max", "2", "--dt", "1"], capsys)
    _, _, data = read_csv(out)
    assert np.allclose(data[:, 1:], 0.5 * (1 + math.log(math.pi)), atol=1e-11)


def test_detect_full_space(capsys):
    _, out, _ = run(["detect", "--alpha", "1", "--d", "50", "--gamma0", "0.1", "--t-max", "3", "--dt", "0.5"], capsys)
    _, _, data = read_csv(out)
    assert np.all(data[:, 1:] == 1.0)


def test_spcoherence_fig7_ordering(capsys, tmp_path):
    out = tmp_path / "sp.csv"
    code, _, _ = run(["spcoherence", "--preset", "fig7", "--out", str(out)], capsys)
    assert code == 0
    for name in ("alpha-0.707107", "alpha-1"):
        text = (tmp_path / f"sp.{name}.csv").read_text()
        assert f"panel={name}" in text.splitlines()[0]
        _, cols, data = read_csv(text)
        mb, be, fd = data[:, 1], data[:, 2], data[:, 3]
        assert np.all(fd <= be)


def test_panels_and_json(capsys, tmp_path):
    out = tmp_path / "g.csv"
    code, _, _ = run(["grid", "--preset", "fig3", "--t-max", "0.1", "--nx", "41", "--out", str(out)], capsys)
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert names == {f"g.gamma0-{g}.csv" for g in ("0", "0.1", "0.2", "0.3")}
    assert os.stat(tmp_path / "g.gamma0-0.csv").st_mode & 0o044  # group/other readable under the usual umask

    js = tmp_path / "g.json"
    code, _, _ = run(["grid", "--preset", "fig3", "--t-max", "0.1", "--nx", "41", "--format", "json", "--out", str(js)], capsys)
    doc = json.loads(js.read_text())
    assert doc["preset"] == "fig3" and doc["config"]["nx"] == 41
    assert [p["panel"] for p in doc["panels"]] == [f"gamma0-{g}" for g in ("0", "0.1", "0.2", "0.3")]
    assert doc["panels"][0]["columns"] == ["t", "x", "P", "J"]


def test_trajectories(capsys):
    _, out, _ = run(["trajectories", "--preset", "fig4", "--gamma0", "0", "--t-max", "2"], capsys)
    _, cols, data = read_csv(out)
    assert cols[0] == "t" and len(cols) == 21
    paths = data[:, 1:]
    assert np.all(paths[:, :10] <= 1e-9) and np.all(paths[:, 10:] >= -1e-9)


@pytest.mark.parametrize("name", ["fig1", "fig5", "fig6", "fig8"])
def test_deterministic(name, capsys, tmp_path):
    sub = PRESETS[name]["subcommand"]
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert cli.main([sub, "--preset", name, "--out", str(a / "out.csv")]) == 0
    assert cli.main([sub, "--preset", name, "--out", str(b / "out.csv")]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_precision(capsys):
    _, out, _ = run(["mss", "--alpha", "1", "--stats", "FD", "--t-max", "0", "--precision", "4"], capsys)
    _, _, data = read_csv(out)
    assert out.splitlines()[-1] == "0,9.149"  # 9 + 8/(e^4 - 1)
    assert cli.format_number(-0.0, 12) == "0" and cli.format_number(float("nan"), 3) == "nan"


@pytest.mark.parametrize("argv", [
    ["mss", "--dt", "0"],
    ["mss", "--gamma0", "-1"],
    ["detect", "--d", "0"],
    ["mss", "--stats", "XY"],
    ["grid", "--x-min", "3", "--x-max", "1"],
    ["coherence", "--preset", "fig5"],
    ["coherence", "--sweep", "sideways"],
    ["coherence", "--kbt", "0.2"],
    ["mss", "--precision", "30"],
    ["mss", "--out", "/nonexistent-dir/x.csv"],
    ["detect", "--alpha", "1", "--d", "1", "--t-max", "0", "--stats", "FD", "--beta", "1"],
])
def test_config_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("dho: error:") and out == ""


def test_failed_write_removes_partial_files(tmp_path, monkeypatch):
    cfg = cli.RunConfig("grid", out=str(tmp_path / "x.csv"))
    tables = [cli.Table(["a"], np.zeros((1, 1)), "p1"), cli.Table(["a"], np.zeros((1, 1)), "p2")]
    real = cli._atomic_write
    calls = []

    def flaky(path, text):
        calls.append(path)
        if len(calls) == 2:
            raise OSError("disk full")
        real(path, text)

    monkeypatch.setattr(cli, "_atomic_write", flaky)
    with pytest.raises(OSError):
        cli.write_outputs(tables, cfg)
    assert list(tmp_path.iterdir()) == []


def test_validate_default(capsys):
    code, out, _ = run(["validate"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[-1].endswith("checks passed") and all(l.startswith("PASS") for l in lines[:-1])
    assert all("residual=" in l for l in lines[:-1])


def test_validate_large_step_fails(capsys):
    code, out, _ = run(["validate", "--dt", "0.5"], capsys)
    assert code == 1
    assert any(l.startswith("FAIL trace_drift") for l in out.splitlines())


def test_console_script():
    exe = shutil.which("dho")
    argv = [exe] if exe else [sys.executable, "-m", "dho.cli"]
    r = subprocess.run(argv + ["mss", "--alpha", "1", "--t-max", "0"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("# dho v")
    r = subprocess.run(argv + ["mss", "--dt", "-1"], capture_output=True, text=True)
    assert r.returncode == 2 and "dho: error" in r.stderr and r.stdout == ""
