"""Command-line front end: ``dho <subcommand> [options]``.

Every sub-command builds a list of tables (one per panel) and writes them as
CSV or JSON.  Output depends only on the configuration, so repeated runs are
byte-identical.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, bohmian, coherence, identical
from .errors import ConfigError, DhoError
from .presets import PRESETS, preset
from .states import EvolutionParams, SuperposedState, make_cat

SUBCOMMANDS = ("coherence", "grid", "trajectories", "mss", "detect", "spcoherence", "validate")
EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    subcommand: str
    preset: Optional[str] = None
    alpha: Tuple[complex, ...] = (1.0,)
    beta: Optional[complex] = None
    gamma0: Tuple[float, ...] = (0.0,)
    t_max: float = 10.0
    dt: float = 0.1
    t0: float = 5.0
    kbt: float = 0.0
    d: Tuple[float, ...] = (2.0,)
    stats: Tuple[str, ...] = ("MB", "BE", "FD")
    basis: str = "energy"
    n_max: Optional[int] = None
    x_min: float = -10.0
    x_max: float = 10.0
    nx: int = 401
    sweep: Tuple[str, ...] = ("time",)
    state: str = "coherent"
    alpha2_min: float = 0.0
    alpha2_max: float = 4.0
    alpha2_step: float = 0.1
    stride: int = 50
    n_per_packet: int = 10
    out: Optional[str] = None
    format: str = "csv"
    precision: int = 12

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown sub-command {self.subcommand!r}")
        if not self.gamma0 or any(not math.isfinite(g) or g < 0 for g in self.gamma0):
            raise ConfigError("gamma0 list must be non-empty with values >= 0")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be > 0")
        if not (self.t_max >= 0 and math.isfinite(self.t_max)):
            raise ConfigError("t-max must be >= 0")
        if self.kbt < 0:
            raise ConfigError("kbt must be >= 0")
        if any(not d > 0 for d in self.d):
            raise ConfigError("detector half-width d must be > 0")
        if self.basis not in coherence.BASES:
            raise ConfigError(f"basis must be one of {', '.join(coherence.BASES)}")
        if not (self.x_max > self.x_min and self.nx >= 2):
            raise ConfigError("need x-max > x-min and nx >= 2")
        if not (self.alpha2_step > 0 and self.alpha2_max >= self.alpha2_min >= 0):
            raise ConfigError("need alpha2 step > 0 and 0 <= alpha2 min <= alpha2 max")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not 1 <= self.precision <= 17:
            raise ConfigError("precision must be between 1 and 17")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError("nmax must be >= 1")
        for s in self.stats:
            identical.Statistics.parse(s)
        return self

    def echo(self) -> dict:
        def conv(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (tuple, list)):
                return [conv(x) for x in v]
            return v
        return {k: conv(v) for k, v in dataclasses.asdict(self).items()}


@dataclass
class Table:
    columns: List[str]
    rows: np.ndarray
    panel: Optional[str] = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _complex(text: str) -> complex:
    parts = [p for p in text.split(",") if p.strip()]
    if not 1 <= len(parts) <= 2:
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        vals = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _word_list(text: str) -> Tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dho", description="Damped harmonic oscillator data series.")
    parser.add_argument("--version", action="version", version=f"dho {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--alpha", type=_complex)
        sp.add_argument("--beta", type=_complex)
        sp.add_argument("--gamma0", type=_float_list)
        sp.add_argument("--t-max", dest="t_max", type=float)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--kbt", type=float)
        sp.add_argument("--d", type=_float_list, help="detector half-width(s)")
        sp.add_argument("--stats", type=_word_list, help="MB, BE, FD (comma-separated)")
        sp.add_argument("--basis", choices=coherence.BASES)
        sp.add_argument("--nmax", dest="n_max", type=int)
        sp.add_argument("--x-min", dest="x_min", type=float)
        sp.add_argument("--x-max", dest="x_max", type=float)
        sp.add_argument("--nx", type=int)
        sp.add_argument("--sweep", type=_word_list, help="time, alpha2 or states")
        sp.add_argument("--t0", type=float, help="fixed time for alpha2 sweeps")
        sp.add_argument("--alpha2-max", dest="alpha2_max", type=float)
        sp.add_argument("--alpha2-step", dest="alpha2_step", type=float)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--precision", type=int)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.preset:
        values = preset(ns.preset)
        if values.pop("subcommand") != ns.subcommand:
            raise ConfigError(f"preset {ns.preset} belongs to `dho {PRESETS[ns.preset]['subcommand']}`")
        values["preset"] = ns.preset
    for f in dataclasses.fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is None or f.name in ("subcommand", "preset"):
            continue
        if f.name == "alpha":
            v = (v,)
        elif f.name == "stats":
            v = tuple(s.upper() for s in v)
        values[f.name] = v
    for key in ("alpha", "gamma0", "d", "stats", "sweep"):
        if key in values and not isinstance(values[key], tuple):
            values[key] = (values[key],)
    if "alpha" in values:
        values["alpha"] = tuple(complex(a) for a in values["alpha"])
    if values.get("beta") is not None:
        values["beta"] = complex(values["beta"])
    return RunConfig(subcommand=ns.subcommand, **values).validate()


# ---------------------------------------------------------------------------
# sub-commands
# ---------------------------------------------------------------------------


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


def _label(x: float) -> str:
    return f"{x:g}"


def _single_alpha(cfg: RunConfig) -> complex:
    if len(cfg.alpha) != 1:
        raise ConfigError("this sub-command takes a single --alpha")
    return cfg.alpha[0]


def _state_for(cfg: RunConfig, alpha: complex, scanning: bool = False) -> SuperposedState:
    """Coherent state, or the superposition |alpha> + |beta> (beta = -alpha when scanning |alpha|^2)."""
    if cfg.state == "cat" or cfg.beta is not None:
        beta = -alpha if scanning or cfg.beta is None else cfg.beta
        return SuperposedState.from_components([(1.0, alpha), (1.0, beta)])
    return SuperposedState.coherent(alpha)


def _coherence_value(cfg: RunConfig, s: SuperposedState, p: EvolutionParams) -> float:
    if cfg.basis == "energy":
        if p.nbar:
            raise ConfigError("finite temperature is only supported in the position/momentum bases")
        return coherence.cr_superposition_energy(s, p, cfg.n_max).value
    if len(s) != 1:
        raise ConfigError("position/momentum coherence is implemented for single coherent states")
    return coherence.cr_coherent_continuous(s.amplitudes[0], p, cfg.basis, "closed_form").value


def cmd_coherence(cfg: RunConfig) -> List[Table]:
    nbar = coherence.nbar_from_kbt(cfg.kbt)
    tables = []
    for sweep in cfg.sweep:
        if sweep == "time":
            alpha = _single_alpha(cfg)
            s = _state_for(cfg, alpha)
            ts = _grid(0.0, cfg.t_max, cfg.dt)
            cols = ["t"] + [f"cr_gamma0={_label(g)}" for g in cfg.gamma0]
            rows = [[t] + [_coherence_value(cfg, s, EvolutionParams(g, float(t), nbar)) for g in cfg.gamma0]
                    for t in ts]
        elif sweep == "alpha2":
            xs = _grid(cfg.alpha2_min, cfg.alpha2_max, cfg.alpha2_step)
            cols = ["alpha2"] + [f"cr_gamma0={_label(g)}" for g in cfg.gamma0]
            rows = []
            for x in xs:
                s = _state_for(cfg, complex(math.sqrt(x)), scanning=True)
                rows.append([x] + [_coherence_value(cfg, s, EvolutionParams(g, cfg.t0, nbar)) for g in cfg.gamma0])
        elif sweep == "states":
            xs = _grid(cfg.alpha2_min, cfg.alpha2_max, cfg.alpha2_step)
            cols = ["alpha2", "coherent", "cat_phi", "cat_psi", "two_cat_T", "bound_cat", "bound_two_cat"]
            p = EvolutionParams()
            rows = []
            for x in xs:
                a = math.sqrt(x)
                lhs, rhs = coherence.cr_two_cat_inequality(a, cfg.n_max)
                rows.append([
                    x,
                    coherence.cr_coherent_energy(a, p).value,
                    coherence.cr_cat_closed_form(x).value,
                    coherence.cr_cat_closed_form(x / 4.0).value,
                    lhs,
                    coherence.cr_upper_bound_cat(a, p),
                    rhs,
                ])
        else:
            raise ConfigError(f"unknown sweep {sweep!r}; use time, alpha2 or states")
        tables.append(Table(cols, np.array(rows, dtype=float), sweep if len(cfg.sweep) > 1 else None))
    return tables


def _cat_state(cfg: RunConfig) -> SuperposedState:
    alpha = _single_alpha(cfg)
    beta = -alpha if cfg.beta is None else cfg.beta
    return SuperposedState.from_components([(1.0, alpha), (1.0, beta)])


def _panel_name(prefix: str, value: float, many: bool) -> Optional[str]:
    return f"{prefix}{_label(value)}" if many else None


def cmd_grid(cfg: RunConfig) -> List[Table]:
    s = _cat_state(cfg)
    x = np.linspace(cfg.x_min, cfg.x_max, cfg.nx)
    ts = _grid(0.0, cfg.t_max, cfg.dt)
    tables = []
    for g in cfg.gamma0:
        field_ = bohmian.sample_grid(s, g, x, ts)
        T, X = np.meshgrid(ts, x, indexing="ij")
        rows = np.column_stack([T.ravel(), X.ravel(), field_.P.ravel(), field_.J.ravel()])
        tables.append(Table(["t", "x", "P", "J"], rows, _panel_name("gamma0-", g, len(cfg.gamma0) > 1)))
    return tables


def cmd_trajectories(cfg: RunConfig) -> List[Table]:
    s = _cat_state(cfg)
    starts = bohmian.quantile_starts(s, cfg.n_per_packet)
    tables = []
    for g in cfg.gamma0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ens = bohmian.integrate_trajectories(s, g, starts, cfg.t_max, dt=cfg.dt, stride=cfg.stride)
        cols = ["t"] + [f"x{k}" for k in range(starts.size)]
        rows = np.column_stack([ens.times, ens.paths.T])
        tables.append(Table(cols, rows, _panel_name("gamma0-", g, len(cfg.gamma0) > 1)))
    return tables


def _two_particle(cfg: RunConfig, alpha: complex, stats: str) -> identical.TwoParticleState:
    beta = -alpha if cfg.beta is None else cfg.beta
    return identical.TwoParticleState.build(alpha, beta, stats)


def cmd_mss(cfg: RunConfig) -> List[Table]:
    alpha = _single_alpha(cfg)
    ts = _grid(0.0, cfg.t_max, cfg.dt)
    cols = ["t"]
    series = []
    for g in cfg.gamma0:
        for st in cfg.stats:
            tp = _two_particle(cfg, alpha, st)
            cols.append(f"mss_{st}_gamma0={_label(g)}")
            series.append([identical.mss(tp, EvolutionParams(g, float(t))) for t in ts])
    return [Table(cols, np.column_stack([ts] + series))]


def cmd_detect(cfg: RunConfig) -> List[Table]:
    alpha = _single_alpha(cfg)
    ts = _grid(0.0, cfg.t_max, cfg.dt)
    tables = []
    for d in cfg.d:
        window = identical.DetectorWindow(d)
        cols = ["t"]
        series = []
        for g in cfg.gamma0:
            for st in cfg.stats:
                tp = _two_particle(cfg, alpha, st)
                cols.append(f"p_{st}_gamma0={_label(g)}")
                series.append([identical.joint_detection_ratio(tp, EvolutionParams(g, float(t)), window)
                               for t in ts])
        tables.append(Table(cols, np.column_stack([ts] + series), _panel_name("d-", d, len(cfg.d) > 1)))
    return tables


def cmd_spcoherence(cfg: RunConfig) -> List[Table]:
    tables = []
    for sweep in cfg.sweep:
        if sweep == "time":
            ts = _grid(0.0, cfg.t_max, cfg.dt)
            for alpha in cfg.alpha:
                cols = ["t"]
                series = []
                for g in cfg.gamma0:
                    for st in cfg.stats:
                        tp = _two_particle(cfg, alpha, st)
                        cols.append(f"cr_{st}_gamma0={_label(g)}")
                        series.append([identical.cr_by_statistics(tp, EvolutionParams(g, float(t)), cfg.n_max).value
                                       for t in ts])
                name = f"alpha-{_label(alpha.real)}" if len(cfg.alpha) > 1 else None
                tables.append(Table(cols, np.column_stack([ts] + series), name))
        elif sweep == "alpha2":
            xs = _grid(cfg.alpha2_min, cfg.alpha2_max, cfg.alpha2_step)
            cols = ["alpha2"]
            series = []
            for g in cfg.gamma0:
                for st in cfg.stats:
                    cols.append(f"cr_{st}_gamma0={_label(g)}")
                    vals = []
                    for x in xs:
                        a = complex(math.sqrt(x))
                        p = EvolutionParams(g, cfg.t0 if g else 0.0)
                        vals.append(identical.cr_by_statistics(_two_particle(cfg, a, st), p, cfg.n_max).value)
                    series.append(vals)
            tables.append(Table(cols, np.column_stack([xs] + series), None))
        else:
            raise ConfigError(f"unknown sweep {sweep!r}; use time or alpha2")
    return tables


COMMANDS = {
    "coherence": cmd_coherence,
    "grid": cmd_grid,
    "trajectories": cmd_trajectories,
    "mss": cmd_mss,
    "detect": cmd_detect,
    "spcoherence": cmd_spcoherence,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def format_number(v: float, precision: int) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    text = f"{v:.{precision}g}"
    return "0" if text in ("-0", "0") else text


def render_csv(table: Table, cfg: RunConfig) -> str:
    head = f"# dho v{__version__} preset={cfg.preset or 'custom'}"
    if table.panel:
        head += f" panel={table.panel}"
    lines = [head, ",".join(table.columns)]
    for row in table.rows:
        lines.append(",".join(format_number(float(v), cfg.precision) for v in row))
    return "\n".join(lines) + "\n"


def render_json(tables: Sequence[Table], cfg: RunConfig) -> str:
    def rounded(v):
        return float(format_number(float(v), cfg.precision))

    doc = {
        "dho_version": __version__,
        "preset": cfg.preset or "custom",
        "config": cfg.echo(),
        "panels": [
            {"panel": t.panel, "columns": t.columns, "data": [[rounded(v) for v in row] for row in t.rows]}
            for t in tables
        ],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _panel_path(out: str, panel: Optional[str]) -> str:
    if panel is None:
        return out
    stem, ext = os.path.splitext(out)
    return f"{stem}.{panel}{ext or '.csv'}"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".dho-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        # mkstemp creates 0600 files; give the result the usual umask-based mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(tables: Sequence[Table], cfg: RunConfig, stdout=None) -> List[str]:
    """Write every table; returns the paths written (empty when printing to stdout)."""
    stdout = stdout or sys.stdout
    if cfg.format == "json":
        payloads = [(cfg.out, render_json(tables, cfg))]
    else:
        payloads = [(_panel_path(cfg.out, t.panel) if cfg.out else None, render_csv(t, cfg)) for t in tables]
    if not cfg.out:
        for _, text in payloads:
            stdout.write(text)
        return []
    written = []
    try:
        for path, text in payloads:
            _atomic_write(path, text)
            written.append(path)
    except BaseException:
        for path in written:
            os.unlink(path)
        raise
    return written


def run_validate(cfg: RunConfig, dt: Optional[float] = None, stdout=None) -> int:
    """Run the oracle suite; ``dt`` is the master-equation step (default 0.005)."""
    from .validate import run_checks

    stdout = stdout or sys.stdout
    dt = 0.005 if dt is None else dt
    results = run_checks(dt=dt, n_max=cfg.n_max or 40)
    for r in results:
        stdout.write(r.line() + "\n")
    failed = sum(not r.passed for r in results)
    stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if cfg.subcommand == "validate":
            return run_validate(cfg, ns.dt)
        tables = COMMANDS[cfg.subcommand](cfg)
        write_outputs(tables, cfg)
    except (ConfigError, DhoError, ValueError, KeyError, OSError) as exc:
        print(f"dho: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
