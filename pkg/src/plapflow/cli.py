"""Experiment configuration, orchestration and CSV emission.

Config files are ``key=value`` lines with ``#`` comments, e.g.::

    dim=1
    n=255
    p=3
    g=one_plus_exp a=1 b=1 c=1
    lambda=mid

Every key can be overridden on the command line with a flag of the same name
(``--lambda 20``, ``--n 63``). Exit codes: 0 pass, 1 acceptance failure,
2 solver failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from plapflow.dynamics import (BLEW_UP, CONVERGED, DECAYED, ComparisonReport, StepControls, TrajectoryRecord,
                               compare_evolutions, evolve)
from plapflow.equilibria import BranchResult, default_schedule, solve_equilibrium, trace_branch
from plapflow.errors import ConfigError, IntegrityError, PreconditionError, SolverError
from plapflow.grid import Grid, GridFunction, build_grid, norm_sup, seminorm_grad_p
from plapflow.nonlinearity import BUILTINS, Nonlinearity
from plapflow.plap import SolverControls
from plapflow.spectral import Thresholds, Weight, principal_eigenvalue, thresholds

log = logging.getLogger(__name__)

OUTPUT_ENV = "PLAPFLOW_OUTPUT_DIR"

EXIT_PASS, EXIT_FAIL, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3

SOLVER_KEYS = {"tol": "tol_residual", "max_iter": "max_iter", "damping": "damping", "eps_jacobian": "eps_jacobian"}
STEP_KEYS = ("dt_init", "dt_min", "dt_max", "blowup_threshold", "stationarity_tol")
KEYS = ("dim", "n", "p", "g", "lambda", "v0", "w0", "weight", "gamma", "schedule", "seeds", "T", "output",
        *SOLVER_KEYS, *STEP_KEYS)

# tolerance for "same equilibrium" checks, in sup-norm
MATCH_TOL = 1e-5


@dataclass
class ExperimentConfig:
    """Validated experiment settings.

    ``lam`` stays symbolic (``"mid"``, ``"0.5*lambda_min"``, ...) until
    :func:`resolve_lambda` sees the thresholds of the same run.
    """

    dim: int = 1
    n: tuple = (255,)
    p: float = 3.0
    g_name: str = "one_plus_exp"
    g_params: dict = field(default_factory=dict)
    lam: str | None = None
    v0: str = "0.5*psi_min"
    w0: str = "0"
    weight: str = "ones"
    gamma: str = "ginf"
    schedule: str = "geometric 24"
    seeds: tuple = ()
    T: float = 1e9
    output: str | None = None
    solver: SolverControls = field(default_factory=SolverControls)
    step: StepControls = field(default_factory=StepControls)

    def grid(self) -> Grid:
        return build_grid(self.dim, self.n if len(self.n) > 1 else self.n[0])

    def nonlinearity(self) -> Nonlinearity:
        return BUILTINS[self.g_name](**self.g_params)

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV) or ".")


def _number(key, text, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def _parse_g(text):
    parts = text.split()
    if not parts or parts[0] not in BUILTINS:
        raise ConfigError(f"g: unknown nonlinearity {text!r}; builtins are {sorted(BUILTINS)}")
    params = {}
    for item in parts[1:]:
        name, sep, val = item.partition("=")
        if not sep or name not in ("a", "b", "c"):
            raise ConfigError(f"g: bad parameter {item!r} (expected a=, b=, c=)")
        params[name] = _number(f"g.{name}", val)
    return parts[0], params


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key=value`` lines into a validated :class:`ExperimentConfig`.

    Raises:
        ConfigError: on unknown keys, malformed values or violated
            invariants (``p > max(2, dim)``, ``g_0 > g_inf >= 0`` with ``g``
            strictly decreasing).
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value
    cfg = dataclasses.replace(base) if base is not None else ExperimentConfig()
    if "dim" in raw:
        cfg.dim = _number("dim", raw["dim"], int)
    if "n" in raw:
        cfg.n = tuple(_number("n", s, int) for s in re.split(r"[x,\s]+", raw["n"]) if s)
    if "p" in raw:
        cfg.p = _number("p", raw["p"])
    if "g" in raw:
        cfg.g_name, cfg.g_params = _parse_g(raw["g"])
    if "lambda" in raw:
        cfg.lam = raw["lambda"]
    for key in ("v0", "w0", "weight", "gamma", "schedule", "output"):
        if key in raw:
            setattr(cfg, key, raw[key])
    if "seeds" in raw:
        cfg.seeds = tuple(_number("seeds", s, int) for s in re.split(r"[,\s]+", raw["seeds"]) if s)
    if "T" in raw:
        cfg.T = _number("T", raw["T"])
    solver = {SOLVER_KEYS[k]: _number(k, raw[k], int if k == "max_iter" else float) for k in SOLVER_KEYS
              if k in raw}
    step = {k: _number(k, raw[k]) for k in STEP_KEYS if k in raw}
    try:
        cfg.solver = dataclasses.replace(cfg.solver, **solver)
        cfg.step = dataclasses.replace(cfg.step, horizon=cfg.T, **step)
    except ValueError as exc:
        raise ConfigError(f"controls: {exc}") from None
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    if cfg.dim not in (1, 2):
        raise ConfigError(f"dim must be 1 or 2, got {cfg.dim}")
    if len(cfg.n) not in (1, cfg.dim) or min(cfg.n) < 3:
        raise ConfigError(f"n must give {cfg.dim} value(s) >= 3, got {cfg.n}")
    if not cfg.p > max(2, cfg.dim):
        raise ConfigError(f"p must exceed max(2, dim) = {max(2, cfg.dim)}, got p={cfg.p:g}")
    if cfg.T <= 0:
        raise ConfigError("T must be positive")
    g = cfg.nonlinearity()
    x = cfg.grid().coords
    g.check(x)
    if cfg.lam is not None:
        _lambda_form(cfg.lam)


_LAMBDA_RE = re.compile(r"^(?:(?P<coef>[-+0-9.eE]+)\s*\*\s*)?(?P<sym>lambda_min|lambda_max|mid)$")


def _lambda_form(spec):
    spec = str(spec).strip()
    try:
        return float(spec), None
    except ValueError:
        pass
    m = _LAMBDA_RE.match(spec)
    if not m:
        raise ConfigError(f"lambda: expected a number or [coef*]{{lambda_min, lambda_max, mid}}, got {spec!r}")
    return _number("lambda", m["coef"]) if m["coef"] else 1.0, m["sym"]


def resolve_lambda(spec, th: Thresholds) -> float:
    """Turn a lambda spec into a number using this run's thresholds."""
    coef, sym = _lambda_form(spec)
    if sym is None:
        value = coef
    else:
        base = {"lambda_min": th.lambda_min, "lambda_max": th.lambda_max,
                "mid": th.mid if th.finite_max else math.nan}[sym]
        if not math.isfinite(base):
            raise ConfigError(f"lambda: {sym} is undefined because lambda_max is infinite")
        value = coef * base
    if not value > 0:
        raise ConfigError(f"lambda must be positive, got {value:g}")
    return value


def make_initial(spec: str, grid: Grid, th: Thresholds | None = None) -> GridFunction:
    """Initial data from ``0``, ``[eps*]psi_min``, ``[eps*]psi_max``,
    ``random_positive(seed[, scale])`` or ``file:<path>`` (one value per node)."""
    spec = spec.strip()
    if spec in ("0", "zero"):
        return grid.zeros()
    m = re.match(r"^(?:([-+0-9.eE]+)\s*\*\s*)?(psi_min|psi_max)$", spec)
    if m:
        if th is None:
            raise ConfigError(f"initial data {spec!r} needs thresholds")
        psi = th.psi_min if m[2] == "psi_min" else th.psi_max
        if psi is None:
            raise ConfigError("psi_max is undefined because lambda_max is infinite")
        return (float(m[1]) if m[1] else 1.0) * psi
    m = re.match(r"^random_positive\(\s*(\d+)\s*(?:,\s*([0-9.eE+-]+)\s*)?\)$", spec)
    if m:
        rng = np.random.default_rng(int(m[1]))
        scale = float(m[2]) if m[2] else 1.0
        return grid.sine_profile().with_values(
            scale * rng.uniform(0.1, 1.0, grid.size) * grid.sine_profile().values)
    if spec.startswith("file:"):
        try:
            vals = np.loadtxt(spec[5:], dtype=float).ravel()
        except OSError as exc:
            raise ConfigError(f"initial data: {exc}") from None
        if vals.size != grid.size:
            raise ConfigError(f"initial data file has {vals.size} values, grid has {grid.size} nodes")
        return GridFunction(grid, vals)
    raise ConfigError(f"initial data: unrecognized spec {spec!r}")


def make_weight(spec: str, grid: Grid, g: Nonlinearity) -> np.ndarray:
    """Nodal weight from ``ones``, ``const <c>``, ``[c*]g0``, ``[c*]ginf``,
    ``zero`` or ``file:<path>``."""
    spec = spec.strip()
    x = grid.coords
    if spec == "ones":
        return np.ones(grid.size)
    if spec == "zero":
        return np.zeros(grid.size)
    if spec.startswith("const"):
        return np.full(grid.size, _number("weight", spec[5:].strip()))
    m = re.match(r"^(?:([-+0-9.eE]+)\s*\*\s*)?(g0|ginf)$", spec)
    if m:
        base = g.g0(x) if m[2] == "g0" else g.ginf(x)
        return (float(m[1]) if m[1] else 1.0) * np.asarray(base, dtype=float)
    if spec.startswith("file:"):
        vals = np.loadtxt(spec[5:], dtype=float).ravel()
        if vals.size != grid.size:
            raise ConfigError(f"weight file has {vals.size} values, grid has {grid.size} nodes")
        return vals
    raise ConfigError(f"weight: unrecognized spec {spec!r}")


def make_schedule(spec: str, th: Thresholds) -> np.ndarray:
    """``geometric <count>`` (the default schedule) or an explicit comma list,
    whose entries may be symbolic lambda specs."""
    spec = spec.strip()
    if spec.startswith("geometric"):
        count = _number("schedule", spec[9:].strip() or "24", int)
        return default_schedule(th, count)
    return np.array([resolve_lambda(s, th) for s in spec.split(",") if s.strip()])


# reports and emission -------------------------------------------------------

@dataclass
class TrichotomyRow:
    regime: str
    lam: float
    outcome: str
    expected: str
    sup_norm: float = math.nan
    grad_p_seminorm: float = math.nan
    t_final: float = math.nan
    t_estimate: float | None = None
    distance: float | None = None  # sup-distance to the solved equilibrium
    passed: bool | None = None  # None: part not applicable


@dataclass
class TrichotomyReport:
    thresholds: Thresholds
    rows: list[TrichotomyRow]
    trajectories: dict = field(default_factory=dict, repr=False)

    def part_passed(self, part: str) -> bool | None:
        rows = [r for r in self.rows if r.regime.startswith(part)]
        if not rows or all(r.passed is None for r in rows):
            return None
        return all(bool(r.passed) for r in rows)

    @property
    def passed(self) -> bool:
        return all(self.part_passed(k) is not False for k in "abc")


TRAJECTORY_COLUMNS = ("t", "sup_norm", "grad_p_seminorm", "energy", "dt")
BRANCH_COLUMNS = ("lambda", "seminorm", "supnorm", "residual", "iterations")
REPORT_COLUMNS = ("regime", "lambda", "outcome", "expected", "sup_norm", "grad_p_seminorm", "t_final",
                  "t_estimate", "distance", "passed")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _table(record):
    if isinstance(record, TrajectoryRecord):
        return TRAJECTORY_COLUMNS, zip(record.t, record.sup_norm, record.grad_p_seminorm, record.energy, record.dt)
    if isinstance(record, BranchResult):
        return BRANCH_COLUMNS, ((s.lam, s.seminorm, s.supnorm, s.residual, s.iterations) for s in record.samples)
    if isinstance(record, TrichotomyReport):
        return REPORT_COLUMNS, ((r.regime, r.lam, r.outcome, r.expected, r.sup_norm, r.grad_p_seminorm, r.t_final,
                                 r.t_estimate, r.distance, "n/a" if r.passed is None else r.passed)
                                for r in record.rows)
    if isinstance(record, _Columns):
        return tuple(record), zip(*record.values())
    if dataclasses.is_dataclass(record):
        d = dataclasses.asdict(record)
        return tuple(d), [tuple(d.values())]
    if isinstance(record, dict):
        return tuple(record), [tuple(record.values())]
    raise TypeError(f"cannot emit {type(record).__name__} as CSV")


def emit_csv(record, path) -> Path:
    """Write ``record`` as a UTF-8 CSV with a header row.

    Floats are written with 17 significant digits so :func:`read_csv` gives
    them back bit-for-bit.
    """
    header, rows = _table(record)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> dict:
    """Columns of a CSV written by :func:`emit_csv`; numeric cells as floats."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                try:
                    cols[h].append(float(cell))
                except ValueError:
                    cols[h].append(cell)
    return cols


# orchestration --------------------------------------------------------------

def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except SolverError as exc:
        raise SolverError(f"[{name}] {exc.message}", exc.residual, exc.iterations) from exc


def _expect_row(regime, lam, expected, rec: TrajectoryRecord, p, e_lam=None):
    final = rec.final
    row = TrichotomyRow(regime, lam, rec.outcome, expected, rec.sup_norm[-1], rec.grad_p_seminorm[-1], rec.t[-1],
                        rec.t_estimate)
    if expected == DECAYED:
        row.passed = rec.outcome == DECAYED and seminorm_grad_p(final, p) < MATCH_TOL
    elif expected == CONVERGED:
        row.distance = norm_sup(final - e_lam)
        row.passed = rec.outcome == CONVERGED and row.distance < MATCH_TOL
    else:
        row.passed = rec.outcome == BLEW_UP and rec.t_estimate is not None and math.isfinite(rec.t_estimate)
    return row


def run_trichotomy(cfg: ExperimentConfig) -> TrichotomyReport:
    """Reproduce the three regimes below, between and above the thresholds.

    Part (a) runs at ``0.5 lambda_min``, part (b) at ``mid`` (or the
    configured lambda) and part (c) at ``1.5 lambda_max``; part (c) is not
    applicable when ``lambda_max`` is infinite. With ``seeds`` set, part (b)
    additionally starts from ``random_positive(seed)`` for each seed and all
    runs must reach the same equilibrium.
    """
    grid, g, p = cfg.grid(), cfg.nonlinearity(), cfg.p
    th = _stage("thresholds", thresholds, g, p, grid, cfg.solver)
    v0 = make_initial(cfg.v0, grid, th)
    report = TrichotomyReport(th, [])

    lam_a = 0.5 * th.lambda_min
    rec = _stage("a: evolve", evolve, v0, lam_a, g, p, cfg.step, cfg.solver, th)
    report.trajectories["a"] = rec
    report.rows.append(_expect_row("a", lam_a, DECAYED, rec, p))

    if cfg.lam is not None:
        lam_b = resolve_lambda(cfg.lam, th)
        if not th.lambda_min < lam_b < th.lambda_max:
            raise ConfigError(f"lambda override {lam_b:g} is outside (lambda_min, lambda_max)")
    elif th.finite_max:
        lam_b = th.mid
    else:
        lam_b = 2.0 * th.lambda_min
    e_lam = _stage("b: equilibrium", solve_equilibrium, lam_b, g, p, v0, cfg.solver).u
    starts = [("b", v0)] + [(f"b[seed={s}]", make_initial(f"random_positive({s})", grid)) for s in cfg.seeds]
    for label, start in starts:
        rec = _stage(f"{label}: evolve", evolve, start, lam_b, g, p, cfg.step, cfg.solver, th)
        report.trajectories[label] = rec
        report.rows.append(_expect_row(label, lam_b, CONVERGED, rec, p, e_lam))

    if th.finite_max:
        lam_c = 1.5 * th.lambda_max
        rec = _stage("c: evolve", evolve, v0, lam_c, g, p, cfg.step, cfg.solver, th)
        report.trajectories["c"] = rec
        report.rows.append(_expect_row("c", lam_c, BLEW_UP, rec, p))
    else:
        report.rows.append(TrichotomyRow("c", math.inf, "not_applicable", BLEW_UP))
    return report


def format_report(report: TrichotomyReport) -> str:
    th = report.thresholds
    lines = [f"lambda_min = {th.lambda_min:.10g}   lambda_max = {th.lambda_max:.10g}",
             f"{'regime':<12}{'lambda':>14}  {'outcome':<26}{'sup_norm':>12}{'t_estimate':>12}  result"]
    for r in report.rows:
        res = "n/a" if r.passed is None else ("PASS" if r.passed else "FAIL")
        te = "" if r.t_estimate is None else f"{r.t_estimate:.5g}"
        lines.append(f"{r.regime:<12}{r.lam:>14.8g}  {r.outcome:<26}{r.sup_norm:>12.4e}{te:>12}  {res}")
    lines.append("trichotomy: " + ("PASS" if report.passed else "FAIL"))
    return "\n".join(lines)


# subcommands ----------------------------------------------------------------

def cmd_eigen(cfg, out):
    grid, g = cfg.grid(), cfg.nonlinearity()
    rho = Weight(GridFunction(grid, make_weight(cfg.weight, grid, g)))
    r = principal_eigenvalue(rho, cfg.p, cfg.solver)
    print(f"mu0 = {r.mu0:.12g}  (residual {r.residual:.3e}, {r.iterations} iterations)")
    emit_csv({"mu0": r.mu0, "residual": r.residual, "iterations": r.iterations}, out / "eigen.csv")
    emit_csv(_nodal_table(grid, psi0=r.psi0.values), out / "eigenfunction.csv")
    return EXIT_PASS


class _Columns(dict):
    """Column-oriented table; one CSV row per index."""


def _nodal_table(grid: Grid, **values) -> _Columns:
    cols = _Columns({name: grid.coords[:, k] for k, name in enumerate("xy"[: grid.dim])})
    cols.update(values)
    return cols


def cmd_equilibrium(cfg, out):
    grid, g = cfg.grid(), cfg.nonlinearity()
    th = thresholds(g, cfg.p, grid, cfg.solver)
    lam = resolve_lambda(cfg.lam or "mid", th)
    r = solve_equilibrium(lam, g, cfg.p, make_initial(cfg.v0, grid, th), cfg.solver)
    print(f"lambda = {lam:.10g}: {r.classification}, sup-norm {norm_sup(r.u):.6g}, residual {r.residual:.3e}")
    emit_csv({"lambda": lam, "seminorm": seminorm_grad_p(r.u, cfg.p), "supnorm": norm_sup(r.u),
              "residual": r.residual, "iterations": r.iterations}, out / "equilibrium.csv")
    return EXIT_PASS


def cmd_branch(cfg, out):
    grid, g = cfg.grid(), cfg.nonlinearity()
    th = thresholds(g, cfg.p, grid, cfg.solver)
    res = trace_branch(g, cfg.p, grid, make_schedule(cfg.schedule, th), th, cfg.solver)
    for s in res.samples:
        print(f"lambda = {s.lam:.8g}  seminorm = {s.seminorm:.6g}  supnorm = {s.supnorm:.6g}")
    if res.escaped_at is not None:
        print(f"branch escaped at lambda = {res.escaped_at:.8g}")
    emit_csv(res, out / "branch.csv")
    return EXIT_PASS


def cmd_evolve(cfg, out):
    grid, g = cfg.grid(), cfg.nonlinearity()
    th = thresholds(g, cfg.p, grid, cfg.solver)
    lam = resolve_lambda(cfg.lam or "mid", th)
    rec = evolve(make_initial(cfg.v0, grid, th), lam, g, cfg.p, cfg.step, cfg.solver, th)
    extra = "" if rec.t_estimate is None else f" at t = {rec.t_estimate:.6g}"
    print(f"lambda = {lam:.10g}: {rec.outcome}{extra} after {len(rec.t) - 1} steps")
    emit_csv(rec, out / "trajectory.csv")
    return EXIT_PASS


def cmd_compare(cfg, out):
    grid, g = cfg.grid(), cfg.nonlinearity()
    th = thresholds(g, cfg.p, grid, cfg.solver)
    lam = resolve_lambda(cfg.lam or "mid", th)
    v0 = make_initial(cfg.v0, grid, th)
    w0 = make_initial(cfg.w0, grid, th)
    rep: ComparisonReport = compare_evolutions(v0, w0, make_weight(cfg.gamma, grid, g), lam, g, cfg.p, cfg.step,
                                               cfg.solver)
    tol = 10 * cfg.solver.tol_residual
    ok = rep.max_violation <= tol and rep.min_v >= -tol and rep.v_no_later
    print(f"max ordering violation {rep.max_violation:.3e}, min v {rep.min_v:.3e}, t = {rep.t_final:.6g}: "
          + ("PASS" if ok else "FAIL"))
    emit_csv(rep, out / "compare.csv")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_trichotomy(cfg, out):
    report = run_trichotomy(cfg)
    print(format_report(report))
    emit_csv(report, out / "trichotomy.csv")
    for label, rec in report.trajectories.items():
        emit_csv(rec, out / f"trichotomy_{re.sub(r'[^0-9A-Za-z]+', '_', label).strip('_')}.csv")
    return EXIT_PASS if report.passed else EXIT_FAIL


COMMANDS = {"eigen": cmd_eigen, "equilibrium": cmd_equilibrium, "branch": cmd_branch, "evolve": cmd_evolve,
            "compare": cmd_compare, "trichotomy": cmd_trichotomy}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plapflow", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", type=Path, help="key=value config file")
        for key in KEYS:
            sp.add_argument(f"--{key}", dest=f"opt_{key}", metavar="VALUE", default=None)
    return parser


def load_config(path: Path | None, overrides: dict) -> ExperimentConfig:
    text = ""
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    text += "".join(f"\n{k}={v}" for k, v in overrides.items())
    return parse_config(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg, cfg.output_dir())
    except (ConfigError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrityError as exc:
        print(f"integrity failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
