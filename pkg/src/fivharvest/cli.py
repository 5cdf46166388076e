"""Command-line front end: every subcommand writes one CSV table."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from fivharvest import dynamics, model, response, statics
from fivharvest.config import KEYS, ConfigError, RunConfig, build_config, parse_config
from fivharvest.tables import CsvTable, write_csv

log = logging.getLogger("fivharvest")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=Path, help="key = value run configuration")
    sp.add_argument("--out", help="output directory (default: config 'out' or .)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key; repeatable",
    )


def _grid(sp, lo, hi, n, name="x"):
    sp.add_argument(f"--{name}-min", type=float, default=lo)
    sp.add_argument(f"--{name}-max", type=float, default=hi)
    sp.add_argument("--n", type=int, default=n, help="number of samples")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fivharvest", description="Friction-driven multistable harvester toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("force", help="restoring force and stiffness on an X grid")
    _common(sp)
    _grid(sp, -2.0, 2.0, 401)

    sp = sub.add_parser("friction", help="friction law on a relative-velocity grid")
    _common(sp)
    _grid(sp, -1.0, 1.0, 401, name="vr")

    sp = sub.add_parser("potential", help="potential energy on an X grid")
    _common(sp)
    _grid(sp, -2.0, 2.0, 401)

    sp = sub.add_parser("equilibria", help="equilibria with stability and stiffness")
    _common(sp)
    sp.add_argument("--x-max", type=float, default=3.0)

    sp = sub.add_parser("classify", help="print the well topology label")
    _common(sp)

    sp = sub.add_parser("bifurcation", help="pitchfork and fold sets in (alpha, beta)")
    _common(sp)
    sp.add_argument("--resolution", type=int, default=64)

    sp = sub.add_parser("codim2", help="limit-cycle region labels on a (value, xi) grid")
    _common(sp)
    sp.add_argument("--plane", choices=("A1", "beta"), default="A1")
    sp.add_argument("--value-min", type=float, default=-1.0)
    sp.add_argument("--value-max", type=float, default=1.0)
    sp.add_argument("--xi-min", type=float, default=-1.0)
    sp.add_argument("--xi-max", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=41)

    sp = sub.add_parser("simulate", help="time series from the configured initial state")
    _common(sp)
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--dt", type=float)

    sp = sub.add_parser("cycles", help="distinct limit cycles over a 5x5 start grid")
    _common(sp)
    sp.add_argument("--t-settle", type=float, default=300.0)
    sp.add_argument("--t-observe", type=float, default=100.0)
    sp.add_argument("--dt", type=float)

    sp = sub.add_parser("amplitude", help="harmonic-balance amplitude-frequency points")
    _common(sp)
    sp.add_argument("--omega-min", type=float)
    sp.add_argument("--omega-max", type=float)
    sp.add_argument("--grid", type=int)
    sp.add_argument("--hb-mode", choices=("verbatim", "corrected"))
    sp.add_argument("--source", choices=("RealPart", "ImagPart", "both"))

    sp = sub.add_parser("sweep", help="steady electrical outputs versus one parameter")
    _common(sp)
    sp.add_argument("--vary", choices=response.SWEEPABLE)
    sp.add_argument("--from", dest="lo", type=float)
    sp.add_argument("--to", dest="hi", type=float)
    sp.add_argument("--steps", type=int)

    sp = sub.add_parser("portrait", help="Hamiltonian on an (X, V) grid")
    _common(sp)
    sp.add_argument("--x-lim", type=float, default=2.0)
    sp.add_argument("--v-lim", type=float, default=1.5)
    sp.add_argument("--n", type=int, default=101)
    return parser


def load_config(args) -> RunConfig:
    values: dict[str, tuple[int, str]] = {}
    base = RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        try:
            base = parse_config(text)
        except ConfigError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = (0, value.strip())
    flag_map = {
        "alpha": "alpha",
        "beta": "beta",
        "out": "out",
        "t_end": "t_end",
        "dt": "dt",
        "omega_min": "omega_min",
        "omega_max": "omega_max",
        "grid": "grid",
        "hb_mode": "hb_mode",
        "source": "source",
        "vary": "vary",
        "lo": "from",
        "hi": "to",
        "steps": "steps",
    }
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = (0, repr(v) if isinstance(v, float) else str(v))
    for key in values:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
    return build_config(values, base)


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out_dir) / f"{name}.csv"


def _linspace(lo, hi, n):
    if n < 2 or not lo < hi:
        raise ConfigError("grid needs n >= 2 and min < max")
    return np.linspace(lo, hi, n)


def cmd_force(args, cfg):
    p = cfg.params
    t = CsvTable("force")
    X = _linspace(args.x_min, args.x_max, args.n)
    F = model.restoring_force(X, p.alpha, p.beta)
    K = model.restoring_stiffness(X, p.alpha, p.beta)
    for row in zip(X, F, K):
        t.append(*row)
    return t


def cmd_friction(args, cfg):
    p = cfg.params
    t = CsvTable("friction")
    for vr in _linspace(args.vr_min, args.vr_max, args.n):
        fv = model.stribeck_friction(float(vr), p.mu, p.xi, p.eta)
        lo, hi = (fv.lo, fv.hi) if fv.is_set_valued else (fv.value, fv.value)
        t.append(float(vr), lo, hi)
    return t


def cmd_potential(args, cfg):
    p = cfg.params
    t = CsvTable("potential")
    X = _linspace(args.x_min, args.x_max, args.n)
    for row in zip(X, model.potential_energy(X, p.alpha, p.beta)):
        t.append(*row)
    return t


def cmd_equilibria(args, cfg):
    p = cfg.params
    t = CsvTable("equilibria")
    for e in statics.find_equilibria(p.alpha, p.beta, args.x_max):
        t.append(e.X_star, e.stability.value, e.local_stiffness)
    return t


def cmd_classify(args, cfg):
    topo = statics.classify_wells(cfg.params.alpha, cfg.params.beta)
    print(topo.label.value)
    return None


def cmd_bifurcation(args, cfg):
    t = CsvTable("bifurcation")
    for curve in statics.trace_geometric_bifurcation_sets(args.resolution):
        for a, b in curve.points:
            t.append(curve.name, a, b)
    return t


def cmd_codim2(args, cfg):
    p = cfg.params
    t = CsvTable("codim2")
    values = _linspace(args.value_min, args.value_max, args.n)
    if args.plane == "beta" and values.min() <= 0:
        raise ConfigError("beta plane needs --value-min > 0")
    for v in values:
        for xi in _linspace(args.xi_min, args.xi_max, args.n):
            region = statics.codim2_region(float(v), float(xi), args.plane, alpha=p.alpha, eta=p.eta)
            t.append(float(v), float(xi), region)
    return t


def cmd_simulate(args, cfg):
    p = cfg.params
    traj = dynamics.integrate(p, cfg.sim.initial, cfg.sim.T_end, cfg.sim.dt)
    U, P = response.electrical_outputs(traj, p.xi_q)
    t = CsvTable("timeseries")
    for i in range(len(traj)):
        X, V, Q, I = traj.y[i]
        t.append(traj.t[i], X, V, Q, I, int(traj.mode[i]), U[i], P[i])
    return t


def cmd_cycles(args, cfg):
    dt = cfg.sim.dt if args.dt is None else args.dt
    found = dynamics.detect_limit_cycles(cfg.params, T_settle=args.t_settle, T_observe=args.t_observe, dt=dt)
    for start, why in found.excluded:
        log.warning("start %s excluded: %s", start, why)
    t = CsvTable("cycles")
    for k, c in enumerate(found.cycles):
        t.append(k, c.period, c.amplitude, c.mean_X, c.X_min, c.X_max, c.stick_fraction)
    return t


def cmd_amplitude(args, cfg):
    a = cfg.amplitude
    sources = ("RealPart", "ImagPart") if a.source == "both" else (a.source,)
    t = CsvTable("amplitude")
    for src in sources:
        curve = response.amplitude_curve(
            cfg.params,
            Omega_range=(a.omega_min, a.omega_max),
            grid_n=a.grid,
            source=src,
            mode=a.mode,
            A_max=a.A_max,
        )
        for Om, A, b in curve.points:
            t.append(Om, int(b), A, src)
    return t


def cmd_sweep(args, cfg):
    s = cfg.sweep
    sim = response.SimConfig(T_end=cfg.sim.T_end, dt=cfg.sim.dt, window=cfg.sim.T_end / 4)
    cases = {c: response.CASES[c] for c in s.cases}
    results = response.sweep(cfg.params, s.varied, (s.lo, s.hi), s.steps, cases, sim)
    t = CsvTable("sweep")
    for res in results:
        for row in res.rows:
            st = row.stats
            vals = (st.Q_rms, st.I_rms, st.U_rms, st.P_avg) if st else (float("nan"),) * 4
            t.append(res.case, res.varied, row.value, *vals)
    return t


def cmd_portrait(args, cfg):
    p = cfg.params
    X, V, H = statics.portrait_grid(p.alpha, p.beta, args.x_lim, args.v_lim, args.n)
    t = CsvTable("portrait")
    for row in zip(X.ravel(), V.ravel(), H.ravel()):
        t.append(*row)
    return t


COMMANDS = {
    "force": cmd_force,
    "friction": cmd_friction,
    "potential": cmd_potential,
    "equilibria": cmd_equilibria,
    "classify": cmd_classify,
    "bifurcation": cmd_bifurcation,
    "codim2": cmd_codim2,
    "simulate": cmd_simulate,
    "cycles": cmd_cycles,
    "amplitude": cmd_amplitude,
    "sweep": cmd_sweep,
    "portrait": cmd_portrait,
}
_OUTPUT_NAME = {"simulate": "timeseries"}


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except (ConfigError, model.ParameterError) as exc:
        print(f"fivharvest {args.command}: {exc}", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            table = COMMANDS[args.command](args, cfg)
        if table is not None:
            path = write_csv(table, _out(cfg, _OUTPUT_NAME.get(args.command, args.command)))
            print(path)
    except (ConfigError, model.ParameterError) as exc:
        print(f"fivharvest {args.command}: {exc}", file=sys.stderr)
        return 2
    except (dynamics.SimulationError, ValueError, ArithmeticError, OSError) as exc:
        print(f"fivharvest {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())
