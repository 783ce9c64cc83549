"""Command-line front end.

    fsmcdr solve1d --config p.json [--M 40] [--N1s 0] [--method fccm] [--out DIR]
    fsmcdr solve2d --config p.json [--M 40] [--N 40] [--out DIR]
    fsmcdr green1d [--config g.json] [--out DIR]
    fsmcdr convergence1d --experiment 3c [--out DIR] [--jobs 2]
    fsmcdr convergence2d --experiment 4c [--out DIR]
    fsmcdr oracle-check --experiment 1a [--dim 1]

Exit status: 0 success, 1 solver failure, 2 bad configuration.
The output directory defaults to $FSM_OUT_DIR, then ./fsm_out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cdr2d, experiments
from .cdr1d import BoundaryCondition1D, SolverError, SupplementarySpec, solve_interval
from .series_core import DomainError, Polynomial, UnsupportedSourceError, source_from_dict

COMMANDS = ("solve1d", "solve2d", "green1d", "convergence1d", "convergence2d", "oracle-check")
EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2
PROFILE_SAMPLES = 1001


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    config: str | None = None
    out: str = "fsm_out"
    experiment: str | None = None
    overrides: dict = field(default_factory=dict)
    jobs: int = 1
    dim: int = 1
    grid: int = experiments.GRID_2D


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="fsmcdr", description="Fourier series solver for convection-diffusion-reaction problems")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="problem JSON file")
        p.add_argument("--out", help="output directory (default $FSM_OUT_DIR or ./fsm_out)")
        p.add_argument("--M", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--N1s", type=int)
        p.add_argument("--method", choices=("fccm", "cm"))
        p.add_argument("--experiment", help="experiment id, comma-separated ids, or all")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--dim", type=int, choices=(1, 2), default=1, help="oracle-check dimension")
        p.add_argument("--grid", type=int, default=experiments.GRID_2D, help="2D field export points per axis")
    return parser


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        build_parser().print_usage(sys.stderr)
        raise ConfigError("missing command")
    overrides = {k: getattr(ns, k) for k in ("M", "N", "N1s", "method") if getattr(ns, k) is not None}
    out = ns.out or os.environ.get("FSM_OUT_DIR") or "fsm_out"
    if ns.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    if ns.command in ("solve1d", "solve2d") and not ns.config:
        raise ConfigError(f"{ns.command} needs --config")
    if ns.command in ("convergence1d", "convergence2d", "oracle-check") and not ns.experiment:
        raise ConfigError(f"{ns.command} needs --experiment")
    return RunConfig(ns.command, ns.config, out, ns.experiment, overrides, ns.jobs, ns.dim, ns.grid)


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _require(d, *keys):
    missing = [k for k in keys if k not in d]
    if missing:
        raise ConfigError(f"config is missing {', '.join(missing)}")


# ---------------------------------------------------------------------------
# 1D solve


def _bc_1d(d):
    _require(d, "left", "right")
    try:
        return tuple(BoundaryCondition1D(side, d[side]["kind"], float(d[side]["value"]))
                     for side in ("left", "right"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad boundary condition: {exc}") from exc


def run_solve1d(cfg: RunConfig):
    d = _load_json(cfg.config)
    _require(d, "interval", "Pe", "Da", "bc", "source")
    d = {**d, **cfg.overrides}
    lo, hi = (float(v) for v in d["interval"])
    if not hi > lo:
        raise ConfigError("interval must satisfy lo < hi")
    try:
        f = source_from_dict(d["source"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad source: {exc}") from exc
    bcs = _bc_1d(d["bc"])
    M = int(d.get("M", 40))
    spec = SupplementarySpec(int(d.get("N1s", 0)))
    method = str(d.get("method", "fccm")).lower()
    sol = solve_interval(lo, hi, float(d["Pe"]), float(d["Da"]), f, bcs, M, spec, method)
    piece = sol.pieces[0]
    os.makedirs(cfg.out, exist_ok=True)
    x = np.linspace(lo, hi, PROFILE_SAMPLES)
    np.savetxt(os.path.join(cfg.out, "profile.csv"),
               np.column_stack([x, sol(x, 0), sol(x, 1), sol(x, 2)]), delimiter=",",
               header="x,phi,dphi,d2phi", comments="", fmt=experiments.FLOAT_FMT)
    doc = {
        "problem": d,
        "a": piece.a,
        "q0": piece.q0.to_dict(),
        "q1": piece.q1.tolist(),
        "supplementary": None if piece.supplementary is None else {
            "shift": piece.supplementary.shift, "coeffs": piece.supplementary.coeffs.tolist()},
        "interpolant": np.asarray(piece.fs_coeffs).tolist(),
        "diagnostics": experiments._jsonable(piece.diagnostics),
    }
    with open(os.path.join(cfg.out, "solution.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    print(f"solve1d: M={M} N1s={spec.N1s} method={method} -> {cfg.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# 2D solve


def _edge_data(spec, edge, p, ref_cache):
    kind = spec.get("type")
    if kind == "constant":
        return float(spec["value"])
    if kind == "polynomial":
        L = p.b if edge in ("left", "right") else p.a
        poly = Polynomial(tuple(spec["coeffs"]), L)
        return lambda t: poly.values(t, L)
    if kind == "reference":
        if "ref" not in ref_cache:
            ref_cache["ref"] = cdr2d.reference_solution(p)
        return ref_cache["ref"]
    raise ConfigError(f"unknown edge data type {kind!r} on {edge}")


def _bc_2d(d, p):
    _require(d, *cdr2d.EDGES)
    kinds, data, cache = {}, {}, {}
    for e in cdr2d.EDGES:
        item = d[e]
        kinds[e] = str(item.get("kind", "D")).upper()[:1]
        got = _edge_data(item.get("data", {"type": "constant", "value": 0.0}), e, p, cache)
        if isinstance(got, cdr2d.ReferenceField):
            data[e] = cdr2d._field_trace(p, got, e, kinds[e])
        else:
            data[e] = got
    try:
        return cdr2d.EdgeBcSpec(kinds, data)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _source_2d(d):
    if d is None or d.get("type", "zero") == "zero":
        return None
    if d["type"] == "constant":
        from .series_core import Constant2D
        return Constant2D(float(d["value"]))
    raise ConfigError(f"unsupported 2D source type {d['type']!r}")


def run_solve2d(cfg: RunConfig):
    d = _load_json(cfg.config)
    _require(d, "Pe", "Da", "bc")
    d = {**d, **{k: v for k, v in cfg.overrides.items() if k in ("M", "N")}}
    p = cdr2d.CdrParams2D(float(d["Pe"]), float(d["Da"]), float(d.get("theta", 0.0)),
                          float(d.get("a", 1.0)), float(d.get("b", 1.0)))
    bc = _bc_2d(d["bc"], p)
    M, N = int(d.get("M", 40)), int(d.get("N", d.get("M", 40)))
    sol = cdr2d.solve_2d(p, bc, M, N, _source_2d(d.get("source")))
    os.makedirs(cfg.out, exist_ok=True)
    n = cfg.grid
    X1, X2 = np.meshgrid(np.linspace(-p.a, p.a, n), np.linspace(-p.b, p.b, n), indexing="ij")
    cols = [X1.ravel(), X2.ravel()] + [sol(X1, X2, *k).ravel() for k in experiments.KEYS_2D]
    np.savetxt(os.path.join(cfg.out, "field.csv"), np.column_stack(cols), delimiter=",",
               header="x1,x2,phi,dphi_dx1,dphi_dx2", comments="", fmt=experiments.FLOAT_FMT)
    with open(os.path.join(cfg.out, "solution.json"), "w") as fh:
        json.dump(experiments._jsonable({"problem": d, **sol.to_dict()}), fh, indent=2)
    print(f"solve2d: M={M} N={N} pattern={bc.pattern} rank={sol.diagnostics['rank']} -> {cfg.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment suites


def _ids(spec, table):
    if spec == "all":
        return list(table)
    ids = [s.strip() for s in spec.split(",") if s.strip()]
    unknown = [i for i in ids if i not in table]
    if unknown:
        raise ConfigError(f"unknown experiment id(s) {unknown}; choose from {sorted(table)}")
    return ids


def _m_sequence(cfg):
    M = cfg.overrides.get("M")
    seq = [m for m in experiments.M_SEQUENCE if M is None or m <= M]
    if not seq:
        raise ConfigError("--M is below the smallest sequence value")
    return seq


def _convergence1d_job(args):
    exp_id, Ms, out = args
    curve = experiments.run_convergence_1d(exp_id, Ms)
    return experiments.write_curve(out, curve)


def _convergence2d_job(args):
    exp_id, Ms, ratio, out = args
    curve, fields = experiments.run_experiments_2d(exp_id, Ms, n_ratio=ratio)
    return experiments.write_2d(out, curve, fields)


def _map(cfg, fn, jobs):
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_convergence1d(cfg: RunConfig):
    ids = _ids(cfg.experiment, experiments.EXPERIMENTS_1D)
    Ms = _m_sequence(cfg)
    for path in _map(cfg, _convergence1d_job, [(i, Ms, cfg.out) for i in ids]):
        print(f"wrote {path}")
    return EXIT_OK


def run_convergence2d(cfg: RunConfig):
    ids = _ids(cfg.experiment, experiments.EXPERIMENTS_2D)
    Ms = _m_sequence(cfg)
    ratio = 1.0
    if "N" in cfg.overrides and "M" in cfg.overrides:
        ratio = cfg.overrides["N"] / cfg.overrides["M"]
    for path in _map(cfg, _convergence2d_job, [(i, Ms, ratio, cfg.out) for i in ids]):
        print(f"wrote {path}")
    return EXIT_OK


def run_green1d(cfg: RunConfig):
    runs = []
    if cfg.config:
        d = _load_json(cfg.config)
        _require(d, "Pe", "Da")
        schemes = [d["scheme"]] if "scheme" in d else ["whole", "subinterval"]
        runs = [(float(d["Pe"]), float(d["Da"]), s, d.get("knobs")) for s in schemes]
    else:
        runs = [(Pe, Da, s, None) for Pe, Da in experiments.PARAMETER_SETS
                for s in ("whole", "subinterval")]
    for Pe, Da, scheme, knobs in runs:
        if scheme not in ("whole", "subinterval"):
            raise ConfigError(f"unknown scheme {scheme!r}")
        fam = experiments.run_green_1d(Pe, Da, scheme, knobs)
        print(f"wrote {experiments.write_green(cfg.out, fam)}")
    return EXIT_OK


def run_oracle_check(cfg: RunConfig):
    table = experiments.EXPERIMENTS_1D if cfg.dim == 1 else experiments.EXPERIMENTS_2D
    check = experiments.oracle_check_1d if cfg.dim == 1 else experiments.oracle_check_2d
    M = cfg.overrides.get("M", 40)
    status = EXIT_OK
    for i in _ids(cfg.experiment, table):
        r = check(i, M=M)
        verdict = "ok" if r.ok else "DISAGREE"
        print(f"oracle-check {cfg.dim}D {i}: FSM(M={M}) vs FD({r.nodes} nodes) "
              f"interior disagreement {r.disagreement:.3e} (tolerance {r.tolerance:.0e}) {verdict}")
        if not r.ok:
            status = EXIT_SOLVER
    return status


DISPATCH = {
    "solve1d": run_solve1d,
    "solve2d": run_solve2d,
    "green1d": run_green1d,
    "convergence1d": run_convergence1d,
    "convergence2d": run_convergence2d,
    "oracle-check": run_oracle_check,
}


def dispatch(cfg: RunConfig) -> int:
    try:
        return DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, UnsupportedSourceError, DomainError) as exc:
        diag = getattr(exc, "diagnostics", {})
        print(f"solver error: {exc} {json.dumps(experiments._jsonable(diag))}", file=sys.stderr)
        return EXIT_SOLVER
    except (KeyError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
