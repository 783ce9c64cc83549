"""Error metrics and the convergence / quasi-Green experiment suites.

Error values are relative: a per-region reduction of |sol - ref| divided
by max|ref| over the whole sample set (absolute when that is below 1e-14).
The default reduction is the mean over the region; ``norm="max"`` gives
the worst-case variant.

Every runner writes ``<outdir>/<id>/curve.csv`` next to a ``meta.json``;
2D runs add field grids under ``<outdir>/<id>/fields/``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cdr2d, verify
from .cdr1d import (
    BoundaryCondition1D,
    CdrParams1D,
    MultiDomainSpec,
    SupplementarySpec,
    assemble_and_solve,
    dirichlet,
    solve_interval,
    solve_multidomain,
)
from .series_core import DiracDelta, Polynomial, RectPulse

M_SEQUENCE = (2, 3, 5, 10, 20, 30, 40)
SAMPLES_1D = 10001
GRID_2D = 101
NORMALIZER_FLOOR = 1e-14
FLOAT_FMT = "%.17g"

# cubic test source, coefficients of (x/a)^j
CUBIC = Polynomial((1e3, 2e3, 5e3, 1e4))
LINEAR = Polynomial((1e3, 2e3))
CONSTANT = Polynomial((1e3,))
HALF_LENGTH_1D = 0.5
PARAMETER_SETS = ((3.0, 90.0), (1.0, 30.0), (30.0, 1.0), (200.0, -1.0))
KEYS_1D = (0, 1, 2)
KEYS_2D = ((0, 0), (1, 0), (0, 1))


# ---------------------------------------------------------------------------
# Metrics


def _reduce(values, norm):
    if values.size == 0:
        return 0.0
    if norm == "mean":
        return float(np.mean(values))
    if norm == "max":
        return float(np.max(values))
    raise ValueError(f"unknown norm {norm!r}")


def relative_error(sol, ref, region=None, norm="mean"):
    """Reduction of |sol - ref| over ``region`` divided by max|ref| over all samples."""
    sol = np.asarray(sol, dtype=float)
    ref = np.asarray(ref, dtype=float)
    diff = np.abs(sol - ref)
    scale = float(np.max(np.abs(ref), initial=0.0))
    if region is not None:
        diff = diff[region]
    e = _reduce(diff.ravel(), norm)
    return e / scale if scale >= NORMALIZER_FLOOR else e


@dataclass(frozen=True)
class ErrorReport:
    """Errors per derivative key, for each region."""

    overall: dict
    internal: dict
    boundary: dict
    corner: dict = field(default_factory=dict)

    def regions(self):
        out = {"overall": self.overall, "internal": self.internal, "boundary": self.boundary}
        if self.corner:
            out["corner"] = self.corner
        return out

    def columns(self):
        names = []
        for region, vals in self.regions().items():
            for k in vals:
                names.append(f"{region}_{_key_name(k)}")
        return names

    def values(self):
        return [v for vals in self.regions().values() for v in vals.values()]


def _key_name(k):
    if isinstance(k, tuple):
        return "k" + "".join(str(v) for v in k)
    return f"k{k}"


def measure_errors_1d(sol, reference, a=None, sampling=SAMPLES_1D, norm="mean", lo=None, hi=None):
    """1D report on ``sampling`` uniform points; boundary = the two end points."""
    if lo is None:
        a = a if a is not None else sol.a
        lo, hi = -a, a
    x = np.linspace(lo, hi, sampling)
    inner = np.zeros(x.size, dtype=bool)
    inner[1:-1] = True
    ends = ~inner
    overall, internal, boundary = {}, {}, {}
    for k in KEYS_1D:
        s, r = sol(x, k), reference(x, k)
        overall[k] = relative_error(s, r, None, norm)
        internal[k] = relative_error(s, r, inner, norm)
        boundary[k] = relative_error(s, r, ends, norm)
    return ErrorReport(overall, internal, boundary)


def region_masks_2d(a, b, n1=GRID_2D, n2=None):
    n2 = n2 or n1
    x1 = np.linspace(-a, a, n1)
    x2 = np.linspace(-b, b, n2)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    tol = 1e-12
    internal = (np.abs(X1) <= a * (1 - 1 / 100) + tol * a) & (np.abs(X2) <= b * (1 - 1 / 100) + tol * b)
    on1 = np.isclose(np.abs(X1), a)
    on2 = np.isclose(np.abs(X2), b)
    corner = on1 & on2
    boundary = (on1 | on2) & ~corner
    return X1, X2, internal, boundary, corner


def measure_errors_2d(sol, reference, a, b, grid=GRID_2D, norm="mean"):
    X1, X2, internal, boundary, corner = region_masks_2d(a, b, grid)
    out = {"overall": {}, "internal": {}, "boundary": {}, "corner": {}}
    for k in KEYS_2D:
        s, r = sol(X1, X2, *k), reference(X1, X2, *k)
        out["overall"][k] = relative_error(s, r, None, norm)
        out["internal"][k] = relative_error(s, r, internal, norm)
        out["boundary"][k] = relative_error(s, r, boundary, norm)
        out["corner"][k] = relative_error(s, r, corner, norm)
    return ErrorReport(**out)


# ---------------------------------------------------------------------------
# Curves and output


@dataclass
class ConvergenceCurve:
    id: str
    config: dict
    Ms: list
    Ns: list
    reports: list
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.Ms, self.Ms[1:])):
            raise ValueError("M sequence must be strictly increasing")

    def columns(self):
        return ["M", "N"] + (self.reports[0].columns() if self.reports else [])

    def table(self):
        return np.array([[M, N] + r.values() for M, N, r in zip(self.Ms, self.Ns, self.reports)])

    def series(self, region, k):
        return np.array([r.regions()[region][k] for r in self.reports])

    def to_csv(self, path):
        np.savetxt(path, self.table(), delimiter=",", header=",".join(self.columns()),
                   comments="", fmt=FLOAT_FMT)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_curve(outdir, curve: ConvergenceCurve, extra=None):
    path = os.path.join(outdir, curve.id)
    os.makedirs(path, exist_ok=True)
    curve.to_csv(os.path.join(path, "curve.csv"))
    meta = {"id": curve.id, "config": curve.config, "diagnostics": curve.diagnostics}
    if extra:
        meta.update(extra)
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
    return path


# ---------------------------------------------------------------------------
# 1D convergence experiments


@dataclass(frozen=True)
class Experiment1D:
    id: str
    Pe: float
    Da: float
    N1s: int = 0
    method: str = "fccm"
    bc: str = "DD"
    a: float = HALF_LENGTH_1D

    def bcs(self):
        if self.bc == "DD":
            return dirichlet(1.0, 0.0)
        if self.bc == "DN":
            return (BoundaryCondition1D("left", "D", 1.0), BoundaryCondition1D("right", "N", 1.0))
        raise ValueError(f"unknown boundary pattern {self.bc!r}")

    @property
    def params(self):
        return CdrParams1D(self.Pe, self.Da, self.a)


EXPERIMENTS_1D = {
    "1a": Experiment1D("1a", 3.0, 90.0),
    "1b": Experiment1D("1b", 3.0, 90.0, method="cm"),
    "2a": Experiment1D("2a", 3.0, 90.0),
    "2b": Experiment1D("2b", 3.0, 90.0, N1s=1),
    "2c": Experiment1D("2c", 3.0, 90.0, N1s=2),
    "3a": Experiment1D("3a", 3.0, 90.0),
    "3b": Experiment1D("3b", 1.0, 30.0),
    "3c": Experiment1D("3c", 30.0, 1.0),
    "3d": Experiment1D("3d", 200.0, -1.0),
    "4a": Experiment1D("4a", 3.0, 90.0),
    "4b": Experiment1D("4b", 3.0, 90.0, bc="DN"),
}


def experiment_1d(exp) -> Experiment1D:
    if isinstance(exp, Experiment1D):
        return exp
    try:
        return EXPERIMENTS_1D[str(exp)]
    except KeyError:
        raise ValueError(f"unknown 1D experiment {exp!r}; choose from {sorted(EXPERIMENTS_1D)}") from None


def exact_reference_1d(exp: Experiment1D, source=CUBIC):
    """Closed-form solution via the full-degree supplementary polynomial (q0 vanishes)."""
    return assemble_and_solve(exp.params, source, SupplementarySpec(source.degree), exp.bcs(), 1)


def run_convergence_1d(exp, Ms=M_SEQUENCE, source=CUBIC, sampling=SAMPLES_1D, norm="mean"):
    exp = experiment_1d(exp)
    ref = exact_reference_1d(exp, source)
    reports, diags = [], []
    for M in Ms:
        sol = assemble_and_solve(exp.params, source, SupplementarySpec(exp.N1s), exp.bcs(), M, exp.method)
        reports.append(measure_errors_1d(sol, ref, exp.a, sampling, norm))
        diags.append({"M": M, "q0_norm": sol.q0.norm(), **_scalar_diag(sol.diagnostics)})
    config = {**asdict(exp), "source": source.to_dict(), "norm": norm, "sampling": sampling}
    return ConvergenceCurve(exp.id, config, list(Ms), [0] * len(Ms), reports, diags)


def _scalar_diag(d):
    return {k: v for k, v in d.items() if isinstance(v, (int, float, str, bool))}


def accuracy_table_1d(source=LINEAR, M=40, norm="mean", sampling=SAMPLES_1D):
    """Overall errors of phi, phi', phi'' for the four parameter sets (N1s = 0, FCCM, DD)."""
    rows = {}
    for Pe, Da in PARAMETER_SETS:
        exp = Experiment1D("acc", Pe, Da)
        ref = exact_reference_1d(exp, source)
        sol = assemble_and_solve(exp.params, source, SupplementarySpec(0), exp.bcs(), M)
        rows[(Pe, Da)] = measure_errors_1d(sol, ref, exp.a, sampling, norm).overall
    return rows


# ---------------------------------------------------------------------------
# Quasi-Green problem


GREEN_INTERVAL = (0.0, 1.0)
GREEN_X0 = 0.5
GREEN_STRENGTH = 1000.0
GREEN_M = (10, 40, 160, 640)
GREEN_A2 = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass
class GreenFamily:
    Pe: float
    Da: float
    scheme: str
    knobs: list
    x: np.ndarray
    phi: list
    dphi: list
    diagnostics: list = field(default_factory=list)

    def to_csv(self, path):
        cols = [self.x] + list(self.phi) + list(self.dphi)
        header = ["x"] + [f"phi_{k:g}" for k in self.knobs] + [f"dphi_{k:g}" for k in self.knobs]
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(header),
                   comments="", fmt=FLOAT_FMT)


def green_whole(Pe, Da, M):
    lo, hi = GREEN_INTERVAL
    return solve_interval(lo, hi, Pe, Da, DiracDelta(GREEN_X0, GREEN_STRENGTH), dirichlet(1.0, 0.0), M,
                          SupplementarySpec(0), "fccm")


def green_subinterval(Pe, Da, a2, M=10):
    lo, hi = GREEN_INTERVAL
    bp = (lo, GREEN_X0 - a2, GREEN_X0 + a2, hi)
    md = MultiDomainSpec.uniform(bp, Pe, Da, N1s=1, M=M)
    return solve_multidomain(md, RectPulse(GREEN_X0, a2, GREEN_STRENGTH), dirichlet(1.0, 0.0))


def flux_jump(sol, a2):
    """phi' just right of the pulse minus phi' just left of it."""
    return float(sol.one_sided(2, GREEN_X0 + a2, 1) - sol.one_sided(0, GREEN_X0 - a2, 1))


def run_green_1d(Pe, Da, scheme="whole", knobs=None, samples=2001):
    lo, hi = GREEN_INTERVAL
    x = np.linspace(lo, hi, samples)
    phi, dphi, diags = [], [], []
    if scheme == "whole":
        knobs = list(knobs or GREEN_M)
        for M in knobs:
            sol = green_whole(Pe, Da, M)
            phi.append(sol(x, 0))
            dphi.append(sol(x, 1))
            diags.append({"M": M, **_scalar_diag(sol.diagnostics)})
    elif scheme == "subinterval":
        knobs = list(knobs or GREEN_A2)
        for a2 in knobs:
            sol = green_subinterval(Pe, Da, a2)
            phi.append(sol(x, 0))
            dphi.append(sol(x, 1))
            diags.append({"a2": a2, "flux_jump": flux_jump(sol, a2),
                          **_scalar_diag(sol.diagnostics)})
    else:
        raise ValueError("scheme must be 'whole' or 'subinterval'")
    return GreenFamily(Pe, Da, scheme, knobs, x, phi, dphi, diags)


def write_green(outdir, fam: GreenFamily, run_id=None):
    run_id = run_id or f"green_{fam.scheme}_Pe{fam.Pe:g}_Da{fam.Da:g}"
    path = os.path.join(outdir, run_id)
    os.makedirs(path, exist_ok=True)
    fam.to_csv(os.path.join(path, "profiles.csv"))
    meta = {"Pe": fam.Pe, "Da": fam.Da, "scheme": fam.scheme, "knobs": fam.knobs,
            "diagnostics": fam.diagnostics}
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(_jsonable(meta), fh, indent=2, sort_keys=True)
    return path


# ---------------------------------------------------------------------------
# 2D experiments


@dataclass(frozen=True)
class Experiment2D:
    id: str
    Pe: float = 3.0
    Da: float = 90.0
    theta: float = math.pi / 3
    ratio: float = 1.0  # a / b with a = 1
    pattern: str = "DDDD"

    @property
    def params(self):
        return cdr2d.CdrParams2D(self.Pe, self.Da, self.theta, 1.0, 1.0 / self.ratio)


EXPERIMENTS_2D = {
    "1a": Experiment2D("1a"),
    "1b": Experiment2D("1b", 1.0, 30.0),
    "1c": Experiment2D("1c", 30.0, 1.0),
    "1d": Experiment2D("1d", 200.0, -1.0),
    "2a": Experiment2D("2a"),
    "2b": Experiment2D("2b", theta=math.pi / 4),
    "2c": Experiment2D("2c", theta=math.pi / 6),
    "2d": Experiment2D("2d", theta=0.0),
    "3a": Experiment2D("3a"),
    "3b": Experiment2D("3b", ratio=0.67),
    "3c": Experiment2D("3c", ratio=0.5),
    "3d": Experiment2D("3d", ratio=1.25),
    "3e": Experiment2D("3e", ratio=2.0),
    "4a": Experiment2D("4a"),
    "4b": Experiment2D("4b", pattern="DDND"),
    "4c": Experiment2D("4c", pattern="DNND"),
}


def experiment_2d(exp) -> Experiment2D:
    if isinstance(exp, Experiment2D):
        return exp
    try:
        return EXPERIMENTS_2D[str(exp)]
    except KeyError:
        raise ValueError(f"unknown 2D experiment {exp!r}; choose from {sorted(EXPERIMENTS_2D)}") from None


def reference_problem_2d(exp: Experiment2D):
    p = exp.params
    ref = cdr2d.reference_solution(p)
    return p, ref, cdr2d.EdgeBcSpec.from_field(exp.pattern, p, ref)


def run_experiments_2d(exp, Ms=M_SEQUENCE, n_ratio=1.0, grid=GRID_2D, norm="mean",
                       field_M=40, field_grid=GRID_2D):
    """Inverse validation: solve with the reference traces and measure against the reference."""
    exp = experiment_2d(exp)
    p, ref, bc = reference_problem_2d(exp)
    Ns = [max(1, int(round(n_ratio * M))) for M in Ms]
    reports, diags, fields = [], [], None
    for M, N in zip(Ms, Ns):
        sol = cdr2d.solve_2d(p, bc, M, N)
        reports.append(measure_errors_2d(sol, ref, p.a, p.b, grid, norm))
        diags.append({"M": M, "N": N, **_scalar_diag(sol.diagnostics)})
        if M == field_M:
            fields = field_grids(sol, ref, p, field_grid)
    config = {**asdict(exp), "a": p.a, "b": p.b, "n_ratio": n_ratio, "norm": norm, "grid": grid}
    curve = ConvergenceCurve(exp.id, config, list(Ms), Ns, reports, diags)
    return curve, fields


def field_grids(sol, ref, p, n=GRID_2D):
    X1, X2 = np.meshgrid(np.linspace(-p.a, p.a, n), np.linspace(-p.b, p.b, n), indexing="ij")
    out = {}
    for name, fn in (("fsm", sol), ("reference", ref)):
        out[name] = np.column_stack([X1.ravel(), X2.ravel()] + [fn(X1, X2, *k).ravel() for k in KEYS_2D])
    return out


def write_2d(outdir, curve, fields):
    path = write_curve(outdir, curve)
    if fields:
        fdir = os.path.join(path, "fields")
        os.makedirs(fdir, exist_ok=True)
        for name, arr in fields.items():
            np.savetxt(os.path.join(fdir, f"{name}.csv"), arr, delimiter=",",
                       header="x1,x2,phi,dphi_dx1,dphi_dx2", comments="", fmt=FLOAT_FMT)
    return path


# ---------------------------------------------------------------------------
# Oracle cross-checks


@dataclass(frozen=True)
class OracleReport:
    id: str
    dim: int
    disagreement: float
    tolerance: float
    nodes: int

    @property
    def ok(self) -> bool:
        return self.disagreement <= self.tolerance


def oracle_check_1d(exp, M=40, nodes=20001, norm="mean", tolerance=1e-3) -> OracleReport:
    """FSM at M vs central differences, compared on the interior FD nodes."""
    exp = experiment_1d(exp)
    sol = assemble_and_solve(exp.params, CUBIC, SupplementarySpec(exp.N1s), exp.bcs(), M, exp.method)
    fd = verify.fd_solve_1d(exp.Pe, exp.Da, -exp.a, exp.a, CUBIC, exp.bcs(), nodes, a_frame=exp.a)
    inner = slice(1, -1)
    d = relative_error(sol(fd.x[inner]), fd.values[inner], None, norm)
    return OracleReport(exp.id, 1, d, tolerance, nodes)


def oracle_check_2d(exp, M=40, nodes=401, norm="mean", tolerance=5e-3) -> OracleReport:
    exp = experiment_2d(exp)
    p, ref, bc = reference_problem_2d(exp)
    sol = cdr2d.solve_2d(p, bc, M, M)
    fd = verify.fd_solve_2d(p.Pe1, p.Pe2, p.reaction, p.a, p.b, None, bc.as_fd_bc(), nodes)
    X1, X2 = np.meshgrid(fd.x[1:-1], fd.x2[1:-1], indexing="ij")
    d = relative_error(sol(X1, X2), fd.values[1:-1, 1:-1], None, norm)
    return OracleReport(exp.id, 2, d, tolerance, nodes)
