"""One-dimensional Fourier series multiscale solver.

Solves  Pe*phi' - phi'' - Pe*Da*phi = f  on [-a, a]  with one Dirichlet or
Neumann condition per end. The solution is phi0 + phi1 + phis: phi0 is a
truncated full-range Fourier series for the particular part and phi1
combines the two homogeneous solutions of the characteristic roots, while
phis is a polynomial solving the equation exactly for an interpolant of
the source.

The supplementary polynomial takes up the part of the source that does not
vanish at the interval ends, so the Fourier series only has to represent a
residual with f_p(+-a) = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .series_core import (
    DiracDelta,
    DomainError,
    Polynomial,
    RectPulse,
    Sampled,
    SourceModel,
    TrigSeries1D,
    UnsupportedSourceError,
    fourier_coeffs,
    mu,
    trig_derivatives,
)

COND_LIMIT = 1e12


class SolverError(RuntimeError):
    """Base class for solver failures; carries a diagnostics dict."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ResonantModeError(SolverError):
    pass


class SingularMeanModeError(SolverError):
    pass


class IllConditionedError(SolverError):
    pass


class IllPosedBoundaryError(SolverError):
    pass


# ---------------------------------------------------------------------------
# Parameters and characteristic roots


@dataclass(frozen=True)
class CdrParams1D:
    Pe: float
    Da: float
    a: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("half-length a must be positive")
        if not (math.isfinite(self.Pe) and math.isfinite(self.Da)):
            raise ValueError("Pe and Da must be finite")

    @property
    def reaction(self) -> float:
        return self.Pe * self.Da

    def apply(self, d0, d1, d2):
        """Operator applied to given value/derivative samples."""
        return self.Pe * d1 - d2 - self.reaction * d0


class Regime(enum.Enum):
    DISTINCT_REAL = "distinct_real"
    COMPLEX_PAIR = "complex_pair"
    DOUBLE_REAL = "double_real"


@dataclass(frozen=True)
class RootData:
    regime: Regime
    alpha10: float
    alpha20: float
    alpha30: float

    @property
    def eta1(self) -> complex:
        return complex(-self.alpha10 + self.alpha30, -self.alpha20)

    @property
    def eta2(self) -> complex:
        return complex(-self.alpha10 - self.alpha30, self.alpha20)


def classify_regime(p: CdrParams1D) -> RootData:
    """Characteristic roots of eta^2 - Pe*eta + Pe*Da = 0, by sign of the discriminant."""
    Pe = p.Pe
    disc = Pe * Pe - 4.0 * p.reaction
    alpha10 = -Pe / 2.0
    if abs(disc) <= 1e-12 * max(1.0, Pe * Pe):
        return RootData(Regime.DOUBLE_REAL, alpha10, 0.0, 0.0)
    if disc > 0:
        return RootData(Regime.DISTINCT_REAL, alpha10, 0.0, math.sqrt(disc) / 2.0)
    return RootData(Regime.COMPLEX_PAIR, alpha10, math.sqrt(-disc) / 2.0, 0.0)


# ---------------------------------------------------------------------------
# Homogeneous basis


@dataclass(frozen=True)
class _ExpMode:
    """exp(lam*(x - x_ref)) * g(x) / c, with g one of 1, x/a, sin(w x), sin(w (a - x))."""

    lam: float
    shape: str
    omega: float
    a: float
    x_ref: float
    c: float = 1.0

    def _g(self, x, k):
        a, w = self.a, self.omega
        if self.shape == "one":
            return np.ones_like(x) if k == 0 else np.zeros_like(x)
        if self.shape == "lin":
            return (x / a, np.full_like(x, 1.0 / a), np.zeros_like(x))[k]
        if self.shape == "sin":
            return (np.sin(w * x), w * np.cos(w * x), -w * w * np.sin(w * x))[k]
        if self.shape == "sinr":
            u = w * (a - x)
            return (np.sin(u), -w * np.cos(u), -w * w * np.sin(u))[k]
        raise ValueError(self.shape)

    def __call__(self, x, k=0):
        x = np.asarray(x, dtype=float)
        e = np.exp(self.lam * (x - self.x_ref))
        lam = self.lam
        g0 = self._g(x, 0)
        if k == 0:
            v = g0
        elif k == 1:
            v = lam * g0 + self._g(x, 1)
        elif k == 2:
            v = lam * lam * g0 + 2 * lam * self._g(x, 1) + self._g(x, 2)
        else:
            raise ValueError("derivative order above 2")
        return e * v / self.c

    def normalized(self):
        ends = np.abs(self(np.array([-self.a, self.a])))
        c = float(np.max(ends))
        if not c > 1e-300:
            # both end values vanish (e.g. sin(alpha20*a) = 0): use the interior peak
            c = float(np.max(np.abs(self(np.linspace(-self.a, self.a, 401)))))
        return replace(self, c=self.c * c)

    @property
    def log_scale(self) -> float:
        """log of the factor the raw table expression was divided by."""
        return math.log(self.c) + self.lam * self.x_ref


def _mode(lam, shape, a, omega=0.0):
    x_ref = math.copysign(a, lam) if lam != 0 else 0.0
    return _ExpMode(lam, shape, omega, a, x_ref).normalized()


@dataclass(frozen=True)
class HomogeneousBasis1D:
    params: CdrParams1D
    roots: RootData
    funcs: tuple

    def __call__(self, x, k=0):
        """Array of shape (2, *x.shape) with the k-th derivatives of p1, p2."""
        return np.stack([f(x, k) for f in self.funcs])

    @property
    def log_scales(self):
        return tuple(f.log_scale for f in self.funcs)


def homogeneous_basis(p: CdrParams1D) -> HomogeneousBasis1D:
    r = classify_regime(p)
    a = p.a
    lam = -r.alpha10
    if r.regime is Regime.DISTINCT_REAL:
        funcs = (_mode(lam - r.alpha30, "one", a), _mode(lam + r.alpha30, "one", a))
    elif r.regime is Regime.COMPLEX_PAIR:
        funcs = (_mode(lam, "sin", a, r.alpha20), _mode(lam, "sinr", a, r.alpha20))
    else:
        funcs = (_mode(lam, "one", a), _mode(lam, "lin", a))
    return HomogeneousBasis1D(p, r, funcs)


# ---------------------------------------------------------------------------
# Supplementary polynomial solution


@dataclass(frozen=True)
class SupplementarySpec:
    N1s: int = 0

    def __post_init__(self):
        if self.N1s < 0:
            raise ValueError("N1s must be non-negative")

    def nodes(self, a) -> np.ndarray:
        return np.linspace(-a, a, self.N1s + 1)


def supplementary_shift(p: CdrParams1D) -> int:
    """Monomial offset of the supplementary basis (x/a)^(j-1+shift)."""
    if p.Pe == 0:
        return 2
    if p.Da == 0:
        return 1
    return 0


def build_interpolant(f: SourceModel, spec: SupplementarySpec, a: float) -> np.ndarray:
    """Coefficients H_j of the interpolant f_s = sum_j H_j (x/a)^j through the uniform nodes."""
    if spec.N1s < 1:
        raise ValueError("interpolation needs N1s >= 1")
    if not f.pointwise:
        raise UnsupportedSourceError(f"{type(f).__name__} source cannot be interpolated")
    x = spec.nodes(a)
    R = np.vander(x / a, spec.N1s + 1, increasing=True)
    return scipy.linalg.solve(R, f.values(x, a))


def supplementary_matrix(p: CdrParams1D, degree: int) -> np.ndarray:
    """Upper-triangular matrix mapping supplementary coefficients to polynomial coefficients of L[phis]."""
    shift = supplementary_shift(p)
    n = degree + 1
    a = p.a
    R = np.zeros((n, n))
    for j in range(n):
        q = j + shift  # power of x/a held by column j
        if q < n:
            R[q, j] -= p.reaction
        if 1 <= q and q - 1 < n:
            R[q - 1, j] += q * p.Pe / a
        if 2 <= q and q - 2 < n:
            R[q - 2, j] -= q * (q - 1) / a**2
    return R


@dataclass(frozen=True)
class SupplementarySolution:
    a: float
    shift: int
    coeffs: np.ndarray  # G_j for (x/a)^(j + shift)

    @property
    def poly(self) -> np.ndarray:
        """Coefficients in powers of x/a."""
        return np.concatenate([np.zeros(self.shift), self.coeffs])

    def __call__(self, x, k=0):
        c = np.polynomial.polynomial.polyder(self.poly, k) / self.a**k if k else self.poly
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float) / self.a, c)


def build_supplementary(p: CdrParams1D, fs_coeffs) -> SupplementarySolution:
    """Polynomial phis with L[phis] = f_s identically (back substitution)."""
    fs_coeffs = np.asarray(fs_coeffs, dtype=float)
    R = supplementary_matrix(p, fs_coeffs.size - 1)
    G = scipy.linalg.solve_triangular(R, fs_coeffs, lower=False)
    return SupplementarySolution(p.a, supplementary_shift(p), G)


# ---------------------------------------------------------------------------
# Particular solution


def particular_fccm(p: CdrParams1D, fp: TrigSeries1D, M: int | None = None) -> TrigSeries1D:
    """Mode-by-mode Fourier coefficient comparison."""
    M = fp.M if M is None else M
    fc = np.zeros(M + 1)
    fsn = np.zeros(M + 1)
    k = min(M, fp.M)
    fc[: k + 1] = fp.cos_coeffs[: k + 1]
    fsn[1: k + 1] = fp.sin_coeffs[:k]
    PeDa = p.reaction
    c = np.zeros(M + 1)
    s = np.zeros(M + 1)
    if PeDa == 0:
        if abs(fc[0]) > 1e-10 * max(fp.norm(), 1e-300):
            raise SingularMeanModeError("source mean cannot be matched when Pe*Da = 0",
                                        mean_coefficient=fc[0])
    else:
        c[0] = -fc[0] / PeDa
    alpha = np.arange(1, M + 1) * math.pi / p.a
    d = alpha**2 - PeDa
    g = p.Pe * alpha
    det = d * d + g * g
    if np.any(det == 0):
        m = int(np.argmax(det == 0)) + 1
        raise ResonantModeError(f"mode {m} is resonant", mode=m)
    c[1:] = (d * fc[1:] - g * fsn[1:]) / det
    s[1:] = (g * fc[1:] + d * fsn[1:]) / det
    return TrigSeries1D(p.a, c, s[1:])


def collocation_points(a, M) -> np.ndarray:
    j = np.arange(1, 2 * M + 2)
    return -a + 2 * a * (j - 0.5) / (2 * M + 1)


def _basis_rows(a, M, x, k):
    """Rows Phi0^(k)(x_i) ordered like TrigSeries1D.as_vector()."""
    alpha = np.arange(M + 1) * math.pi / a
    c, s = trig_derivatives(alpha[None, :], x[:, None], k)
    rows = np.empty((x.size, 2 * M + 1))
    rows[:, 0] = mu(0) * c[:, 0]
    rows[:, 1::2] = c[:, 1:]
    rows[:, 2::2] = s[:, 1:]
    return rows


def particular_cm(p: CdrParams1D, fp: TrigSeries1D, M: int | None = None) -> TrigSeries1D:
    """Collocation at 2M+1 shifted-uniform points."""
    M = fp.M if M is None else M
    if M < 1:
        raise ValueError("collocation needs M >= 1")
    a = p.a
    x = collocation_points(a, M)
    R2 = _basis_rows(a, M, x, 0)
    R1 = p.apply(R2, _basis_rows(a, M, x, 1), _basis_rows(a, M, x, 2))
    q = np.zeros(2 * M + 1)
    v = fp.as_vector()
    q[: min(v.size, q.size)] = v[: q.size]
    if p.reaction == 0:
        if abs(q[0]) > 1e-10 * max(fp.norm(), 1e-300):
            raise SingularMeanModeError("source mean cannot be matched when Pe*Da = 0",
                                        mean_coefficient=q[0])
        # constant mode lies in the operator kernel: give its column a slack
        # on the constant function instead, and discard it afterwards
        R1[:, 0] = R2[:, 0]
    cond = np.linalg.cond(R1, 1)
    if not cond < COND_LIMIT:
        raise IllConditionedError(f"collocation matrix condition {cond:.3e}", condition=cond)
    sol = scipy.linalg.solve(R1, R2 @ q)
    if p.reaction == 0:
        sol[0] = 0.0
    return TrigSeries1D.from_vector(a, sol)


# ---------------------------------------------------------------------------
# Assembly


@dataclass(frozen=True)
class BoundaryCondition1D:
    side: str  # "left" | "right"
    kind: str  # "D" | "N"
    value: float

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"bad side {self.side!r}")
        kind = {"dirichlet": "D", "neumann": "N"}.get(str(self.kind).lower(), self.kind)
        if kind not in ("D", "N"):
            raise ValueError(f"bad boundary kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def order(self) -> int:
        return 0 if self.kind == "D" else 1


def dirichlet(left, right):
    return (BoundaryCondition1D("left", "D", left), BoundaryCondition1D("right", "D", right))


def _sorted_bcs(bcs):
    by_side = {bc.side: bc for bc in bcs}
    if len(bcs) != 2 or set(by_side) != {"left", "right"}:
        raise ValueError("need exactly one boundary condition per side")
    return by_side["left"], by_side["right"]


@dataclass(frozen=True)
class FsmSolution1D:
    params: CdrParams1D
    basis: HomogeneousBasis1D
    q0: TrigSeries1D
    q1: np.ndarray
    supplementary: SupplementarySolution | None
    fs_coeffs: np.ndarray
    bcs: tuple
    Rf: np.ndarray
    trace: np.ndarray  # boundary trace of phi0 + phis in the BC rows
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def a(self) -> float:
        return self.params.a

    @property
    def M(self) -> int:
        return self.q0.M

    def particular(self, x, k=0):
        out = self.q0(x, k)
        if self.supplementary is not None:
            out = out + self.supplementary(x, k)
        return out

    def __call__(self, x, k=0):
        if k not in (0, 1, 2):
            raise ValueError("derivative order must be 0, 1 or 2")
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > self.a * (1 + 1e-12)):
            raise DomainError(f"x outside [-{self.a}, {self.a}]")
        general = np.tensordot(self.q1, self.basis(x, k), axes=1)
        out = self.particular(x, k) + general
        return float(out) if out.ndim == 0 else out

    # boundary split phi = phi_b + phi_f
    def boundary_basis(self, x, k=0):
        """Phi_b(x) = Phi1(x) Rf^-1; shape (2, *x.shape)."""
        inv = np.linalg.inv(self.Rf)
        return np.tensordot(inv.T, self.basis(x, k), axes=1)

    def boundary_data(self) -> np.ndarray:
        left, right = _sorted_bcs(self.bcs)
        return np.array([left.value, right.value])

    def phi_b(self, x, k=0):
        return np.tensordot(self.boundary_data(), self.boundary_basis(x, k), axes=1)

    def phi_f(self, x, k=0):
        return self.particular(x, k) - np.tensordot(
            np.linalg.solve(self.Rf, self.trace), self.basis(x, k), axes=1)

    def with_boundary_values(self, left, right) -> "FsmSolution1D":
        """Same particular part, new boundary data (kinds unchanged)."""
        l, r = _sorted_bcs(self.bcs)
        bcs = (replace(l, value=float(left)), replace(r, value=float(right)))
        q1 = np.linalg.solve(self.Rf, np.array([left, right]) - self.trace)
        return replace(self, q1=q1, bcs=bcs)

    def bc_residuals(self) -> np.ndarray:
        out = []
        for bc in _sorted_bcs(self.bcs):
            x = -self.a if bc.side == "left" else self.a
            out.append(float(self(x, bc.order)) - bc.value)
        return np.array(out)


def eval_solution(sol: FsmSolution1D, x, k=0):
    return sol(x, k)


def source_residual(f: SourceModel, a: float, M: int, spec: SupplementarySpec):
    """Interpolant coefficients H and Fourier coefficients of f - f_s."""
    fc = fourier_coeffs(f, a, M)
    if spec.N1s == 0:
        return np.zeros(0), fc
    H = build_interpolant(f, spec, a)
    fs = fourier_coeffs(Polynomial(tuple(H), scale=a), a, M)
    return H, TrigSeries1D(a, fc.cos_coeffs - fs.cos_coeffs, fc.sin_coeffs - fs.sin_coeffs)


def assemble_and_solve(p: CdrParams1D, f: SourceModel, spec: SupplementarySpec, bcs,
                       M: int, method: str = "fccm") -> FsmSolution1D:
    """Full pipeline: interpolant, supplementary, particular, boundary constants."""
    method = method.lower()
    if method not in ("fccm", "cm"):
        raise ValueError(f"unknown method {method!r}")
    if M < 1:
        raise ValueError("M must be at least 1")
    if spec.N1s > 0 and not f.pointwise:
        raise UnsupportedSourceError("a Dirac delta source requires N1s = 0")
    a = p.a
    H, fp = source_residual(f, a, M, spec)
    if p.reaction == 0:
        # the mean mode is in the kernel of L: move it to the polynomial part
        mean = 0.5 * fp.cos_coeffs[0]
        H = H.copy() if H.size else np.zeros(1)
        H[0] += mean
        fp = TrigSeries1D(a, np.concatenate([[0.0], fp.cos_coeffs[1:]]), fp.sin_coeffs)
    supp = build_supplementary(p, H) if H.size else None
    q0 = particular_fccm(p, fp, M) if method == "fccm" else particular_cm(p, fp, M)

    basis = homogeneous_basis(p)
    left, right = _sorted_bcs(bcs)
    ends = np.array([-a, a])
    Rf = np.empty((2, 2))
    trace = np.empty(2)
    for i, bc in enumerate((left, right)):
        Rf[i] = basis(ends[i], bc.order)
        t = q0(ends[i], bc.order)
        if supp is not None:
            t += supp(ends[i], bc.order)
        trace[i] = t
    cond = np.linalg.cond(Rf, 1)
    if not cond < COND_LIMIT:
        raise IllPosedBoundaryError(f"boundary matrix condition {cond:.3e}", condition=cond)
    qb = np.array([left.value, right.value])
    q1 = np.linalg.solve(Rf, qb - trace)
    sol = FsmSolution1D(p, basis, q0, q1, supp, np.asarray(H), (left, right), Rf, trace, method)
    sol.diagnostics.update(Rf_condition=float(cond), bc_residuals=sol.bc_residuals().tolist(),
                           mode_condition_max=_mode_condition_max(p, M))
    return sol


def _mode_condition_max(p, M):
    alpha = np.arange(1, M + 1) * math.pi / p.a
    d = alpha**2 - p.reaction
    g = np.abs(p.Pe * alpha)
    # 2x2 block [[d, g], [-g, d]] is a scaled rotation: condition 1 unless singular
    return float(np.max(np.where(d * d + g * g > 0, 1.0, np.inf), initial=1.0))


# ---------------------------------------------------------------------------
# Intervals in original coordinates and multi-domain patching


def localize_source(f: SourceModel, lo: float, hi: float) -> SourceModel:
    """Restriction of a globally positioned source to [lo, hi], in the local centred frame."""
    c, a = 0.5 * (lo + hi), 0.5 * (hi - lo)
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if isinstance(f, Polynomial) and f.scale is None:
        raise ValueError("global polynomial sources need an explicit scale")
    if isinstance(f, RectPulse):
        plo, phi = f.x0 - f.half_width, f.x0 + f.half_width
        if plo <= lo + tol and hi - tol <= phi:
            return Polynomial((f.height,), scale=a)
        if phi <= lo + tol or hi - tol <= plo:
            return Polynomial((0.0,), scale=a)
        if lo - tol <= plo and phi <= hi + tol:
            return f.translated(c, a)
        return Sampled(lambda x: f.values(x, a) * ((x >= lo) & (x <= hi)), 0.0).translated(c, a)
    if isinstance(f, DiracDelta):
        if lo + tol < f.x0 < hi - tol:
            return f.translated(c, a)
        if f.x0 < lo - tol or f.x0 > hi + tol:
            return Polynomial((0.0,), scale=a)
        raise UnsupportedSourceError("delta located on a breakpoint")
    return f.translated(c, a)


@dataclass(frozen=True)
class PiecewiseSolution:
    """Solution on [x_0, x_n] made of local solutions on each subinterval."""

    breakpoints: np.ndarray
    pieces: tuple
    diagnostics: dict = field(default_factory=dict, compare=False)

    def _locate(self, x):
        bp = self.breakpoints
        tol = 1e-12 * max(1.0, float(np.max(np.abs(bp))))
        if np.any(x < bp[0] - tol) or np.any(x > bp[-1] + tol):
            raise DomainError(f"x outside [{bp[0]}, {bp[-1]}]")
        return np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(self.pieces) - 1)

    def __call__(self, x, k=0):
        x = np.asarray(x, dtype=float)
        xs = np.atleast_1d(x)
        idx = self._locate(xs)
        out = np.empty(xs.shape)
        for i, sol in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                c = 0.5 * (self.breakpoints[i] + self.breakpoints[i + 1])
                local = np.clip(xs[sel] - c, -sol.a, sol.a)
                out[sel] = sol(local, k)
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

    def one_sided(self, i, x, k=0):
        """Evaluate piece i at global x (which may be its endpoint)."""
        c = 0.5 * (self.breakpoints[i] + self.breakpoints[i + 1])
        sol = self.pieces[i]
        return sol(np.clip(np.asarray(x, dtype=float) - c, -sol.a, sol.a), k)


def solve_interval(lo, hi, Pe, Da, f: SourceModel, bcs, M, spec=SupplementarySpec(0),
                   method="fccm") -> PiecewiseSolution:
    """Single-interval solve in original coordinates (translated to [-a, a])."""
    a = 0.5 * (hi - lo)
    local = f if isinstance(f, Polynomial) and f.scale is None else localize_source(f, lo, hi)
    sol = assemble_and_solve(CdrParams1D(Pe, Da, a), local, spec, bcs, M, method)
    return PiecewiseSolution(np.array([lo, hi], dtype=float), (sol,), dict(sol.diagnostics))


@dataclass(frozen=True)
class MultiDomainSpec:
    breakpoints: tuple
    Pe: tuple
    Da: tuple
    N1s: tuple
    M: tuple
    method: tuple

    @classmethod
    def uniform(cls, breakpoints, Pe, Da, N1s=0, M=40, method="fccm"):
        n = len(breakpoints) - 1
        return cls(tuple(float(b) for b in breakpoints), (Pe,) * n, (Da,) * n,
                   (N1s,) * n, (M,) * n, (method,) * n)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        n = bp.size - 1
        if n < 1 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        for name in ("Pe", "Da", "N1s", "M", "method"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} needs one entry per subinterval")

    @property
    def count(self) -> int:
        return len(self.breakpoints) - 1


def solve_multidomain(md: MultiDomainSpec, f: SourceModel, bcs) -> PiecewiseSolution:
    """Patch subinterval solutions through continuity of value and flux."""
    left, right = _sorted_bcs(bcs)
    bp = np.asarray(md.breakpoints, dtype=float)
    n = md.count
    zero = dirichlet(0.0, 0.0)
    base = []
    for i in range(n):
        lo, hi = bp[i], bp[i + 1]
        p = CdrParams1D(md.Pe[i], md.Da[i], 0.5 * (hi - lo))
        local = localize_source(f, lo, hi)
        base.append(assemble_and_solve(p, local, SupplementarySpec(md.N1s[i]), zero,
                                       md.M[i], md.method[i]))
    # flux of piece i at its ends: Phi_b'(end) . [v_i, v_{i+1}] + phi_f'(end)
    flux = []
    for sol in base:
        ends = np.array([-sol.a, sol.a])
        flux.append((sol.boundary_basis(ends, 1), sol.phi_f(ends, 1)))
    A = np.zeros((n + 1, n + 1))
    rhs = np.zeros(n + 1)
    # outer conditions
    for row, bc, piece, end in ((0, left, 0, 0), (n, right, n - 1, 1)):
        if bc.kind == "D":
            A[row, row] = 1.0
            rhs[row] = bc.value
        else:
            Pb, pf = flux[piece]
            A[row, piece:piece + 2] = Pb[:, end]
            rhs[row] = bc.value - pf[end]
    for i in range(1, n):
        PbL, pfL = flux[i - 1]
        PbR, pfR = flux[i]
        A[i, i - 1:i + 1] += PbL[:, 1]
        A[i, i:i + 2] -= PbR[:, 0]
        rhs[i] = pfR[0] - pfL[1]
    cond = np.linalg.cond(A, 1)
    if not cond < COND_LIMIT:
        raise IllConditionedError(f"interface system condition {cond:.3e}", condition=cond)
    banded = np.zeros((3, n + 1))
    for j in range(n + 1):
        for i in range(max(0, j - 1), min(n + 1, j + 2)):
            banded[1 + i - j, j] = A[i, j]
    v = scipy.linalg.solve_banded((1, 1), banded, rhs)
    pieces = tuple(sol.with_boundary_values(v[i], v[i + 1]) for i, sol in enumerate(base))
    out = PiecewiseSolution(bp, pieces)
    jumps = []
    for i in range(1, n):
        for k in (0, 1):
            l = out.one_sided(i - 1, bp[i], k)
            r = out.one_sided(i, bp[i], k)
            jumps.append(abs(l - r) / max(1.0, abs(l), abs(r)))
    out.diagnostics.update(interface_values=v.tolist(), interface_condition=float(cond),
                           continuity_residual=max(jumps, default=0.0))
    return out
