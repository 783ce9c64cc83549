"""2D convection-diffusion-reaction solver on the rectangle [-a, a] x [-b, b].

The operator is

    L u = Pe1 u_x1 + Pe2 u_x2 - (u_x1x1 + u_x2x2) - Pe*Da u,

with Pe1 = Pe cos(theta), Pe2 = Pe sin(theta). The solution is composed of

* a double Fourier series particular part (mode-by-mode coefficient
  comparison), which also absorbs the operator image of the corner term;
* an x1-family of homogeneous solutions, exponential in x1 and periodic
  in x2 with wavenumbers beta_n = n pi / b (n = 0..N);
* an x2-family with the roles of the axes exchanged (m = 0..M);
* the corner term q3 * x1 x2 / (4ab).

The Fourier coefficients of the boundary residual along each edge are
set to zero exactly; the one remaining unknown is fixed by a least-squares
fit of the boundary condition at the four corner points.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.special

from .cdr1d import ResonantModeError, SingularMeanModeError, SolverError
from .series_core import (
    Polynomial,
    Separable2D,
    SourceModel,
    SourceModel2D,
    Sum2D,
    TrigSeries2D,
    Zero2D,
    _check_domain,
    fourier_coeffs_2d,
)

EDGES = ("left", "right", "bottom", "top")
# edge -> (axis held fixed, sign of the fixed coordinate)
EDGE_GEOMETRY = {"left": (1, -1), "right": (1, 1), "bottom": (2, -1), "top": (2, 1)}
CORNERS = ((-1, -1), (1, -1), (-1, 1), (1, 1))
DEGENERATE_TOL = 1e-10
RESIDUAL_WARN = 1e-6


class RankDeficientError(SolverError):
    pass


# ---------------------------------------------------------------------------
# Parameters and per-mode roots


@dataclass(frozen=True)
class CdrParams2D:
    Pe: float
    Da: float
    theta: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("half-lengths a, b must be positive")
        if not all(math.isfinite(v) for v in (self.Pe, self.Da, self.theta)):
            raise ValueError("Pe, Da and theta must be finite")

    @property
    def Pe1(self) -> float:
        return self.Pe * math.cos(self.theta)

    @property
    def Pe2(self) -> float:
        return self.Pe * math.sin(self.theta)

    @property
    def reaction(self) -> float:
        return self.Pe * self.Da

    def apply(self, d10, d01, d20, d02, d00):
        """Combine partial derivatives into L u."""
        return self.Pe1 * d10 + self.Pe2 * d01 - (d20 + d02) - self.reaction * d00


@dataclass(frozen=True)
class ModeRoots:
    n: int
    direction: int  # 1: exponential in x1, periodic in x2; 2: the reverse
    beta: float
    gamma1: float
    gamma2: float
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def eta1(self) -> complex:
        return complex(-self.alpha1 + self.alpha3, -self.alpha2)

    @property
    def eta2(self) -> complex:
        return complex(-self.alpha1 - self.alpha3, self.alpha2)

    def degenerate(self, scale) -> bool:
        tol = DEGENERATE_TOL * max(1.0, scale)
        return abs(self.gamma1) <= tol and abs(self.gamma2) <= tol


def _axis_data(p: CdrParams2D, direction):
    """(convection along the exponential axis, across it, its half-length, the periodic half-length)."""
    if direction == 1:
        return p.Pe1, p.Pe2, p.a, p.b
    if direction == 2:
        return p.Pe2, p.Pe1, p.b, p.a
    raise ValueError("direction must be 1 or 2")


def mode_roots(p: CdrParams2D, n: int, direction: int = 1, beta: float | None = None) -> ModeRoots:
    """Characteristic roots of exp(eta s) exp(i beta t) for mode n.

    ``beta`` overrides n*pi/(periodic half-length), as the reference field does.
    """
    if n < 0:
        raise ValueError("mode index must be non-negative")
    along, across, _, period = _axis_data(p, direction)
    if beta is None:
        beta = n * math.pi / period
    g1 = -along**2 - 4 * beta**2 + 4 * p.reaction
    g2 = -4 * across * beta
    # + 0.0 turns a signed zero into +0 so the branch cut is not crossed
    s = 0.5 * cmath.sqrt(complex(g1, g2 + 0.0))
    return ModeRoots(n, direction, float(beta), g1, g2, -along / 2, s.real, s.imag)


def root_residual(p: CdrParams2D, r: ModeRoots) -> float:
    """Largest scaled residual of the two roots in the characteristic equation."""
    along, across, _, _ = _axis_data(p, r.direction)
    c = complex(-r.beta**2 + p.reaction, -across * r.beta)
    scale = max(1.0, along**2, r.beta**2, abs(p.reaction))
    return max(abs(e * e - along * e + c) for e in (r.eta1, r.eta2)) / scale


# ---------------------------------------------------------------------------
# Homogeneous families


@dataclass(frozen=True)
class HomogeneousFamily:
    """Members part[(s/L)^p exp((lam + i omega) s) exp(i kappa t)] / cosh(lam L).

    ``s`` is the exponential coordinate (x1 for direction 1), ``t`` the
    periodic one. ``part`` is 0 for the real part, 1 for the imaginary part.
    """

    direction: int
    L: float
    mode: np.ndarray
    power: np.ndarray
    lam: np.ndarray
    omega: np.ndarray
    kappa: np.ndarray
    part: np.ndarray

    def __len__(self):
        return int(self.mode.size)

    def values(self, s, t, ks=0, kt=0):
        """Member values, shape (members, points), for broadcastable s and t."""
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        s, t = s.ravel()[None, :], t.ravel()[None, :]
        lam = self.lam[:, None]
        z = lam + 1j * self.omega[:, None]
        alam = np.abs(lam)
        # exp(lam s) / cosh(lam L) without overflow
        amp = 2.0 * np.exp(lam * s - alam * self.L) / (1.0 + np.exp(-2.0 * alam * self.L))
        phase = np.exp(1j * (self.omega[:, None] * s + self.kappa[:, None] * t))
        lin = self.power[:, None] == 1
        fac = np.where(lin, z**ks * s / self.L + (ks * z ** max(ks - 1, 0) / self.L if ks else 0.0), z**ks)
        if kt:
            fac = fac * (1j * self.kappa[:, None]) ** kt
        w = amp * phase * fac
        return np.where(self.part[:, None] == 0, w.real, w.imag)

    def operator_residual(self, p: CdrParams2D, s, t):
        """L applied to every member, using analytic derivatives."""
        d = {k: self.values(s, t, *k) for k in ((0, 0), (1, 0), (0, 1), (2, 0), (0, 2))}
        if self.direction == 1:
            return p.apply(d[1, 0], d[0, 1], d[2, 0], d[0, 2], d[0, 0])
        return p.apply(d[0, 1], d[1, 0], d[0, 2], d[2, 0], d[0, 0])


def _mode_members(r: ModeRoots, scale):
    """(power, lam, omega, kappa, part) rows for one mode."""
    lam0 = -r.alpha1
    lp, lm = -r.alpha1 + r.alpha3, -r.alpha1 - r.alpha3
    if r.beta == 0.0:
        if abs(r.gamma1) <= DEGENERATE_TOL * max(1.0, scale):
            return [(0, lam0, 0.0, 0.0, 0), (1, lam0, 0.0, 0.0, 0)]
        if r.gamma1 > 0:
            return [(0, lam0, r.alpha2, 0.0, 0), (0, lam0, r.alpha2, 0.0, 1)]
        return [(0, lp, 0.0, 0.0, 0), (0, lm, 0.0, 0.0, 0)]
    if r.degenerate(scale):
        return [(0, lam0, 0.0, r.beta, 0), (1, lam0, 0.0, r.beta, 0),
                (0, lam0, 0.0, r.beta, 1), (1, lam0, 0.0, r.beta, 1)]
    return [(0, lp, -r.alpha2, r.beta, 0), (0, lp, -r.alpha2, r.beta, 1),
            (0, lm, r.alpha2, r.beta, 0), (0, lm, r.alpha2, r.beta, 1)]


def _family_from_rows(direction, L, modes, rows):
    rows = np.asarray(rows, dtype=float).reshape(-1, 5)
    return HomogeneousFamily(direction, float(L), np.asarray(modes, dtype=int),
                             rows[:, 0].astype(int), rows[:, 1], rows[:, 2], rows[:, 3],
                             rows[:, 4].astype(int))


def homogeneous_family(p: CdrParams2D, cap: int, direction: int = 1) -> HomogeneousFamily:
    """2 members for mode 0 and 4 for each mode 1..cap."""
    _, _, L, _ = _axis_data(p, direction)
    scale = p.Pe**2
    modes, rows = [], []
    for n in range(cap + 1):
        r = mode_roots(p, n, direction)
        mem = _mode_members(r, scale)
        rows.extend(mem)
        modes.extend([n] * len(mem))
    return _family_from_rows(direction, L, modes, rows)


def roots_table(p: CdrParams2D, cap: int, direction: int = 1):
    return [mode_roots(p, n, direction) for n in range(cap + 1)]


# ---------------------------------------------------------------------------
# Particular solution


def _mode_blocks(p: CdrParams2D, M, N):
    al = np.arange(M + 1)[:, None] * math.pi / p.a
    be = np.arange(N + 1)[None, :] * math.pi / p.b
    d = al**2 + be**2 - p.reaction
    u = p.Pe1 * al * np.ones_like(be)
    v = p.Pe2 * be * np.ones_like(al)
    d = d * np.ones_like(u)
    A = np.zeros((M + 1, N + 1, 4, 4))
    # parity order cc, cs, sc, ss; derivative of cos(alpha x) is -alpha sin
    A[..., 0, 0], A[..., 0, 1], A[..., 0, 2] = d, v, u
    A[..., 1, 1], A[..., 1, 0], A[..., 1, 3] = d, -v, u
    A[..., 2, 2], A[..., 2, 0], A[..., 2, 3] = d, -u, v
    A[..., 3, 3], A[..., 3, 1], A[..., 3, 2] = d, -u, -v
    return A


def _active_mask(M, N):
    act = np.ones((M + 1, N + 1, 4), dtype=bool)
    act[0, :, 2:] = False
    act[:, 0, 1] = False
    act[:, 0, 3] = False
    return act


def particular_2d_fccm(p: CdrParams2D, fcoeffs: TrigSeries2D, cond_limit=1e13) -> TrigSeries2D:
    """Series whose operator image matches ``fcoeffs`` on every retained mode."""
    M, N = fcoeffs.M, fcoeffs.N
    A = _mode_blocks(p, M, N)
    act = _active_mask(M, N)
    # absent parities become identity rows and columns
    for q in range(4):
        off = ~act[..., q]
        A[off, q, :] = 0.0
        A[off, :, q] = 0.0
        A[off, q, q] = 1.0
    F = np.where(act, fcoeffs.coeffs, 0.0)
    if p.reaction == 0.0:
        scale = max(fcoeffs.norm(), 1e-300)
        if abs(F[0, 0, 0]) > 1e-12 * scale:
            raise SingularMeanModeError("source has a mean component but Pe*Da = 0",
                                        mean=float(F[0, 0, 0]))
        A[0, 0, 0, 0] = 1.0
        F = F.copy()
        F[0, 0, 0] = 0.0
    conds = np.linalg.cond(A)
    bad = np.argwhere(~np.isfinite(conds) | (conds > cond_limit))
    if bad.size:
        m, n = (int(v) for v in bad[0])
        raise ResonantModeError(f"mode block ({m}, {n}) is singular", mode=(m, n),
                                condition=float(conds[m, n]))
    U = np.linalg.solve(A, F[..., None])[..., 0]
    return TrigSeries2D(fcoeffs.a, fcoeffs.b, np.where(act, U, 0.0))


def corner_value(p: CdrParams2D, x1, x2, k1=0, k2=0):
    """Derivatives of x1 x2 / (4ab)."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    c = 1.0 / (4 * p.a * p.b)
    if (k1, k2) == (0, 0):
        return c * x1 * x2
    if (k1, k2) == (1, 0):
        return c * x2
    if (k1, k2) == (0, 1):
        return c * x1
    if (k1, k2) == (1, 1):
        return np.full(x1.shape, c)
    return np.zeros(x1.shape)


def corner_source(p: CdrParams2D) -> Sum2D:
    """-L[x1 x2 / (4ab)] as a sum of separable polynomial terms."""
    one, lin = Polynomial((1.0,)), Polynomial((0.0, 1.0))
    return Sum2D((
        Separable2D(one, lin, -p.Pe1 / (4 * p.a)),
        Separable2D(lin, one, -p.Pe2 / (4 * p.b)),
        Separable2D(lin, lin, p.reaction / 4),
    ))


# ---------------------------------------------------------------------------
# Boundary data


def _as_edge_function(data) -> Callable:
    if callable(data) and not isinstance(data, SourceModel):
        return data
    if isinstance(data, SourceModel):
        raise TypeError("pass edge data as a callable or a constant")
    value = float(data)
    return lambda t: np.full(np.shape(t), value)


@dataclass(frozen=True)
class EdgeBcSpec:
    """Per-edge (kind, data); Neumann data is the outward normal derivative."""

    kinds: dict
    data: dict

    def __post_init__(self):
        if set(self.kinds) != set(EDGES) or set(self.data) != set(EDGES):
            raise ValueError(f"all four edges {EDGES} must be specified")
        norm = {}
        for e in EDGES:
            k = str(self.kinds[e]).upper()[:1]
            if k not in ("D", "N"):
                raise ValueError(f"unknown boundary kind {self.kinds[e]!r} on {e}")
            norm[e] = k
        object.__setattr__(self, "kinds", norm)
        object.__setattr__(self, "data", {e: _as_edge_function(self.data[e]) for e in EDGES})

    @property
    def pattern(self) -> str:
        return "".join(self.kinds[e] for e in EDGES)

    def as_fd_bc(self):
        return {e: (self.kinds[e], self.data[e]) for e in EDGES}

    @classmethod
    def from_field(cls, pattern: str, p: CdrParams2D, field_fn):
        """Traces of ``field_fn(x1, x2, k1, k2)`` per the pattern letters (left, right, bottom, top)."""
        pattern = pattern.upper()
        if len(pattern) != 4 or set(pattern) - {"D", "N"}:
            raise ValueError(f"bad boundary pattern {pattern!r}")
        kinds, data = {}, {}
        for e, kind in zip(EDGES, pattern):
            kinds[e] = kind
            data[e] = _field_trace(p, field_fn, e, kind)
        return cls(kinds, data)


def _field_trace(p, field_fn, edge, kind):
    axis, sgn = EDGE_GEOMETRY[edge]
    k = 0 if kind == "D" else 1
    if axis == 1:
        return lambda t: sgn**k * field_fn(np.full(np.shape(t), sgn * p.a), t, k, 0)
    return lambda t: sgn**k * field_fn(t, np.full(np.shape(t), sgn * p.b), 0, k)


def edge_points(p: CdrParams2D, edge, t):
    """Global (x1, x2) of edge coordinate t."""
    axis, sgn = EDGE_GEOMETRY[edge]
    t = np.asarray(t, dtype=float)
    if axis == 1:
        return np.full(t.shape, sgn * p.a), t
    return t, np.full(t.shape, sgn * p.b)


# ---------------------------------------------------------------------------
# Edge expansions


@lru_cache(maxsize=32)
def _legendre(n):
    x, w = scipy.special.roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _gauss_coeffs(func, L, K, rtol=1e-12, start=128, max_nodes=4096):
    """Fourier coefficient vectors of func(t) (rows of values) on [-L, L] by Gauss-Legendre.

    ``func`` returns an array of shape (rows, points). Nodes double until
    successive results agree to ``rtol``.
    """
    n = max(start, 4 * (K + 1))
    prev = None
    alpha = np.arange(K + 1) * math.pi / L
    while True:
        xg, wg = _legendre(n)
        t = L * xg
        w = L * wg
        F = np.atleast_2d(func(t)) * w
        c = F @ np.cos(np.outer(alpha, t)).T / L
        s = F @ np.sin(np.outer(alpha[1:], t)).T / L
        cur = _interleave(c, s)
        if prev is not None:
            scale = max(np.max(np.abs(cur)), 1e-300)
            err = np.max(np.abs(cur - prev)) / scale
            if err < rtol or 2 * n > max_nodes:
                if err >= rtol:
                    warnings.warn(f"edge expansion converged only to {err:.2e}", RuntimeWarning,
                                  stacklevel=2)
                return cur
        prev = cur
        n *= 2


def _interleave(c, s):
    """Rows [V10, V11, V21, V12, V22, ...] from cosine and sine blocks."""
    rows, K1 = c.shape
    out = np.empty((rows, 2 * K1 - 1))
    out[:, 0] = c[:, 0]
    out[:, 1::2] = c[:, 1:]
    out[:, 2::2] = s
    return out


def _same_direction_trace(fam: HomogeneousFamily, s_value, ks, K, L_t):
    """Exact coefficient rows of members restricted to s = s_value, as series in t.

    Member n has wavenumber kappa = n pi / L_t, so its trace is a single mode.
    """
    val = fam.values(np.array([s_value]), np.array([0.0]), ks, 0)[:, 0]
    # the same expression shifted by a quarter period in t gives the sine partner
    rows = np.zeros((len(fam), 2 * K + 1))
    for j in range(len(fam)):
        n = int(fam.mode[j])
        if n > K:
            continue
        if fam.kappa[j] == 0.0:
            rows[j, 0] = 2.0 * val[j]
            continue
        t_q = 0.5 * math.pi / fam.kappa[j]
        shifted = fam.values(np.array([s_value]), np.array([t_q]), ks, 0)[j, 0]
        # f(t) = A cos(kappa t) + B sin(kappa t): A = f(0), B = f(pi / 2kappa)
        rows[j, 2 * n - 1] = val[j]
        rows[j, 2 * n] = shifted
    return rows


def _edge_normal_order(kind):
    return 0 if kind == "D" else 1


def _particular_edge(series: TrigSeries2D, edge, k):
    axis, sgn = EDGE_GEOMETRY[edge]
    value = sgn * (series.a if axis == 1 else series.b)
    return (sgn**k) * series.trace(axis, value, k).as_vector()


def _corner_edge(p: CdrParams2D, edge, k, K):
    """Coefficient row of the outward k-th normal derivative of x1 x2/(4ab) on an edge."""
    axis, sgn = EDGE_GEOMETRY[edge]
    if axis == 1:
        L_t, L_n = p.b, p.a
    else:
        L_t, L_n = p.a, p.b
    # on x_axis = sgn*L_n: value = sgn*L_n * t / (4ab); normal derivative = t/(4ab)
    slope = (sgn * L_n if k == 0 else 1.0) * (sgn**k) / (4 * p.a * p.b)
    return Polynomial((0.0, slope * L_t)).fourier(L_t, K).as_vector()


def _family_edge(p, fam: HomogeneousFamily, edge, k, K):
    axis, sgn = EDGE_GEOMETRY[edge]
    if fam.direction == axis:
        # edge normal to the exponential coordinate: exact single modes
        return (sgn**k) * _same_direction_trace(fam, sgn * fam.L, k, K, None)
    # edge along the exponential coordinate: t fixed, s varies
    t_value = sgn * (p.b if axis == 2 else p.a)
    return _gauss_coeffs(lambda s: (sgn**k) * fam.values(s, np.full(s.shape, t_value), 0, k),
                         fam.L, K).reshape(len(fam), -1)


def _point_rows(p, fam1, fam2, corr, corner_pt, edge, k):
    x1, x2 = corner_pt
    axis, sgn = EDGE_GEOMETRY[edge]
    k1, k2 = (k, 0) if axis == 1 else (0, k)
    f = sgn**k
    r1 = f * fam1.values(np.array([x1]), np.array([x2]), k1, k2)[:, 0]
    r2 = f * fam2.values(np.array([x2]), np.array([x1]), k2, k1)[:, 0]
    rc = f * (corner_value(p, x1, x2, k1, k2) + corr(x1, x2, k1, k2))
    return r1, r2, float(rc)


def _corner_edge_choice(bc: EdgeBcSpec, sx, sy):
    e1 = "left" if sx < 0 else "right"
    e2 = "bottom" if sy < 0 else "top"
    if bc.kinds[e1] == "D":
        return e1
    if bc.kinds[e2] == "D":
        return e2
    return e1


# ---------------------------------------------------------------------------
# Solution


@dataclass(frozen=True)
class FsmSolution2D:
    params: CdrParams2D
    M: int
    N: int
    particular: TrigSeries2D  # source part plus q3 times the corner correction
    family1: HomogeneousFamily
    family2: HomogeneousFamily
    c1: np.ndarray
    c2: np.ndarray
    q3: float
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, x1, x2, k1=0, k2=0):
        return eval_solution_2d(self, x1, x2, k1, k2)

    def eval_grid(self, x1, x2, k1=0, k2=0):
        X1, X2 = np.meshgrid(np.asarray(x1, float), np.asarray(x2, float), indexing="ij")
        return self(X1, X2, k1, k2)

    def coefficient_vector(self):
        return np.concatenate([self.c1, self.c2, [self.q3]])

    def to_dict(self):
        p = self.params
        return {"params": {"Pe": p.Pe, "Da": p.Da, "theta": p.theta, "a": p.a, "b": p.b},
                "M": self.M, "N": self.N, "particular": self.particular.to_dict(),
                "x1_family": self.c1.tolist(), "x2_family": self.c2.tolist(), "q3": self.q3,
                "diagnostics": {k: v for k, v in self.diagnostics.items()
                                if isinstance(v, (int, float, str, bool))}}


def eval_solution_2d(sol: FsmSolution2D, x1, x2, k1=0, k2=0):
    if k1 < 0 or k2 < 0 or k1 + k2 > 2:
        raise ValueError("derivative orders must satisfy k1 + k2 <= 2")
    p = sol.params
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    _check_domain(x1, p.a, "x1")
    _check_domain(x2, p.b, "x2")
    shape = x1.shape
    u, v = x1.ravel(), x2.ravel()
    out = np.zeros(u.size)
    chunk = 4096
    for i in range(0, u.size, chunk):
        a_, b_ = u[i:i + chunk], v[i:i + chunk]
        out[i:i + chunk] = (sol.c1 @ sol.family1.values(a_, b_, k1, k2)
                            + sol.c2 @ sol.family2.values(b_, a_, k2, k1)
                            + sol.q3 * corner_value(p, a_, b_, k1, k2))
    out += _series_points(sol.particular, u, v, k1, k2)
    return out.reshape(shape)


def _series_points(s: TrigSeries2D, x1, x2, k1, k2):
    """Pointwise (not tensor-grid) evaluation of a 2D series."""
    from .series_core import eval_series_2d
    return np.asarray(eval_series_2d(s, x1, x2, k1, k2), dtype=float).ravel()


# ---------------------------------------------------------------------------
# Assembly


def assemble_edges(p: CdrParams2D, bc: EdgeBcSpec, M: int, N: int, f: SourceModel2D | None = None,
                   fcoeffs: TrigSeries2D | None = None) -> FsmSolution2D:
    """Fit family and corner coefficients to the boundary data by least squares."""
    if M < 1 or N < 1:
        raise ValueError("2D solves need M >= 1 and N >= 1")
    if fcoeffs is None:
        fcoeffs = fourier_coeffs_2d(f if f is not None else Zero2D(), p.a, p.b, M, N)
    phi_f = particular_2d_fccm(p, fcoeffs)
    phi_c = particular_2d_fccm(p, corner_source(p).fourier(p.a, p.b, M, N))
    fam1 = homogeneous_family(p, N, 1)
    fam2 = homogeneous_family(p, M, 2)
    n1, n2 = len(fam1), len(fam2)

    rows, rhs = [], []
    for e in EDGES:
        axis, sgn = EDGE_GEOMETRY[e]
        K, L_t = (N, p.b) if axis == 1 else (M, p.a)
        k = _edge_normal_order(bc.kinds[e])
        B1 = _family_edge(p, fam1, e, k, K)
        B2 = _family_edge(p, fam2, e, k, K)
        Bc = _corner_edge(p, e, k, K) + _particular_edge(phi_c, e, k)
        data = _gauss_coeffs(lambda t, fn=bc.data[e]: np.asarray(fn(t), dtype=float)[None, :], L_t, K)[0]
        rows.append(np.hstack([B1.T, B2.T, Bc[:, None]]))
        rhs.append(data - _particular_edge(phi_f, e, k))

    def corr(x1, x2, k1, k2):
        return float(_series_points(phi_c, np.array([x1]), np.array([x2]), k1, k2)[0])

    for sx, sy in CORNERS:
        e = _corner_edge_choice(bc, sx, sy)
        k = _edge_normal_order(bc.kinds[e])
        pt = (sx * p.a, sy * p.b)
        r1, r2, rc = _point_rows(p, fam1, fam2, corr, pt, e, k)
        axis, sgn = EDGE_GEOMETRY[e]
        t = pt[1] if axis == 1 else pt[0]
        k1, k2 = (k, 0) if axis == 1 else (0, k)
        fixed = sgn**k * float(_series_points(phi_f, np.array([pt[0]]), np.array([pt[1]]), k1, k2)[0])
        rows.append(np.hstack([r1, r2, [rc]])[None, :])
        rhs.append(np.array([float(bc.data[e](np.array([t]))[0]) - fixed]))

    A = np.vstack(rows)
    y = np.concatenate(rhs)
    n_edge = A.shape[0] - 4
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    # rank of the full system from a column-pivoted QR
    R = scipy.linalg.qr(As, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-13 * diag[0]))
    # edge equations as constraints, corner points in the least-squares sense
    gglse = scipy.linalg.lapack.get_lapack_funcs("gglse", (As,))
    out = gglse(As[n_edge:], As[:n_edge], y[n_edge:], y[:n_edge])
    info = out[-1]
    if info != 0:
        raise RankDeficientError("constrained least-squares solve failed", info=int(info), rank=rank,
                                 unknowns=int(A.shape[1]))
    x = out[3] / scale
    resid = A @ x - y
    data_norm = max(np.linalg.norm(y), 1e-300)
    diagnostics = {
        "rank": rank,
        "unknowns": int(A.shape[1]),
        "equations": int(A.shape[0]),
        "residual_norm": float(np.linalg.norm(resid)),
        "relative_residual": float(np.linalg.norm(resid) / data_norm),
        "edge_residual_max": float(np.max(np.abs(resid[:n_edge]), initial=0.0)),
        "corner_residual_max": float(np.max(np.abs(resid[n_edge:]))),
        "rank_deficient": rank < A.shape[1],
    }
    diagnostics["poorly_resolved"] = bool(
        diagnostics["edge_residual_max"] > RESIDUAL_WARN * max(np.max(np.abs(y)), 1.0))
    q3 = float(x[-1])
    return FsmSolution2D(p, M, N, phi_f + phi_c.scaled(q3), fam1, fam2,
                         x[:n1].copy(), x[n1:n1 + n2].copy(), q3, diagnostics)


def solve_2d(p: CdrParams2D, bc: EdgeBcSpec, M: int, N: int, f: SourceModel2D | None = None,
             strict_rank=False) -> FsmSolution2D:
    sol = assemble_edges(p, bc, M, N, f)
    if strict_rank and sol.diagnostics.get("rank_deficient"):
        raise RankDeficientError("least-squares system is rank deficient",
                                 rank=sol.diagnostics["rank"], unknowns=sol.diagnostics["unknowns"])
    return sol


# ---------------------------------------------------------------------------
# Reference field


@dataclass(frozen=True)
class ReferenceField:
    """Sum of the four periodic-mode members with beta = pi / (2b)."""

    params: CdrParams2D
    family: HomogeneousFamily
    roots: ModeRoots

    def __call__(self, x1, x2, k1=0, k2=0):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        vals = self.family.values(x1, x2, k1, k2)
        return vals.sum(axis=0).reshape(x1.shape)


def reference_solution(p: CdrParams2D) -> ReferenceField:
    r = mode_roots(p, 1, 1, beta=math.pi / (2 * p.b))
    fam = _family_from_rows(1, p.a, [1] * 4, _mode_members(r, p.Pe**2))
    return ReferenceField(p, fam, r)
