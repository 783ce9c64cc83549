"""Independent reference solutions for cross-checking the series solvers.

Nothing here reuses the series machinery: the finite-difference solvers are
plain second-order central schemes, and the closed-form 1D solution for
polynomial sources is built by undetermined coefficients in exact rational
arithmetic plus numerically computed characteristic roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
import sympy

from .series_core import Polynomial, SourceModel, UnsupportedSourceError


class StabilityError(ValueError):
    """Grid too coarse for central differencing at this Peclet number."""


@dataclass(frozen=True)
class FdGrid:
    x: np.ndarray
    values: np.ndarray
    h: float
    x2: np.ndarray | None = None
    h2: float | None = None

    def to_csv(self, path):
        if self.x2 is None:
            np.savetxt(path, np.column_stack([self.x, self.values]), delimiter=",",
                       header="x,phi", comments="", fmt="%.17g")
        else:
            X1, X2 = np.meshgrid(self.x, self.x2, indexing="ij")
            np.savetxt(path, np.column_stack([X1.ravel(), X2.ravel(), self.values.ravel()]),
                       delimiter=",", header="x1,x2,phi", comments="", fmt="%.17g")


def _bc_tuple(bcs):
    by_side = {bc.side: bc for bc in bcs}
    return by_side["left"], by_side["right"]


def _banded_matvec(ab, u):
    """Product of a (2, 2)-banded matrix in solve_banded storage with u."""
    n = u.size
    out = np.zeros(n, dtype=u.dtype)
    for off in range(-2, 3):
        d = ab[2 - off]
        if off >= 0:
            out[: n - off] += d[off:] * u[off:]
        else:
            out[-off:] += d[: n + off] * u[: n + off]
    return out


def fd_solve_1d(Pe, Da, lo, hi, f, bcs, nodes=20001, a_frame=None, refine=2) -> FdGrid:
    """Central differences for Pe*u' - u'' - Pe*Da*u = f on [lo, hi].

    ``f`` is a SourceModel evaluated at node coordinates shifted to the
    centred frame, or a plain callable of the original coordinate.
    ``refine`` steps of iterative refinement use residuals formed in
    extended precision, which removes most of the O(eps/h^2) roundoff.
    """
    if nodes < 3:
        raise ValueError("need at least 3 nodes")
    h = (hi - lo) / (nodes - 1)
    if abs(Pe) * h / 2 >= 1:
        need = int(math.ceil(abs(Pe) * (hi - lo) / 2)) + 2
        raise StabilityError(f"|Pe|*h/2 >= 1; use at least {need} nodes")
    x = np.linspace(lo, hi, nodes)
    if isinstance(f, SourceModel):
        if not f.pointwise:
            raise UnsupportedSourceError("finite differences need a pointwise source")
        c = 0.5 * (lo + hi)
        rhs = f.values(x - c, a_frame or 0.5 * (hi - lo))
    else:
        rhs = np.asarray(f(x), dtype=float) * np.ones(nodes)
    rhs = np.array(rhs, dtype=float)
    left, right = _bc_tuple(bcs)
    rhs[0], rhs[-1] = left.value, right.value
    # banded storage with two diagonals each side (one-sided Neumann rows)
    ab = np.zeros((5, nodes), dtype=np.longdouble)
    hl = (np.longdouble(hi) - np.longdouble(lo)) / (nodes - 1)
    Pel, PeDa = np.longdouble(Pe), np.longdouble(Pe) * np.longdouble(Da)

    def put(i, j, v):
        ab[2 + i - j, j] += v

    inner = np.arange(1, nodes - 1)
    ab[3, inner - 1] = -Pel / (2 * hl) - 1 / hl**2
    ab[2, inner] = 2 / hl**2 - PeDa
    ab[1, inner + 1] = Pel / (2 * hl) - 1 / hl**2
    for i, bc, sgn in ((0, left, 1), (nodes - 1, right, -1)):
        if bc.kind == "D":
            put(i, i, 1.0)
        else:
            # second-order one-sided first derivative
            put(i, i, -3 * sgn / (2 * hl))
            put(i, i + sgn, 4 * sgn / (2 * hl))
            put(i, i + 2 * sgn, -sgn / (2 * hl))
    ab64 = ab.astype(float)
    lu = scipy.linalg.solve_banded((2, 2), ab64, rhs)
    u = lu.astype(np.longdouble)
    for _ in range(refine):
        r = rhs.astype(np.longdouble) - _banded_matvec(ab, u)
        u = u + scipy.linalg.solve_banded((2, 2), ab64, r.astype(float))
    return FdGrid(x, u.astype(float), h)


def fd_extrapolated_1d(Pe, Da, lo, hi, f, bcs, nodes=20001, levels=3, a_frame=None) -> FdGrid:
    """Richardson extrapolation over ``levels`` nested grids, on the coarsest nodes."""
    grids = [fd_solve_1d(Pe, Da, lo, hi, f, bcs, (nodes - 1) * 2**j + 1, a_frame)
             for j in range(levels)]
    table = [g.values[:: 2**j] for j, g in enumerate(grids)]
    for order in range(1, levels):
        factor = 4.0**order
        table = [(factor * table[j + 1] - table[j]) / (factor - 1) for j in range(len(table) - 1)]
    return FdGrid(grids[0].x, table[0], grids[0].h)


# ---------------------------------------------------------------------------
# Closed form for polynomial sources (1D)


class ExactPolynomialSolution:
    """Exact solution of the 1D problem on [-a, a] for a polynomial source.

    Particular part: polynomial by undetermined coefficients (sympy, exact
    rationals when inputs are). Homogeneous part: numpy roots of the
    characteristic polynomial, complex exponentials shifted so that no
    term overflows on the interval.
    """

    def __init__(self, Pe, Da, a, source: Polynomial, bcs):
        self.Pe, self.Da, self.a = Pe, Da, a
        x = sympy.Symbol("x")
        c = source.in_frame(a)
        A = sympy.nsimplify(a, rational=True)
        f = sum(sympy.nsimplify(float(cj), rational=True) * (x / A) ** j for j, cj in enumerate(c))
        PeS = sympy.nsimplify(Pe, rational=True)
        PeDaS = sympy.nsimplify(Pe * Da, rational=True)
        deg = len(c) + 2
        coeffs = sympy.symbols(f"k0:{deg + 1}")
        P = sum(k * x**i for i, k in enumerate(coeffs))
        residual = sympy.expand(PeS * sympy.diff(P, x) - sympy.diff(P, x, 2) - PeDaS * P - f)
        eqs = sympy.Poly(residual, x).all_coeffs()
        sol = sympy.solve(eqs, coeffs, dict=True)[0]
        P = P.subs(sol).subs({k: 0 for k in coeffs})
        self._poly = [sympy.lambdify(x, sympy.diff(P, x, k), "numpy") for k in range(3)]

        r = np.roots([1.0, -Pe, Pe * Da]) if (Pe != 0 or Da != 0) else np.array([0.0, 0.0])
        if r.size < 2:
            r = np.concatenate([r, np.zeros(2 - r.size)])
        r = r.astype(complex)
        scale = max(1.0, abs(r[0]), abs(r[1]))
        self.double = abs(r[0] - r[1]) < 1e-7 * scale
        if self.double:
            lam = 0.5 * (r[0] + r[1])
            self.roots = (lam, lam)
        else:
            self.roots = (r[0], r[1])
        self.refs = tuple(a if z.real > 0 else -a for z in self.roots)
        left, right = _bc_tuple(bcs)
        M = np.zeros((2, 2), dtype=complex)
        rhs = np.zeros(2, dtype=complex)
        for i, (bc, xe) in enumerate(((left, -a), (right, a))):
            k = 0 if bc.kind == "D" else 1
            M[i] = [self._hom(j, xe, k) for j in range(2)]
            rhs[i] = bc.value - self._poly[k](xe)
        self.coef = np.linalg.solve(M, rhs)

    def _hom(self, j, x, k):
        lam = self.roots[j]
        e = np.exp(lam * (np.asarray(x, dtype=float) - self.refs[j]))
        if self.double and j == 1:
            g = (np.asarray(x, dtype=float) / self.a, 1.0 / self.a, 0.0)
            vals = (g[0], lam * g[0] + g[1], lam * lam * g[0] + 2 * lam * g[1])
            return e * vals[k]
        return e * lam**k

    def __call__(self, x, k=0):
        x = np.asarray(x, dtype=float)
        hom = sum(self.coef[j] * self._hom(j, x, k) for j in range(2))
        return np.real(hom) + self._poly[k](x) * np.ones_like(x)


# ---------------------------------------------------------------------------
# 2D finite differences


EDGES = ("left", "right", "bottom", "top")


def fd_solve_2d(Pe1, Pe2, PeDa, a, b, f, bc, nodes=401, nodes2=None) -> FdGrid:
    """5-point central scheme for Pe1*u_x + Pe2*u_y - lap(u) - PeDa*u = f.

    ``bc`` maps edge name to (kind, data) where data is a callable of the
    edge coordinate (x2 on left/right, x1 on bottom/top); Neumann data is
    the outward normal derivative. ``f`` is a callable f(x1, x2) or None.
    """
    n1 = nodes
    n2 = nodes2 or nodes
    if min(n1, n2) < 3:
        raise ValueError("need at least 3 nodes per axis")
    h1, h2 = 2 * a / (n1 - 1), 2 * b / (n2 - 1)
    if abs(Pe1) * h1 / 2 >= 1 or abs(Pe2) * h2 / 2 >= 1:
        need = int(math.ceil(max(abs(Pe1) * a, abs(Pe2) * b))) + 2
        raise StabilityError(f"|Pe_i|*h_i/2 >= 1; use at least {need} nodes per axis")
    x1 = np.linspace(-a, a, n1)
    x2 = np.linspace(-b, b, n2)
    idx = np.arange(n1 * n2).reshape(n1, n2)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    rhs = np.zeros((n1, n2)) if f is None else np.asarray(f(X1, X2), dtype=float) * np.ones((n1, n2))
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(v, r.shape).ravel())

    inner = idx[1:-1, 1:-1]
    add(inner, inner, np.full(inner.shape, 2 / h1**2 + 2 / h2**2 - PeDa))
    add(inner, idx[2:, 1:-1], np.full(inner.shape, Pe1 / (2 * h1) - 1 / h1**2))
    add(inner, idx[:-2, 1:-1], np.full(inner.shape, -Pe1 / (2 * h1) - 1 / h1**2))
    add(inner, idx[1:-1, 2:], np.full(inner.shape, Pe2 / (2 * h2) - 1 / h2**2))
    add(inner, idx[1:-1, :-2], np.full(inner.shape, -Pe2 / (2 * h2) - 1 / h2**2))

    kinds = {e: bc[e][0] for e in EDGES}
    # boundary nodes: corners go to a Dirichlet neighbour edge when there is one
    owner = {}
    for i in range(n1):
        for j in (0, n2 - 1):
            owner[(i, j)] = "bottom" if j == 0 else "top"
    for j in range(n2):
        for i in (0, n1 - 1):
            e = "left" if i == 0 else "right"
            if (i, j) in owner:
                other = owner[(i, j)]
                if kinds[e] == "D" or kinds[other] != "D":
                    owner[(i, j)] = e
            else:
                owner[(i, j)] = e
    r_list, c_list, v_list = [], [], []
    for (i, j), e in owner.items():
        kind, data = bc[e]
        t = x2[j] if e in ("left", "right") else x1[i]
        rhs[i, j] = float(data(t))
        r = idx[i, j]
        if kind == "D":
            r_list.append(r); c_list.append(r); v_list.append(1.0)
            continue
        # outward derivative, second order one-sided
        if e in ("left", "right"):
            s = 1 if e == "left" else -1  # step inward
            h = h1
            nb = (idx[i + s, j], idx[i + 2 * s, j])
        else:
            s = 1 if e == "bottom" else -1
            h = h2
            nb = (idx[i, j + s], idx[i, j + 2 * s])
        # d/dn (outward) = -(d/d inward)
        for c, v in ((r, -3.0), (nb[0], 4.0), (nb[1], -1.0)):
            r_list.append(r); c_list.append(c); v_list.append(-v / (2 * h))
    rows.append(np.array(r_list)); cols.append(np.array(c_list)); vals.append(np.array(v_list))
    A = scipy.sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(n1 * n2, n1 * n2))
    u = scipy.sparse.linalg.spsolve(A.tocsc(), rhs.ravel())
    return FdGrid(x1, u.reshape(n1, n2), h1, x2, h2)
