"""Full-range trigonometric series on [-a, a] (and [-a, a] x [-b, b]).

Coefficients are stored unweighted. A 1D series evaluates as

    s(x) = sum_m mu_m * (V1m cos(alpha_m x) + V2m sin(alpha_m x)),

with alpha_m = m*pi/a and mu_0 = 1/2, mu_m = 1 otherwise, so that
V1m = (1/a) * int_{-a}^{a} f(x) cos(alpha_m x) dx (and V2m with sin).
The 2D series uses mu_m * mu_n on the tensor product of the two bases,
with the four parity products cc, cs, sc, ss (first letter refers to x1).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np

PARITIES = ("cc", "cs", "sc", "ss")
MAX_DERIVATIVE = 2
MAX_POLY_DEGREE = 64


class DomainError(ValueError):
    """Evaluation point outside the series interval."""


class UnsupportedSourceError(ValueError):
    """Source variant cannot be used by the requested operation."""


class QuadratureWarning(RuntimeWarning):
    """Adaptive quadrature stopped before reaching its tolerance."""


def mu(m):
    """Full-range series weight: 1/2 for the mean mode, 1 otherwise."""
    return np.where(np.asarray(m) == 0, 0.5, 1.0)


def _check_domain(x, half_length, name="x"):
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * half_length
    if np.any(np.abs(x) > half_length + tol):
        raise DomainError(f"{name} outside [-{half_length}, {half_length}]")
    return x


def _check_order(k):
    if k < 0 or k > MAX_DERIVATIVE:
        raise ValueError(f"derivative order {k} not in 0..{MAX_DERIVATIVE}")


def trig_derivatives(alpha, x, k):
    """Return (d^k/dx^k cos(alpha x), d^k/dx^k sin(alpha x)).

    ``alpha`` and ``x`` broadcast against each other.
    """
    arg = alpha * x
    c, s = np.cos(arg), np.sin(arg)
    if k == 0:
        return c, s
    if k == 1:
        return -alpha * s, alpha * c
    if k == 2:
        a2 = alpha * alpha
        return -a2 * c, -a2 * s
    raise ValueError(f"derivative order {k} not supported")


# ---------------------------------------------------------------------------
# 1D series


@dataclass(frozen=True)
class TrigSeries1D:
    a: float
    cos_coeffs: np.ndarray  # V1m, m = 0..M
    sin_coeffs: np.ndarray  # V2m, m = 1..M

    def __post_init__(self):
        c = np.array(self.cos_coeffs, dtype=float).ravel()
        s = np.array(self.sin_coeffs, dtype=float).ravel()
        if self.a <= 0:
            raise ValueError("half-length must be positive")
        if c.size < 1 or s.size != c.size - 1:
            raise ValueError("need M+1 cosine and M sine coefficients")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ValueError("series coefficients must be finite")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)

    @classmethod
    def zeros(cls, a, M):
        return cls(a, np.zeros(M + 1), np.zeros(M))

    @property
    def M(self) -> int:
        return self.cos_coeffs.size - 1

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.M + 1) * math.pi / self.a

    def as_vector(self) -> np.ndarray:
        """Coefficients stacked as [V10, V11, V21, V12, V22, ...]."""
        v = np.empty(2 * self.M + 1)
        v[0] = self.cos_coeffs[0]
        v[1::2] = self.cos_coeffs[1:]
        v[2::2] = self.sin_coeffs
        return v

    @classmethod
    def from_vector(cls, a, v):
        v = np.asarray(v, dtype=float)
        return cls(a, np.concatenate([[v[0]], v[1::2]]), v[2::2])

    def norm(self) -> float:
        return float(np.max(np.abs(self.as_vector()), initial=0.0))

    def __call__(self, x, k=0):
        return eval_series_1d(self, x, k)

    def __add__(self, other):
        if not isinstance(other, TrigSeries1D):
            return NotImplemented
        if other.a != self.a or other.M != self.M:
            raise ValueError("series differ in interval or truncation")
        return TrigSeries1D(self.a, self.cos_coeffs + other.cos_coeffs,
                            self.sin_coeffs + other.sin_coeffs)

    def scaled(self, factor):
        return TrigSeries1D(self.a, factor * self.cos_coeffs, factor * self.sin_coeffs)

    def to_dict(self):
        return {"a": self.a, "b": None, "M": self.M, "N": 0,
                "cos": self.cos_coeffs.tolist(), "sin": self.sin_coeffs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["a"], d["cos"], d["sin"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def eval_series_1d(s: TrigSeries1D, x, k: int = 0):
    """Value of the k-th derivative of ``s`` at ``x`` (scalar or array)."""
    _check_order(k)
    x = _check_domain(x, s.a)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    m = np.arange(s.M + 1)
    alpha = m * math.pi / s.a
    c, sn = trig_derivatives(alpha[:, None], xs[None, :], k)
    w = mu(m)
    sin_full = np.concatenate([[0.0], s.sin_coeffs])
    out = (w * s.cos_coeffs) @ c + (w * sin_full) @ sn
    return float(out[0]) if scalar else out.reshape(x.shape)


# ---------------------------------------------------------------------------
# 2D series


@dataclass(frozen=True)
class TrigSeries2D:
    a: float
    b: float
    coeffs: np.ndarray  # shape (M+1, N+1, 4), parity order cc, cs, sc, ss

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[2] != 4:
            raise ValueError("2D coefficients must have shape (M+1, N+1, 4)")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("half-lengths must be positive")
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        # structurally absent parities
        c[0, :, 2:] = 0.0
        c[:, 0, 1] = 0.0
        c[:, 0, 3] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, a, b, M, N):
        return cls(a, b, np.zeros((M + 1, N + 1, 4)))

    @property
    def M(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def N(self) -> int:
        return self.coeffs.shape[1] - 1

    def norm(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))

    def __call__(self, x1, x2, k1=0, k2=0):
        return eval_series_2d(self, x1, x2, k1, k2)

    def __add__(self, other):
        if not isinstance(other, TrigSeries2D):
            return NotImplemented
        if (other.a, other.b) != (self.a, self.b) or other.coeffs.shape != self.coeffs.shape:
            raise ValueError("series differ in rectangle or truncation")
        return TrigSeries2D(self.a, self.b, self.coeffs + other.coeffs)

    def scaled(self, factor):
        return TrigSeries2D(self.a, self.b, factor * self.coeffs)

    def _axis_factors(self, x1, x2, k1, k2):
        m = np.arange(self.M + 1)
        n = np.arange(self.N + 1)
        c1, s1 = trig_derivatives((m * math.pi / self.a)[:, None], np.atleast_1d(x1)[None, :], k1)
        c2, s2 = trig_derivatives((n * math.pi / self.b)[:, None], np.atleast_1d(x2)[None, :], k2)
        w1, w2 = mu(m)[:, None], mu(n)[:, None]
        return w1 * c1, w1 * s1, w2 * c2, w2 * s2

    def eval_grid(self, x1, x2, k1=0, k2=0):
        """Values on the tensor grid x1 (rows) by x2 (columns)."""
        _check_order(k1 + k2)
        x1 = _check_domain(x1, self.a, "x1")
        x2 = _check_domain(x2, self.b, "x2")
        c1, s1, c2, s2 = self._axis_factors(x1, x2, k1, k2)
        C = self.coeffs
        return (c1.T @ C[:, :, 0] @ c2 + c1.T @ C[:, :, 1] @ s2
                + s1.T @ C[:, :, 2] @ c2 + s1.T @ C[:, :, 3] @ s2)

    def trace(self, axis, value, k=0):
        """1D series of the k-th normal derivative on the line x_axis = value.

        ``axis`` is 1 (line x1 = value, series in x2) or 2 (line x2 = value,
        series in x1). Exact: no quadrature involved.
        """
        if axis == 1:
            _check_domain(value, self.a, "x1")
            m = np.arange(self.M + 1)
            c, s = trig_derivatives(m * math.pi / self.a, float(value), k)
            w = mu(m) * c, mu(m) * s
            C = self.coeffs
            cos_part = w[0] @ C[:, :, 0] + w[1] @ C[:, :, 2]
            sin_part = w[0] @ C[:, :, 1] + w[1] @ C[:, :, 3]
            return TrigSeries1D(self.b, cos_part, sin_part[1:])
        if axis == 2:
            _check_domain(value, self.b, "x2")
            n = np.arange(self.N + 1)
            c, s = trig_derivatives(n * math.pi / self.b, float(value), k)
            w = mu(n) * c, mu(n) * s
            C = self.coeffs
            cos_part = C[:, :, 0] @ w[0] + C[:, :, 1] @ w[1]
            sin_part = C[:, :, 2] @ w[0] + C[:, :, 3] @ w[1]
            return TrigSeries1D(self.a, cos_part, sin_part[1:])
        raise ValueError("axis must be 1 or 2")

    def to_dict(self):
        return {"a": self.a, "b": self.b, "M": self.M, "N": self.N,
                "coeffs": self.coeffs.ravel().tolist()}

    @classmethod
    def from_dict(cls, d):
        M, N = d["M"], d["N"]
        return cls(d["a"], d["b"], np.asarray(d["coeffs"], dtype=float).reshape(M + 1, N + 1, 4))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def eval_series_2d(s: TrigSeries2D, x1, x2, k1: int = 0, k2: int = 0):
    """Pointwise value of the (k1, k2) partial derivative (x1, x2 broadcast)."""
    _check_order(k1 + k2)
    x1 = _check_domain(x1, s.a, "x1")
    x2 = _check_domain(x2, s.b, "x2")
    x1b, x2b = np.broadcast_arrays(x1, x2)
    flat1, flat2 = x1b.ravel(), x2b.ravel()
    c1, s1, c2, s2 = s._axis_factors(flat1, flat2, k1, k2)
    C = s.coeffs
    out = (np.einsum("mp,mn,np->p", c1, C[:, :, 0], c2)
           + np.einsum("mp,mn,np->p", c1, C[:, :, 1], s2)
           + np.einsum("mp,mn,np->p", s1, C[:, :, 2], c2)
           + np.einsum("mp,mn,np->p", s1, C[:, :, 3], s2))
    if x1b.ndim == 0:
        return float(out[0])
    return out.reshape(x1b.shape)


# ---------------------------------------------------------------------------
# Sources


class SourceModel:
    """Base class for 1D source descriptions.

    ``values(x, a)`` evaluates pointwise; ``a`` is the half-length of the
    frame the caller works in (only polynomials without an explicit scale
    depend on it).
    """

    pointwise = True

    def values(self, x, a):
        raise NotImplementedError

    def fourier(self, a, M) -> TrigSeries1D:
        raise NotImplementedError

    def translated(self, shift, a) -> "SourceModel":
        """The same source seen from coordinates x' = x - shift."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(SourceModel):
    """f(x) = sum_j coeffs[j] * (x / scale)^j; scale defaults to the frame half-length."""

    coeffs: tuple
    scale: float | None = None

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.coeffs))
        if len(c) == 0:
            c = (0.0,)
        if len(c) - 1 > MAX_POLY_DEGREE:
            raise ValueError(f"polynomial degree above {MAX_POLY_DEGREE}")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def in_frame(self, a) -> np.ndarray:
        """Coefficients with respect to powers of (x / a)."""
        s = a if self.scale is None else self.scale
        r = a / s
        return np.array(self.coeffs) * r ** np.arange(len(self.coeffs))

    def values(self, x, a):
        t = np.asarray(x, dtype=float) / a
        return np.polynomial.polynomial.polyval(t, self.in_frame(a))

    def fourier(self, a, M):
        c = self.in_frame(a)
        Ic, Is = _monomial_trig_integrals(len(c) - 1, M)
        return TrigSeries1D(a, c @ Ic, (c @ Is)[1:])

    def translated(self, shift, a):
        # p(x' + shift) expressed in powers of x'/a
        P = np.polynomial.Polynomial(self.in_frame(a))  # in t = x/a
        t_shift = shift / a
        Q = P(np.polynomial.Polynomial([t_shift, 1.0]))
        coef = np.zeros(len(self.coeffs))
        coef[: Q.coef.size] = Q.coef
        return Polynomial(tuple(coef), scale=a)

    def __add__(self, other):
        if not isinstance(other, Polynomial) or other.scale != self.scale:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return Polynomial(tuple(c), self.scale)

    def to_dict(self):
        return {"type": "polynomial", "coeffs": list(self.coeffs), "scale": self.scale}


@dataclass(frozen=True)
class DiracDelta(SourceModel):
    x0: float
    strength: float = 1.0

    pointwise = False

    def values(self, x, a):
        raise UnsupportedSourceError("a Dirac delta has no pointwise values")

    def fourier(self, a, M):
        if not abs(self.x0) < a:
            raise ValueError("delta position must lie strictly inside the interval")
        alpha = np.arange(M + 1) * math.pi / a
        scale = self.strength / a
        return TrigSeries1D(a, scale * np.cos(alpha * self.x0), scale * np.sin(alpha[1:] * self.x0))

    def translated(self, shift, a):
        return DiracDelta(self.x0 - shift, self.strength)

    def to_dict(self):
        return {"type": "delta", "x0": self.x0, "strength": self.strength}


@dataclass(frozen=True)
class RectPulse(SourceModel):
    """Box of half-width w centred at x0 whose integral is ``area``."""

    x0: float
    half_width: float
    area: float = 1.0

    @property
    def height(self) -> float:
        return self.area / (2.0 * self.half_width)

    def values(self, x, a):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x - self.x0) <= self.half_width
        return np.where(inside, self.height, 0.0)

    def fourier(self, a, M):
        lo, hi = self.x0 - self.half_width, self.x0 + self.half_width
        if self.half_width <= 0 or lo < -a * (1 + 1e-12) or hi > a * (1 + 1e-12):
            raise ValueError("pulse support must lie inside the interval")
        alpha = np.arange(1, M + 1) * math.pi / a
        h = self.height / a
        c = np.empty(M + 1)
        c[0] = h * (hi - lo)
        c[1:] = h * (np.sin(alpha * hi) - np.sin(alpha * lo)) / alpha
        s = h * (np.cos(alpha * lo) - np.cos(alpha * hi)) / alpha
        return TrigSeries1D(a, c, s)

    def translated(self, shift, a):
        return RectPulse(self.x0 - shift, self.half_width, self.area)

    def to_dict(self):
        return {"type": "pulse", "x0": self.x0, "half_width": self.half_width, "area": self.area}


@dataclass(frozen=True)
class Sampled(SourceModel):
    """Source given by a vectorised callable f(x)."""

    func: Callable
    shift: float = 0.0

    def values(self, x, a):
        return np.asarray(self.func(np.asarray(x, dtype=float) + self.shift), dtype=float) * np.ones_like(x, dtype=float)

    def fourier(self, a, M):
        return simpson_coeffs(lambda x: self.values(x, a), a, M)

    def translated(self, shift, a):
        return Sampled(self.func, self.shift + shift)

    def to_dict(self):
        raise TypeError("sampled sources cannot be serialised")


def source_from_dict(d) -> SourceModel:
    kind = d["type"]
    if kind == "polynomial":
        return Polynomial(tuple(d["coeffs"]), d.get("scale"))
    if kind == "constant":
        return Polynomial((d["value"],))
    if kind == "delta":
        return DiracDelta(d["x0"], d.get("strength", 1.0))
    if kind == "pulse":
        return RectPulse(d["x0"], d["half_width"], d.get("area", 1.0))
    raise ValueError(f"unknown source type {kind!r}")


@lru_cache(maxsize=64)
def _monomial_trig_integrals(degree, M):
    """Tables I_c[j, m] = int_{-1}^{1} t^j cos(m pi t) dt and I_s likewise.

    The integration-by-parts recurrence loses digits quickly in floating
    point once j > m*pi, so it runs in extended precision.
    """
    Ic = np.zeros((degree + 1, M + 1))
    Is = np.zeros((degree + 1, M + 1))
    for j in range(degree + 1):
        Ic[j, 0] = 2.0 / (j + 1) if j % 2 == 0 else 0.0
    with mpmath.workdps(30 + 2 * degree):
        for m in range(1, M + 1):
            k = m * mpmath.pi
            sign = -1 if m % 2 else 1  # cos(k)
            C = mpmath.mpf(0)
            S = mpmath.mpf(0)
            for j in range(1, degree + 1):
                C_new = -(j / k) * S
                S_new = -sign * (1 - (-1) ** j) / k + (j / k) * C
                C, S = C_new, S_new
                Ic[j, m] = float(C)
                Is[j, m] = float(S)
    Ic.setflags(write=False)
    Is.setflags(write=False)
    return Ic, Is


# ---------------------------------------------------------------------------
# Quadrature


def _simpson_weights(n, h):
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _coeffs_from_samples(x, wf, a, M, chunk=8192):
    cos_part = np.zeros(M + 1)
    sin_part = np.zeros(M + 1)
    alpha = np.arange(M + 1) * math.pi / a
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        arg = alpha[:, None] * xs[None, :]
        cos_part += np.cos(arg) @ wf[start:start + chunk]
        sin_part += np.sin(arg) @ wf[start:start + chunk]
    return cos_part / a, sin_part / a


def simpson_coeffs(func, a, M, panels=None, rtol=1e-10, max_doublings=6):
    """Fourier coefficients of ``func`` by composite Simpson with doubling.

    Starts from 16*(M+1) panels and doubles until two successive results
    agree to ``rtol`` (relative to the largest coefficient). Emits a
    QuadratureWarning carrying the achieved estimate otherwise.
    """
    n = panels or 16 * (M + 1)
    n += n % 2
    x = np.linspace(-a, a, n + 1)
    f = np.asarray(func(x), dtype=float)
    prev = _coeffs_from_samples(x, f * _simpson_weights(n, 2 * a / n), a, M)
    err = math.inf
    for _ in range(max_doublings):
        n *= 2
        h = 2 * a / n
        x_new = -a + h * np.arange(1, n, 2)
        f_all = np.empty(n + 1)
        f_all[0::2] = f
        f_all[1::2] = np.asarray(func(x_new), dtype=float)
        f = f_all
        x = np.linspace(-a, a, n + 1)
        cur = _coeffs_from_samples(x, f * _simpson_weights(n, h), a, M)
        scale = max(np.max(np.abs(cur[0])), np.max(np.abs(cur[1])), 1e-300)
        err = max(np.max(np.abs(cur[0] - prev[0])), np.max(np.abs(cur[1] - prev[1]))) / scale
        prev = cur
        if err < rtol:
            break
    else:
        warnings.warn(f"Simpson coefficients not converged: relative change {err:.3e}",
                      QuadratureWarning, stacklevel=2)
    return TrigSeries1D(a, prev[0], prev[1][1:])


def fourier_coeffs(f: SourceModel, a: float, M: int) -> TrigSeries1D:
    """Full-range Fourier coefficients of ``f`` on [-a, a] up to mode M."""
    if M < 0:
        raise ValueError("M must be non-negative")
    return f.fourier(a, M)


# ---------------------------------------------------------------------------
# 2D sources


class SourceModel2D:
    def values(self, x1, x2, a, b):
        raise NotImplementedError

    def fourier(self, a, b, M, N) -> TrigSeries2D:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero2D(SourceModel2D):
    def values(self, x1, x2, a, b):
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)

    def fourier(self, a, b, M, N):
        return TrigSeries2D.zeros(a, b, M, N)


@dataclass(frozen=True)
class Separable2D(SourceModel2D):
    """f(x1, x2) = g(x1) * h(x2) for two 1D sources."""

    g: SourceModel
    h: SourceModel
    weight: float = 1.0

    def values(self, x1, x2, a, b):
        return self.weight * self.g.values(x1, a) * self.h.values(x2, b)

    def fourier(self, a, b, M, N):
        G = self.g.fourier(a, M)
        H = self.h.fourier(b, N)
        gc, gs = G.cos_coeffs, np.concatenate([[0.0], G.sin_coeffs])
        hc, hs = H.cos_coeffs, np.concatenate([[0.0], H.sin_coeffs])
        C = np.stack([np.outer(gc, hc), np.outer(gc, hs), np.outer(gs, hc), np.outer(gs, hs)], axis=-1)
        return TrigSeries2D(a, b, self.weight * C)


def Constant2D(value) -> Separable2D:
    return Separable2D(Polynomial((float(value),)), Polynomial((1.0,)))


@dataclass(frozen=True)
class Sum2D(SourceModel2D):
    terms: tuple

    def values(self, x1, x2, a, b):
        return sum(t.values(x1, x2, a, b) for t in self.terms)

    def fourier(self, a, b, M, N):
        out = TrigSeries2D.zeros(a, b, M, N)
        for t in self.terms:
            out = out + t.fourier(a, b, M, N)
        return out


@dataclass(frozen=True)
class Sampled2D(SourceModel2D):
    """Vectorised callable f(x1, x2); tensor Simpson with up to two doublings."""

    func: Callable

    def values(self, x1, x2, a, b):
        return np.asarray(self.func(x1, x2), dtype=float)

    def fourier(self, a, b, M, N, rtol=1e-10, max_doublings=2):
        n1, n2 = 16 * (M + 1), 16 * (N + 1)
        prev = None
        for level in range(max_doublings + 1):
            x1 = np.linspace(-a, a, n1 + 1)
            x2 = np.linspace(-b, b, n2 + 1)
            F = self.values(x1[:, None], x2[None, :], a, b)
            F = F * _simpson_weights(n1, 2 * a / n1)[:, None] * _simpson_weights(n2, 2 * b / n2)[None, :]
            m, n = np.arange(M + 1), np.arange(N + 1)
            c1, s1 = np.cos(np.outer(m * math.pi / a, x1)), np.sin(np.outer(m * math.pi / a, x1))
            c2, s2 = np.cos(np.outer(n * math.pi / b, x2)), np.sin(np.outer(n * math.pi / b, x2))
            C = np.stack([c1 @ F @ c2.T, c1 @ F @ s2.T, s1 @ F @ c2.T, s1 @ F @ s2.T], axis=-1) / (a * b)
            if prev is not None:
                err = np.max(np.abs(C - prev)) / max(np.max(np.abs(C)), 1e-300)
                if err < rtol:
                    return TrigSeries2D(a, b, C)
            prev = C
            n1, n2 = 2 * n1, 2 * n2
        warnings.warn(f"2D Simpson coefficients not converged: relative change {err:.3e}",
                      QuadratureWarning, stacklevel=2)
        return TrigSeries2D(a, b, prev)


def fourier_coeffs_2d(f: SourceModel2D, a, b, M, N) -> TrigSeries2D:
    if isinstance(f, Zero2D) or f is None:
        return TrigSeries2D.zeros(a, b, M, N)
    return f.fourier(a, b, M, N)
