"""Orlicz functions and Luxemburg norms of coefficient sequences."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .coefficients import CoefficientSeries
from .errors import ConfigurationError, ValidationError

__all__ = [
    "LuxemburgResult",
    "OrliczFunction",
    "Regime",
    "classify_regime",
    "luxemburg_norm",
    "orlicz_from_config",
]


class Regime(str, enum.Enum):
    VANISHING = "Vanishing"  # phi(t) = o(t^2)
    BOUNDED = "Bounded"  # phi ~ t^2
    DIVERGENT = "Divergent"  # t^2 = o(phi(t))
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """Increasing convex ``phi`` with ``phi(0) = 0``, vectorized over numpy arrays.

    ``func`` must be side-effect free: norms may be evaluated from several
    threads at once.
    """

    func: Callable[[np.ndarray], np.ndarray]
    label: str
    config: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    @cached_property
    def regime(self) -> Regime:
        return classify_regime(self)

    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        p = float(p)
        if p < 1:
            raise ValidationError("PowerLaw needs p >= 1")
        return cls(lambda t: t**p, f"power:{p:g}", {"family": "power", "p": p})

    @classmethod
    def quadlog(cls, a: float) -> "OrliczFunction":
        """``t^2 (1 + log(1 + 1/t))^(-a)``: sub-quadratic but slower than any t^p, p > 2."""
        a = float(a)
        if a <= 0:
            raise ValidationError("QuadLog needs a > 0")

        def func(t):
            with np.errstate(divide="ignore"):
                out = t * t * (1.0 + np.log1p(1.0 / t)) ** (-a)
            return np.where(t > 0, out, 0.0)

        return cls(func, f"quadlog:{a:g}", {"family": "quadlog", "a": a})

    @classmethod
    def table(cls, knots) -> "OrliczFunction":
        """Piecewise-linear interpolation through ``knots``, linear beyond the last one."""
        pts = sorted((float(t), float(v)) for t, v in knots)
        if not pts or pts[0][0] != 0.0:
            pts.insert(0, (0.0, 0.0))
        ts = np.array([t for t, _ in pts])
        vs = np.array([v for _, v in pts])
        if vs[0] != 0 or np.any(np.diff(ts) <= 0):
            raise ValidationError("table knots need phi(0) = 0 and distinct abscissae")
        slopes = np.diff(vs) / np.diff(ts)
        if np.any(slopes < 0) or np.any(np.diff(slopes) < -1e-12 * np.abs(slopes[1:]).max(initial=1.0)):
            raise ValidationError("table knots are not monotone and convex")
        last = slopes[-1] if slopes.size else 0.0

        def func(t):
            inner = np.interp(t, ts, vs)
            return np.where(t > ts[-1], vs[-1] + last * (t - ts[-1]), inner)

        return cls(func, "table", {"family": "table", "knots": [list(p) for p in pts]})

    def validate(self, grid: np.ndarray | None = None) -> None:
        """Spot-check phi(0) = 0, monotonicity and midpoint convexity on a sample grid."""
        if grid is None:
            grid = np.concatenate([[0.0], np.logspace(-12, 3, 600)])
        v = self(grid)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError(f"{self.label}: phi must be finite and nonnegative")
        if self(np.array([0.0]))[0] != 0:
            raise ValidationError(f"{self.label}: phi(0) must be 0")
        if np.any(np.diff(v) < -1e-12 * np.abs(v[1:])):
            raise ValidationError(f"{self.label}: phi is not nondecreasing")
        t1, t2 = grid[:-1], grid[1:]
        mid = self(0.5 * (t1 + t2))
        chord = 0.5 * (self(t1) + self(t2))
        if np.any(mid > chord * (1 + 1e-12) + 1e-300):
            raise ValidationError(f"{self.label}: midpoint convexity fails")

    def to_json(self) -> dict:
        return dict(self.config)


def orlicz_from_config(cfg) -> OrliczFunction:
    """Build from ``{"family": ...}`` or a ``family:param`` string such as ``power:4``."""
    if isinstance(cfg, OrliczFunction):
        return cfg
    if isinstance(cfg, str):
        fam, _, arg = cfg.partition(":")
        cfg = {"family": fam}
        if fam == "power":
            cfg["p"] = float(arg)
        elif fam == "quadlog":
            cfg["a"] = float(arg)
        else:
            raise ValidationError(f"unknown Orlicz family spec {fam!r}")
    fam = cfg.get("family")
    if fam == "power":
        phi = OrliczFunction.power(cfg["p"])
    elif fam == "quadlog":
        phi = OrliczFunction.quadlog(cfg["a"])
    elif fam == "table":
        phi = OrliczFunction.table(cfg["knots"])
    else:
        raise ValidationError(f"unknown Orlicz family {fam!r}")
    phi.validate()
    return phi


def classify_regime(phi: OrliczFunction) -> Regime:
    """Compare phi(t) with t^2 on the dyadic window t = 2^-10 .. 2^-40."""
    j = np.arange(10, 41, dtype=float)
    t = 2.0**-j
    vals = phi(t)
    if np.any(~np.isfinite(vals)) or np.any(vals < 0):
        raise ValidationError(f"{phi.label}: phi returned NaN or negative values")
    rho = vals / t**2
    r0 = rho[0]
    vanishing = rho.min() < 1e-3 * r0
    divergent = rho.max() > 1e3 * r0
    if vanishing and not divergent:
        return Regime.VANISHING
    if divergent and not vanishing:
        return Regime.DIVERGENT
    if rho.min() > 0 and rho.max() / rho.min() <= 10:
        return Regime.BOUNDED
    return Regime.UNCLASSIFIED


@dataclass(frozen=True)
class LuxemburgResult:
    """Certified bracket ``[lo, hi]`` around the norm; ``value`` is the safe side ``hi``."""

    value: float
    bracket: tuple[float, float]
    sum_at_value: float


def _unit_level(phi: OrliczFunction) -> float:
    # smallest dyadically-bracketed t with phi(t) >= 1
    lo, hi = 0.0, 1.0
    while phi(np.array([hi]))[0] < 1.0:
        lo, hi = hi, 2.0 * hi
        if hi > 2.0**64:
            raise ConfigurationError(f"{phi.label} never reaches 1")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if phi(np.array([mid]))[0] >= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def luxemburg_norm(
    phi: OrliczFunction, s: CoefficientSeries | np.ndarray, rel_tol: float = 1e-10
) -> LuxemburgResult:
    """``inf{lam > 0 : sum_j phi(|c_j| / lam) <= 1}`` by bisection on the modular."""
    if rel_tol <= 0:
        raise ValidationError("rel_tol must be positive")
    c = s.coeffs if isinstance(s, CoefficientSeries) else np.asarray(s)
    a = np.abs(c)
    a = a[a > 0]
    if a.size == 0:
        return LuxemburgResult(0.0, (0.0, 0.0), 0.0)

    def modular(lam):
        return float(np.sum(phi(a / lam)))

    lo = float(a.max()) / _unit_level(phi)
    m_lo = modular(lo)
    if m_lo <= 1.0:
        return LuxemburgResult(lo, (lo, lo), m_lo)
    l1 = math.fsum(a)
    hi = l1
    m_hi = modular(hi)
    while m_hi > 1.0:
        hi *= 2.0
        if hi > 2.0**64 * l1:
            raise ConfigurationError(f"Luxemburg bracket for {phi.label} did not close")
        m_hi = modular(hi)
    lo = max(lo, hi / 2.0) if hi > l1 else lo
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        m = modular(mid)
        if m <= 1.0:
            hi, m_hi = mid, m
        else:
            lo = mid
    return LuxemburgResult(hi, (lo, hi), m_hi)
