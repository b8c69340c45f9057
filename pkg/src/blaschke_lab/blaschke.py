"""Finite Blaschke products, their boundary phase, and arc preimages.

A zero ``lam`` contributes the factor ``(lam/|lam|)(lam - z)/(1 - conj(lam) z)``;
a zero at the origin contributes ``z``.  On the unit circle
``B(e^{it}) = exp(i psi(t))`` with ``psi`` strictly increasing, and every
derivative of ``psi`` has a closed form obtained from the Poisson kernel
expansion

    psi'(t) = sum_j Re(1 + 2 u_j/(1 - u_j)),   u_j = lam_j e^{-it},

so that ``psi^{(m+1)}(t) = sum_j Re(2 (-i)^m Li_{-m}(u_j))`` for ``m >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import brentq

from .errors import MonomialError, ResolutionError, ValidationError

TWO_PI = 2.0 * math.pi

__all__ = [
    "ArcSet",
    "BlaschkeProduct",
    "PhaseCensus",
    "phase_census",
    "preimage_of_arc",
]


@lru_cache(maxsize=None)
def _eulerian_row(m: int) -> tuple[int, ...]:
    # A(m, k), k = 0..m-1, with A(0, .) := (1,)
    if m == 0:
        return (1,)
    return tuple(
        sum((-1) ** j * math.comb(m + 1, j) * (k + 1 - j) ** m for j in range(k + 1))
        for k in range(m)
    )


def _neg_polylog(m: int, u: np.ndarray) -> np.ndarray:
    """sum_{n>=1} n^m u^n for |u| < 1, as the rational closed form."""
    row = _eulerian_row(m)
    poly = np.zeros_like(u)
    for a in reversed(row):
        poly = poly * u + a
    return u * poly / (1.0 - u) ** (m + 1)


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product given by its zeros (repeated for multiplicity)."""

    zeros: tuple[complex, ...]

    def __post_init__(self):
        zs = tuple(complex(z) for z in self.zeros)
        if not zs:
            raise ValidationError("a Blaschke product needs at least one zero")
        for z in zs:
            if not (abs(z) < 1.0) or not np.isfinite(z):
                raise ValidationError(f"zero {z!r} is not in the open unit disk")
        object.__setattr__(self, "zeros", zs)

    @classmethod
    def from_zeros(cls, zeros: Iterable) -> "BlaschkeProduct":
        return cls(tuple(_as_complex(z) for z in zeros))

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def origin_multiplicity(self) -> int:
        return sum(1 for z in self.zeros if z == 0)

    def is_monomial(self) -> bool:
        return self.origin_multiplicity == self.degree

    @cached_property
    def _grouped(self) -> tuple[np.ndarray, np.ndarray]:
        # distinct zeros with their multiplicities; B^n only rescales the weights
        distinct: dict[complex, int] = {}
        for z in self.zeros:
            distinct[z] = distinct.get(z, 0) + 1
        lam = np.array(list(distinct.keys()), dtype=complex)
        mult = np.array(list(distinct.values()), dtype=float)
        return lam, mult

    def power(self, n: int) -> "BlaschkeProduct":
        if n < 1:
            raise ValidationError("power must be a positive integer")
        return BlaschkeProduct(self.zeros * n)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        lam, mult = self._grouped
        out = np.ones_like(z)
        for a, m in zip(lam, mult):
            if a == 0:
                out = out * z ** int(m)
                continue
            den = 1.0 - np.conj(a) * z
            if np.any(np.abs(den) < 1e-14):
                raise ValidationError(f"evaluation point too close to the pole of the factor at {a}")
            out = out * (np.exp(1j * np.angle(a)) * (a - z) / den) ** int(m)
        return out[()] if out.ndim == 0 else out

    def evaluate(self, z):
        return self(z)

    def phase_derivative(self, theta, order: int = 1):
        """``order``-th derivative of the boundary phase psi at angle(s) ``theta``."""
        if order < 1:
            raise ValueError("order must be >= 1; use phase() for psi itself")
        theta = np.asarray(theta, dtype=float)
        lam, mult = self._grouped
        m = order - 1
        total = np.zeros(theta.shape)
        if m == 0:
            total += self.degree
        nz = lam != 0
        if np.any(nz):
            u = lam[nz][:, None] * np.exp(-1j * theta.reshape(1, -1))
            terms = 2.0 * (-1j) ** m * _neg_polylog(m, u)
            total += (mult[nz] @ terms.real).reshape(theta.shape)
        return total[()] if total.ndim == 0 else total

    @cached_property
    def phase_at_zero(self) -> float:
        return float(np.angle(self(1.0 + 0j)))

    def phase(self, theta):
        """Continuous argument psi(theta) of B(e^{i theta}), psi(0) = Arg B(1)."""
        theta = np.asarray(theta, dtype=float)
        lam, mult = self._grouped
        out = self.phase_at_zero + self.degree * theta
        nz = lam != 0
        if np.any(nz):
            u = lam[nz][:, None] * np.exp(-1j * theta.reshape(1, -1))
            corr = np.angle(1.0 - u) - np.angle(1.0 - lam[nz])[:, None]
            out = out + 2.0 * (mult[nz] @ corr).reshape(theta.shape)
        return out[()] if np.ndim(out) == 0 else out

    def to_json(self) -> dict:
        return {"zeros": [[z.real, z.imag] for z in self.zeros]}

    @classmethod
    def from_json(cls, obj) -> "BlaschkeProduct":
        if isinstance(obj, dict):
            obj = obj["zeros"]
        return cls.from_zeros(obj)


def _as_complex(z) -> complex:
    if isinstance(z, (list, tuple)):
        if len(z) != 2:
            raise ValidationError(f"cannot read {z!r} as a complex number")
        return complex(float(z[0]), float(z[1]))
    if isinstance(z, str):
        return complex(z.replace(" ", "").replace("i", "j"))
    return complex(z)


# ---------------------------------------------------------------------------
# Arc sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcSet:
    """Finite union of half-open arcs ``[a, b)`` of ``[0, 2 pi)``, sorted and disjoint."""

    arcs: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "arcs", _normalize_arcs(self.arcs))

    @classmethod
    def arc(cls, a: float, b: float) -> "ArcSet":
        return cls(((a, b),))

    @classmethod
    def full(cls) -> "ArcSet":
        return cls(((0.0, TWO_PI),))

    @property
    def measure(self) -> float:
        return math.fsum(b - a for a, b in self.arcs) / TWO_PI

    def __len__(self):
        return len(self.arcs)

    @cached_property
    def _bounds(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([x for x, _ in self.arcs], dtype=float)
        b = np.array([y for _, y in self.arcs], dtype=float)
        return a, b

    def contains(self, theta):
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        a, b = self._bounds
        if a.size == 0:
            return np.zeros(theta.shape, dtype=bool)
        idx = np.searchsorted(a, theta, side="right") - 1
        ok = idx >= 0
        res = np.zeros(theta.shape, dtype=bool)
        res[ok] = theta[ok] < b[idx[ok]]
        return res

    def intersect(self, other: "ArcSet") -> "ArcSet":
        out = []
        i = j = 0
        A, B = self.arcs, other.arcs
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return ArcSet(tuple(out))

    def is_single_proper_arc(self) -> bool:
        return len(self.arcs) == 1 and self.measure < 1.0

    def grid(self, n: int) -> np.ndarray:
        """About ``n`` angles covering the closure of the set, spread by arc length."""
        if not self.arcs:
            return np.empty(0)
        a, b = self._bounds
        lengths = b - a
        counts = np.maximum(2, np.ceil(n * lengths / lengths.sum()).astype(int))
        return np.concatenate([np.linspace(x, y, c) for x, y, c in zip(a, b, counts)])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` independent uniform angles in the set."""
        a, b = self._bounds
        cum = np.concatenate([[0.0], np.cumsum(b - a)])
        s = rng.uniform(0.0, cum[-1], size=n)
        idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(a) - 1)
        return a[idx] + (s - cum[idx])

    def to_json(self) -> dict:
        return {"arcs": [[float(a), float(b)] for a, b in self.arcs], "measure": self.measure}

    @classmethod
    def from_json(cls, obj) -> "ArcSet":
        arcs = obj["arcs"] if isinstance(obj, dict) else obj
        return cls(tuple((float(a), float(b)) for a, b in arcs))


def _normalize_arcs(arcs) -> tuple[tuple[float, float], ...]:
    pieces = []
    for a, b in arcs:
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValidationError(f"arc [{a}, {b}) has non-finite endpoints")
        if b - a >= TWO_PI:
            return ((0.0, TWO_PI),)
        if b <= a:
            continue
        a0 = a % TWO_PI
        b0 = a0 + (b - a)
        if b0 > TWO_PI:
            pieces.append((a0, TWO_PI))
            pieces.append((0.0, b0 - TWO_PI))
        else:
            pieces.append((a0, b0))
    pieces.sort()
    merged: list[list[float]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged if b > a)


# ---------------------------------------------------------------------------
# Phase census
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseCensus:
    """Zeros of psi'' on [0, 2 pi) with their orders N (psi^{(N)} != 0 there)."""

    zeros_of_psi2: tuple[float, ...] = ()
    multiplicities: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def s(self) -> int:
        return len(self.zeros_of_psi2)

    @property
    def N(self) -> int:
        return max(self.multiplicities, default=0)

    def to_json(self) -> dict:
        return {
            "zeros_of_psi2": list(self.zeros_of_psi2),
            "multiplicities": list(self.multiplicities),
            "s": self.s,
            "N": self.N,
        }


def _cyclic_gap(x: float, y: float) -> float:
    d = abs(x - y) % TWO_PI
    return min(d, TWO_PI - d)


def _sign_change_roots(f, theta, values, xtol):
    roots = []
    ext_t = np.append(theta, TWO_PI)
    ext_v = np.append(values, values[0])
    for i in np.flatnonzero(values == 0.0):
        roots.append(float(theta[i]))
    for i in np.flatnonzero(ext_v[:-1] * ext_v[1:] < 0):
        roots.append(brentq(f, ext_t[i], ext_t[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    return roots


def phase_census(
    B: BlaschkeProduct,
    tol_xi: float = 1e-10,
    tol_mult: float = 1e-6,
    samples_per_degree: int = 4096,
    n_max: int = 8,
    grid_size: int | None = None,
) -> PhaseCensus:
    """Locate the zeros of psi_B'' and the order at which psi_B stops vanishing.

    Odd-order zeros are found as sign changes of psi''; even-order ones as
    sign changes of psi''' where psi'' is itself below ``tol_mult`` times its
    grid maximum.  An order ``N`` is accepted at the first derivative
    ``psi^{(N)}`` exceeding ``tol_mult`` times its own grid maximum.
    """
    if B.is_monomial():
        raise MonomialError("psi_B'' vanishes identically for a power of z; census undefined")
    M = grid_size or samples_per_degree * B.degree
    theta = TWO_PI * np.arange(M) / M
    xtol = min(tol_xi, 1e-13)

    def d2(t):
        return float(B.phase_derivative(t, 2))

    def d3(t):
        return float(B.phase_derivative(t, 3))

    v2 = B.phase_derivative(theta, 2)
    v3 = B.phase_derivative(theta, 3)
    scale = {2: float(np.max(np.abs(v2))), 3: float(np.max(np.abs(v3)))}

    def deriv_scale(n):
        if n not in scale:
            scale[n] = float(np.max(np.abs(B.phase_derivative(theta, n))))
        return scale[n]

    candidates = _sign_change_roots(d2, theta, v2, xtol)
    for eta in _sign_change_roots(d3, theta, v3, xtol):
        if abs(d2(eta)) < tol_mult * scale[2]:
            candidates.append(eta)

    found: list[float] = []
    for x in sorted(c % TWO_PI for c in candidates):
        if x >= TWO_PI:
            x = 0.0
        if any(_cyclic_gap(x, y) < 1e-12 for y in found):
            continue
        found.append(x)
    found.sort()
    for i in range(len(found)):
        gap = _cyclic_gap(found[i], found[(i + 1) % len(found)]) if len(found) > 1 else TWO_PI
        if gap < 10 * tol_xi:
            raise ResolutionError(
                f"inflections at {found[i]:.3e} and {found[(i + 1) % len(found)]:.3e} are "
                f"closer than {10 * tol_xi:.1e}; use a denser grid"
            )

    mults = []
    notes = []
    for x in found:
        n = 3
        while n < n_max and abs(float(B.phase_derivative(x, n))) < tol_mult * deriv_scale(n):
            n += 1
        if n == n_max and abs(float(B.phase_derivative(x, n))) < tol_mult * deriv_scale(n):
            notes.append(f"order at {x:.6f} capped at {n_max}")
        mults.append(n)
    return PhaseCensus(tuple(found), tuple(mults), tuple(notes))


# ---------------------------------------------------------------------------
# Arc preimages
# ---------------------------------------------------------------------------


def _solve_phase(B: BlaschkeProduct, targets: np.ndarray, iters: int = 64) -> np.ndarray:
    # psi is strictly increasing on [0, 2 pi], so vectorized bisection converges for every target
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, TWO_PI)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = B.phase(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * TWO_PI):
            break
    return 0.5 * (lo + hi)


def preimage_of_arc(B: BlaschkeProduct, I: ArcSet, chunk: int = 1 << 16) -> ArcSet:
    """``{theta : psi_B(theta) mod 2 pi in I}`` as an ArcSet.

    Every crossing of an endpoint of ``I`` by the winding phase is located by
    monotone bisection; membership between consecutive crossings is decided at
    the midpoint.
    """
    if not I.arcs:
        return ArcSet()
    if I.measure >= 1.0:
        return ArcSet.full()
    psi0 = B.phase_at_zero
    top = psi0 + TWO_PI * B.degree
    ends = sorted({e for arc in I.arcs for e in arc})
    targets = []
    for e in ends:
        w_lo = math.floor((psi0 - e) / TWO_PI)
        w_hi = math.ceil((top - e) / TWO_PI)
        t = e + TWO_PI * np.arange(w_lo, w_hi + 1)
        targets.append(t[(t > psi0) & (t < top)])
    targets = np.sort(np.concatenate(targets))
    cuts = np.concatenate(
        [_solve_phase(B, targets[i : i + chunk]) for i in range(0, len(targets), chunk)]
        or [np.empty(0)]
    )
    cuts = np.unique(np.concatenate([[0.0], np.clip(cuts, 0.0, TWO_PI), [TWO_PI]]))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    inside = I.contains(np.mod(B.phase(mids), TWO_PI))
    arcs = [(float(cuts[i]), float(cuts[i + 1])) for i in np.flatnonzero(inside)]
    return ArcSet(tuple(arcs))

