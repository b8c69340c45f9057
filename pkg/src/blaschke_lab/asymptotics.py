"""Norm sweeps of B^k, decay-rate fits and the van der Corput coefficient bound."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats

from .blaschke import TWO_PI, BlaschkeProduct, phase_census
from .coefficients import DEFAULT_MAX_SIZE, coeffs_of_power, seq_norm, sup_coeff
from .errors import BoundUnavailableError, InsufficientDataError, ValidationError
from .orlicz import OrliczFunction, luxemburg_norm, orlicz_from_config

__all__ = [
    "NormSweep",
    "VdcBound",
    "default_eps_grid",
    "dyadic_ks",
    "fit_decay_exponent",
    "norm_sweep",
    "oscillatory_integral",
    "predicted_exponent",
    "vdc_bound",
    "vdc_lemma_bound",
]

SIMPLE_KINDS = ("sup", "l1", "l2")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BLASCHKE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def dyadic_ks(lo: int, hi: int) -> list[int]:
    ks = []
    k = lo
    while k <= hi:
        ks.append(k)
        k *= 2
    return ks


@dataclass(frozen=True)
class NormSweep:
    ks: tuple[int, ...]
    values: tuple[float, ...]
    norm_kind: str
    B_ref: BlaschkeProduct | None = None
    aliasing_bounds: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.ks) != len(self.values):
            raise ValidationError("ks and values differ in length")
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise ValidationError("ks must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise ValidationError("norm values must be nonnegative")

    def to_csv(self) -> str:
        bounds = self.aliasing_bounds or (0.0,) * len(self.ks)
        lines = ["k,value,aliasing_bound"]
        lines += [f"{k},{v!r},{a!r}" for k, v, a in zip(self.ks, self.values, bounds)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, norm_kind: str = "unknown") -> "NormSweep":
        rows = [l.split(",") for l in text.splitlines() if l and not l.startswith(("#", "k"))]
        return cls(
            tuple(int(r[0]) for r in rows),
            tuple(float(r[1]) for r in rows),
            norm_kind,
            None,
            tuple(float(r[2]) for r in rows) if rows and len(rows[0]) > 2 else (),
        )


def _norm_of(series, kind, rel_tol):
    if kind == "sup":
        return sup_coeff(series)
    if kind == "l1":
        return seq_norm(series, 1)
    if kind == "l2":
        return seq_norm(series, 2)
    return luxemburg_norm(kind, series, rel_tol).value


def norm_sweep(
    B: BlaschkeProduct,
    kind,
    ks,
    tol: float = 1e-10,
    rel_tol: float = 1e-10,
    max_size: int = DEFAULT_MAX_SIZE,
) -> NormSweep:
    """Norms of ``B**k`` for each ``k``: an OrliczFunction (Luxemburg) or 'sup', 'l1', 'l2'."""
    ks = [int(k) for k in ks]
    if not ks:
        raise ValidationError("empty k list")
    if isinstance(kind, str) and kind not in SIMPLE_KINDS:
        kind = orlicz_from_config(kind)
    label = kind if isinstance(kind, str) else f"orlicz({kind.label})"

    def one(k):
        s = coeffs_of_power(B, k, tol, max_size)
        return _norm_of(s, kind, rel_tol), s.aliasing_bound

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, ks))
    return NormSweep(
        tuple(ks),
        tuple(v for v, _ in results),
        label,
        B,
        tuple(a for _, a in results),
    )


def fit_decay_exponent(sweep: NormSweep, k_min: int = 1) -> tuple[float, float]:
    """OLS slope of log(value) on log(k) over k >= k_min, with its standard error."""
    k = np.array(sweep.ks, dtype=float)
    v = np.array(sweep.values, dtype=float)
    keep = (k >= k_min) & (v > 0)
    if keep.sum() < 6:
        raise InsufficientDataError(f"need 6 points with k >= {k_min}, have {int(keep.sum())}")
    res = stats.linregress(np.log(k[keep]), np.log(v[keep]))
    return float(res.slope), float(res.stderr)


def predicted_exponent(B: BlaschkeProduct, **census_kw) -> float:
    return -1.0 / phase_census(B, **census_kw).N


# ---------------------------------------------------------------------------
# van der Corput
# ---------------------------------------------------------------------------


def vdc_lemma_bound(m: float) -> float:
    """Upper bound 8/sqrt(m) for |int_a^b e^{iF}| when |F''| >= m > 0."""
    return 8.0 / math.sqrt(m)


def oscillatory_integral(F, a: float, b: float) -> complex:
    """int_a^b exp(i F(x)) dx by adaptive quadrature (reference values for small cases)."""
    re = integrate.quad(lambda x: math.cos(F(x)), a, b, limit=500, epsabs=1e-13)[0]
    im = integrate.quad(lambda x: math.sin(F(x)), a, b, limit=500, epsabs=1e-13)[0]
    return complex(re, im)


def default_eps_grid() -> list[float]:
    return [10.0 ** (-e) for e in np.arange(1.0, 4.01, 0.5)]


@dataclass(frozen=True)
class VdcBound:
    eps_grid: tuple[float, ...]
    per_eps: tuple[tuple[float, float, float], ...]  # (eps, bound, M_eps)
    best: float
    k: int
    s: int
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "per_eps": [{"eps": e, "bound": b, "M_eps": m} for e, b, m in self.per_eps],
            "best": self.best,
            "k": self.k,
            "s": self.s,
            "notes": list(self.notes),
        }


def _min_abs_psi2(B: BlaschkeProduct, a: float, b: float, samples: int) -> float:
    x = np.linspace(a, b, samples)
    v = np.abs(B.phase_derivative(x, 2))
    i = int(np.argmin(v))
    best = float(v[i])
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, samples - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda t: abs(float(B.phase_derivative(t, 2))),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        best = min(best, float(res.fun))
    return best


def vdc_bound(
    B: BlaschkeProduct,
    k: int,
    eps_grid=None,
    samples: int = 4096,
    census=None,
) -> VdcBound:
    """Uniform bound on |hat{B^k}(j)| from splitting [0, 2 pi] at the zeros of psi''.

    For each eps:  (1/2 pi) (2 (s+1) eps + 8 (s+1) / sqrt(k M_eps)),  with
    M_eps the minimum of |psi''| over the intervals between consecutive zeros
    shrunk by eps at both ends.
    """
    eps_grid = tuple(default_eps_grid() if eps_grid is None else eps_grid)
    census = census or phase_census(B)
    s = census.s
    cuts = [0.0, *census.zeros_of_psi2, TWO_PI]
    notes = []
    intervals = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-12:
            notes.append(f"degenerate interval at {a:.6f} dropped (zero-length integral)")
            continue
        intervals.append((a, b))
    per = []
    for eps in eps_grid:
        if eps <= 0:
            raise ValidationError("eps must be positive")
        if any(b - a <= 2 * eps for a, b in intervals):
            notes.append(f"eps={eps:g} skipped: a shrunk interval is empty")
            continue
        m_eps = min(_min_abs_psi2(B, a + eps, b - eps, samples) for a, b in intervals)
        if m_eps <= 0:
            notes.append(f"eps={eps:g} skipped: psi'' vanishes on a shrunk interval")
            continue
        bound = (2 * (s + 1) * eps + 8 * (s + 1) / math.sqrt(k * m_eps)) / TWO_PI
        per.append((float(eps), float(bound), float(m_eps)))
    if not per:
        raise BoundUnavailableError("no eps in the grid leaves all shrunk intervals nonempty")
    return VdcBound(eps_grid, tuple(per), min(b for _, b, _ in per), int(k), s, tuple(notes))
