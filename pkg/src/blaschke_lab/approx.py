"""Constructive simultaneous approximation: small Orlicz norm, close to a target on a big set.

Given ``eps``, a valuation floor ``v`` and a continuous target on the circle,
the engine builds a polynomial ``P`` with ``valuation(P) >= v``,
``||P||_phi <= eps`` and ``|P - target| <= eps`` on an arc set ``K`` of
normalized measure at least ``1 - eps``.  The construction multiplies an
arc approximant ``R`` of the target by ``Q(B^n)``, where ``Q ~ 1`` on the
arc and ``B^n`` spreads the coefficients until the Orlicz norm is small;
the result is dilated and truncated to a polynomial.  Every quantity in the
emitted certificate is re-measured a posteriori.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .blaschke import TWO_PI, ArcSet, BlaschkeProduct, preimage_of_arc
from .coefficients import (
    CoefficientSeries,
    compose_with_power,
    coeffs_of_power,
    dilate,
    evaluate_on_circle,
    multiply,
    seq_norm,
    truncate,
)
from .errors import BlaschkeLabError, CertificateInvalidError, FitFailure, SearchFailure, ValidationError
from .orlicz import OrliczFunction, Regime, luxemburg_norm, orlicz_from_config

log = logging.getLogger(__name__)

__all__ = [
    "ApproxCertificate",
    "ApproxRequest",
    "TargetFunction",
    "ValidationReport",
    "arc_fit",
    "find_power_index",
    "power_index_majorant",
    "run_pipeline",
    "universal_partial_sums_demo",
    "validate_certificate",
    "valuation_lift",
]

MEASURE_SLACK = 1e-12
SUP_GRID_FACTOR = 64
SUP_GRID_CAP = 1 << 22
RIDGE_LEVELS = tuple(10.0**-k for k in range(1, 10))


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TargetFunction:
    """Continuous function on the unit circle, evaluated at angles."""

    fn: Callable[[np.ndarray], np.ndarray]
    label: str
    config: dict = field(default_factory=dict)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.broadcast_to(np.asarray(self.fn(theta), dtype=complex), theta.shape)

    @classmethod
    def constant(cls, value: complex) -> "TargetFunction":
        value = complex(value)
        return cls(
            lambda t: np.full(np.shape(t), value, dtype=complex),
            f"const({value:g})",
            {"kind": "constant", "value": [value.real, value.imag]},
        )

    @classmethod
    def conj(cls) -> "TargetFunction":
        return cls(lambda t: np.exp(-1j * t), "conj", {"kind": "conj"})

    @classmethod
    def trig(cls, pos=(), neg=()) -> "TargetFunction":
        """``sum_k pos[k] z^k + sum_k neg[k] z^-(k+1)`` on |z| = 1."""
        pos = np.asarray([_cplx(c) for c in pos] or [0.0], dtype=complex)
        neg = np.asarray([_cplx(c) for c in neg] or [0.0], dtype=complex)

        def fn(t):
            z = np.exp(1j * t)
            return np.polynomial.polynomial.polyval(z, pos) + np.polynomial.polynomial.polyval(
                1 / z, np.concatenate([[0.0], neg])
            )

        cfg = {
            "kind": "trig",
            "pos": [[c.real, c.imag] for c in pos],
            "neg": [[c.real, c.imag] for c in neg],
        }
        return cls(fn, "trig", cfg)

    @classmethod
    def smooth_step(cls, center: float, width: float, low: complex = 0, high: complex = 1) -> "TargetFunction":
        """Periodic tanh ramp from ``low`` to ``high`` around angle ``center``."""
        low, high = complex(low), complex(high)

        def fn(t):
            x = np.sin((t - center) / 2.0)
            return low + (high - low) * 0.5 * (1 + np.tanh(x / width))

        cfg = {"kind": "step", "center": center, "width": width,
               "low": [low.real, low.imag], "high": [high.real, high.imag]}
        return cls(fn, f"step({center:g},{width:g})", cfg)

    def minus(self, poly: CoefficientSeries) -> "TargetFunction":
        """``self - poly`` on the circle (used when chaining blocks)."""
        if poly.is_zero():
            return self
        return TargetFunction(
            lambda t: self(t) - evaluate_on_circle(poly, t),
            f"{self.label}-poly",
            {"kind": "difference", "base": self.config, "poly_degree": poly.degree},
        )

    def is_zero(self) -> bool:
        return self.config.get("kind") == "constant" and complex(*self.config["value"]) == 0

    @classmethod
    def from_config(cls, cfg) -> "TargetFunction":
        if isinstance(cfg, TargetFunction):
            return cfg
        if isinstance(cfg, str):
            cfg = {"kind": cfg}
        kind = cfg.get("kind")
        if kind == "conj":
            return cls.conj()
        if kind == "constant":
            return cls.constant(_cplx(cfg.get("value", 0)))
        if kind == "trig":
            return cls.trig(cfg.get("pos", ()), cfg.get("neg", ()))
        if kind == "step":
            return cls.smooth_step(
                float(cfg["center"]), float(cfg["width"]),
                _cplx(cfg.get("low", 0)), _cplx(cfg.get("high", 1)),
            )
        raise ValidationError(f"unknown target kind {kind!r}")

    def to_json(self) -> dict:
        return dict(self.config)


def _cplx(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


# ---------------------------------------------------------------------------
# Arc fitting
# ---------------------------------------------------------------------------


def _arc_bounds(I: ArcSet) -> tuple[float, float]:
    if not I.is_single_proper_arc():
        raise ValidationError("a single proper arc is required")
    return I.arcs[0]


def _arnoldi_basis(z: np.ndarray, w: np.ndarray, deg: int) -> tuple[np.ndarray, np.ndarray]:
    """Vandermonde-with-Arnoldi basis, orthonormal for the weights ``w``.

    Returns the basis values ``Qb`` at ``z`` and the matrix ``C`` whose
    columns are the basis polynomials in monomial form.
    """
    w2 = w * w
    Qb = np.zeros((z.size, deg + 1), dtype=complex)
    H = np.zeros((deg + 1, deg), dtype=complex)
    Qb[:, 0] = 1.0 / math.sqrt(w2.sum())
    for k in range(deg):
        q = z * Qb[:, k]
        for _ in range(2):  # classical Gram-Schmidt, repeated once for stability
            h = Qb[:, : k + 1].conj().T @ (w2 * q)
            H[: k + 1, k] += h
            q = q - Qb[:, : k + 1] @ h
        h_next = math.sqrt(float(np.sum(w2 * np.abs(q) ** 2)))
        if not h_next > 1e-14 * abs(H[k, k - 1] if k else 1.0):
            deg = k  # Krylov space exhausted on these points
            Qb, H = Qb[:, : k + 1], H[: k + 1, :k]
            break
        H[k + 1, k] = h_next
        Qb[:, k + 1] = q / h_next
    # q_{k+1} = (z q_k - sum_j H[j,k] q_j) / H[k+1,k]
    C = np.zeros((deg + 1, deg + 1), dtype=complex)
    C[0, 0] = Qb[0, 0]
    for k in range(deg):
        col = np.zeros(deg + 1, dtype=complex)
        col[1:] = C[:-1, k]
        col -= C[:, : k + 1] @ H[: k + 1, k]
        C[:, k + 1] = col / H[k + 1, k]
    return Qb, C


class _RidgeFitter:
    """Least squares on arc points plus a full-circle penalty ``mu * ||c||_2^2``.

    The penalty rows sample the circle uniformly, so their weighted squared
    sum is the l2 norm of the coefficients (Parseval).
    """

    def __init__(self, t_arc: np.ndarray, f_arc: np.ndarray, deg: int):
        n_circ = 4 * deg + 8
        t_circ = TWO_PI * np.arange(n_circ) / n_circ
        self.z = np.exp(1j * np.concatenate([t_arc, t_circ]))
        self.f = np.concatenate([f_arc, np.zeros(n_circ)])
        self.n_arc, self.n_circ, self.deg = t_arc.size, n_circ, deg
        self._bases = {}

    def _weights(self, mu):
        return np.concatenate([np.full(self.n_arc, 1 / math.sqrt(self.n_arc)),
                               np.full(self.n_circ, math.sqrt(mu / self.n_circ))])

    def __call__(self, mu: float) -> np.ndarray:
        key = mu == 0.0
        if key not in self._bases:
            # one basis for the plain fit and one shared by all penalized fits
            with np.errstate(all="ignore"):
                self._bases[key] = _arnoldi_basis(self.z, self._weights(0.0 if key else 1e-2), self.deg)
        Qb, C = self._bases[key]
        w = self._weights(mu)
        with np.errstate(all="ignore"):
            d = np.linalg.lstsq(w[:, None] * Qb, w * self.f, rcond=None)[0]
            return C @ d


def _chop(c: np.ndarray) -> np.ndarray:
    c = np.array(c, dtype=complex)
    top = np.abs(c).max(initial=0.0)
    c[np.abs(c) <= 1e-13 * top] = 0.0
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


def arc_fit(
    target: TargetFunction,
    I: ArcSet,
    tol: float,
    deg_cap: int = 512,
    start_degree: int = 4,
) -> CoefficientSeries:
    """Polynomial within ``tol`` of ``target`` on the single arc ``I``, by degree doubling.

    Each fit uses ``8 deg`` Chebyshev-spaced angles; acceptance is decided on
    a grid 16 times finer, using the monomial coefficients that are returned.
    At each degree a ridge penalty on the coefficient l2 norm is tried from
    strong to none, and the first fit meeting ``tol`` is returned.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    a, b = _arc_bounds(I)
    best_err, best_deg = math.inf, None
    degrees = []
    d = start_degree
    while d < deg_cap:
        degrees.append(d)
        d *= 2
    degrees.append(deg_cap)
    for deg in degrees:
        m = 8 * deg + 8
        t = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * (np.arange(m) + 0.5) / m)
        ft = target(t)
        fine = np.linspace(a, b, 16 * m)
        f_fine = target(fine)

        fitter = _RidgeFitter(t, ft, deg)

        def attempt(mu):
            c = fitter(mu)
            if not np.all(np.isfinite(c)):
                return None, math.inf
            c = _chop(c)
            return c, float(np.max(np.abs(evaluate_on_circle(c, fine) - f_fine)))

        # strongest ridge penalty that meets tol keeps the monomial coefficients small
        for mu in RIDGE_LEVELS + (0.0,):
            c, err = attempt(mu)
            if err < best_err:
                best_err, best_deg = err, deg
            if err <= tol:
                return CoefficientSeries(c)
        log.debug("arc_fit degree %d: best sup error %.3e", deg, best_err)
    raise FitFailure(
        f"arc fit of {target.label} on [{a:.4f}, {b:.4f}] missed tol {tol:.3e}: "
        f"best sup error {best_err:.3e} at degree {best_deg} (cap {deg_cap})",
        best_error=best_err,
        degree=best_deg,
    )


def valuation_lift(v: int, I: ArcSet, tol: float, deg_cap: int = 512) -> CoefficientSeries:
    """``Q = z^v S`` with ``|Q - 1| <= tol`` on ``I``."""
    if v < 0:
        raise ValidationError("valuation floor must be nonnegative")
    if v == 0:
        return CoefficientSeries(np.ones(1))
    a, b = _arc_bounds(I)
    S = arc_fit(TargetFunction.trig(neg=[0] * (v - 1) + [1]), I, tol / 2, deg_cap)
    Q = np.concatenate([np.zeros(v, dtype=complex), S.coeffs])
    fine = np.linspace(a, b, 16 * (8 * max(len(S), 4) + 8))
    err = float(np.max(np.abs(evaluate_on_circle(Q, fine) - 1.0)))
    if err > tol:
        raise FitFailure(f"valuation lift error {err:.3e} exceeds {tol:.3e}", err, len(S) - 1)
    return CoefficientSeries(Q)


# ---------------------------------------------------------------------------
# Power index search
# ---------------------------------------------------------------------------


def _require_vanishing(phi: OrliczFunction):
    if phi.regime is not Regime.VANISHING:
        raise ValidationError(
            f"{phi.label} is classified {phi.regime.value}; the construction needs phi(t) = o(t^2)"
        )


class _PowerNorms:
    """Memoized Luxemburg upper brackets of ||B^m||_phi."""

    def __init__(self, B, phi, tol=1e-10, rel_tol=1e-10):
        self.B, self.phi, self.tol, self.rel_tol = B, phi, tol, rel_tol
        self.cache: dict[int, float] = {}

    def __call__(self, m: int) -> float:
        if m not in self.cache:
            s = coeffs_of_power(self.B, m, self.tol)
            self.cache[m] = luxemburg_norm(self.phi, s, self.rel_tol).bracket[1]
        return self.cache[m]


def power_index_majorant(
    Q: CoefficientSeries, B: BlaschkeProduct, phi: OrliczFunction, n: int, norms=None
) -> float:
    """``sum_k |q_k| ||B^{n k}||_phi`` (upper brackets), which dominates ``||Q(B^n)||_phi``."""
    norms = norms or _PowerNorms(B, phi)
    q = np.abs(Q.coeffs)
    return math.fsum(q[k] * norms(n * k) for k in np.flatnonzero(q) if k > 0)


def find_power_index(
    Q: CoefficientSeries,
    B: BlaschkeProduct,
    phi: OrliczFunction,
    bound: float,
    n_cap: int = 4096,
    tol: float = 1e-10,
    rel_tol: float = 1e-10,
) -> int:
    """Smallest ``n <= n_cap`` whose majorant ``sum_k |q_k| ||B^{nk}||_phi`` is at most ``bound``."""
    if bound <= 0:
        raise ValidationError("bound must be positive")
    if Q.coeffs[0] != 0:
        raise ValidationError("Q(0) must vanish")
    if B.is_monomial():
        raise ValidationError("B must not be a power of z")
    _require_vanishing(phi)
    norms = _PowerNorms(B, phi, tol, rel_tol)
    q = np.abs(Q.coeffs)
    order = [int(k) for k in np.argsort(-q) if q[k] > 0 and k > 0]
    trace = []
    for n in range(1, n_cap + 1):
        total = 0.0
        for k in order:
            total += q[k] * norms(n * k)
            if total > bound:
                break
        trace.append((n, total))
        if total <= bound:
            return n
    raise SearchFailure(
        f"no n <= {n_cap} brings the majorant below {bound:.3e} (last {trace[-1][1]:.3e})",
        trace=trace,
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


DEFAULT_ZEROS = (0.0, 0.5)


@dataclass(frozen=True, eq=False)
class ApproxRequest:
    epsilon: float
    valuation: int
    target: TargetFunction
    orlicz: OrliczFunction
    blaschke: BlaschkeProduct = field(default_factory=lambda: BlaschkeProduct(DEFAULT_ZEROS))
    deg_cap: int = 512
    n_cap: int = 4096
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if int(self.valuation) != self.valuation or self.valuation < 0:
            raise ValidationError("valuation floor must be a nonnegative integer")
        if self.blaschke.origin_multiplicity == 0:
            raise ValidationError("B must vanish at the origin")
        if self.blaschke.is_monomial():
            raise ValidationError("B must not be a power of z")
        _require_vanishing(self.orlicz)

    @classmethod
    def from_json(cls, obj: dict) -> "ApproxRequest":
        zeros = obj.get("blaschke", {}).get("zeros", DEFAULT_ZEROS)
        extra = {k: obj[k] for k in ("deg_cap", "n_cap", "seed") if k in obj}
        return cls(
            epsilon=float(obj["epsilon"]),
            valuation=int(obj.get("valuation", 0)),
            target=TargetFunction.from_config(obj["target"]),
            orlicz=orlicz_from_config(obj["orlicz"]),
            blaschke=BlaschkeProduct.from_zeros(zeros),
            **extra,
        )

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "valuation": self.valuation,
            "target": self.target.to_json(),
            "orlicz": self.orlicz.to_json(),
            "blaschke": self.blaschke.to_json(),
            "deg_cap": self.deg_cap,
            "n_cap": self.n_cap,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class ApproxCertificate:
    P: CoefficientSeries
    K: ArcSet
    achieved_orlicz_norm: float
    achieved_sup_error: float
    n0: int
    epsilon: float
    valuation_floor: int
    intermediate: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict:
        return {
            "P": self.P.to_json(),
            "K": self.K.to_json(),
            "achieved_orlicz_norm": self.achieved_orlicz_norm,
            "achieved_sup_error": self.achieved_sup_error,
            "n0": self.n0,
            "epsilon": self.epsilon,
            "valuation_floor": self.valuation_floor,
            "intermediate": self.intermediate,
            "validator_seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ApproxCertificate":
        return cls(
            P=CoefficientSeries.from_json(obj["P"]),
            K=ArcSet.from_json(obj["K"]),
            achieved_orlicz_norm=float(obj["achieved_orlicz_norm"]),
            achieved_sup_error=float(obj["achieved_sup_error"]),
            n0=int(obj["n0"]),
            epsilon=float(obj["epsilon"]),
            valuation_floor=int(obj["valuation_floor"]),
            intermediate=dict(obj.get("intermediate", {})),
            seed=int(obj.get("validator_seed", 0)),
        )


class _Step:
    """Tags any failure inside a pipeline step with the step's name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("pipeline step: %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, BlaschkeLabError) and not getattr(exc, "step", None):
            exc.step = self.name
            exc.args = (f"[{self.name}] {exc.args[0] if exc.args else ''}",) + exc.args[1:]
        return False


def _sup_error_on(P: CoefficientSeries, target: TargetFunction, theta: np.ndarray) -> float:
    if theta.size == 0:
        return 0.0
    return float(np.max(np.abs(evaluate_on_circle(P, theta) - target(theta))))


def _arc_sup(c: CoefficientSeries, a: float, b: float, n: int) -> float:
    return float(np.max(np.abs(evaluate_on_circle(c, np.linspace(a, b, n)))))


def _select_dilation(g: np.ndarray, budget: float) -> tuple[float, int]:
    """r = 1 - 2^-m for the smallest m meeting the perturbation budget, then the shortest tail."""
    a = np.abs(g)
    j = np.arange(a.size)
    for m in range(1, 60):
        r = 1.0 - 2.0**-m
        w = np.exp(j * math.log(r))
        if math.fsum((1.0 - w) * a) <= budget:
            break
    else:
        raise SearchFailure("no dilation radius meets the perturbation budget")
    tail = np.cumsum((w * a)[::-1])[::-1]  # tail[i] = sum_{j >= i}
    tail = np.append(tail, 0.0)
    n = int(np.flatnonzero(tail[1:] <= budget)[0])
    return r, n


def run_pipeline(req: ApproxRequest, sup_grid_cap: int = SUP_GRID_CAP) -> ApproxCertificate:
    """Build and certify ``P`` and ``K`` for the request (internal budget eps/2)."""
    eps = req.epsilon
    ep = eps / 2.0
    phi, B, target, v = req.orlicz, req.blaschke, req.target, int(req.valuation)
    inter: dict = {}

    with _Step("arc"):
        a, b = math.pi * ep, TWO_PI - math.pi * ep
        I = ArcSet.arc(a, b)
        inter["arc"] = [a, b]

    with _Step("arc_fit"):
        R = arc_fit(target, I, ep / 2.0, req.deg_cap)
        inter["deg_R"] = R.degree
        n_fine = 16 * (8 * max(R.degree, 4) + 8)
        R_sup = _arc_sup(R, a, b, n_fine)
        R_l1 = seq_norm(R, 1)

    if R.degree < 0:
        K = I
        P = CoefficientSeries(np.zeros(1))
        err = _sup_error_on(P, target, K.grid(4096))
        cert = ApproxCertificate(P, K, 0.0, err, 0, eps, v, {**inter, "trivial": True}, req.seed)
        _check_certificate(cert)
        return cert

    with _Step("valuation_lift"):
        v_q = max(v, 1)
        Q = valuation_lift(v_q, I, ep * min(1.0, 1.0 / R_sup), req.deg_cap)
        inter["deg_Q"] = Q.degree
        inter["valuation_Q"] = Q.valuation

    with _Step("find_power_index"):
        bound = ep / max(R_l1, R_sup)
        n0 = find_power_index(Q, B, phi, bound, req.n_cap)
        inter["power_bound"] = bound

    with _Step("compose"):
        QB = compose_with_power(Q, B, n0)
        inter["compose_aliasing_bound"] = QB.aliasing_bound

    with _Step("assemble"):
        g = multiply(R, QB)
        g_norm = luxemburg_norm(phi, g).bracket[1]
        inter["g_orlicz_norm"] = g_norm
        if g_norm > ep:
            raise CertificateInvalidError(f"||g||_phi = {g_norm:.3e} exceeds eps/2 = {ep:.3e}")
        if g.valuation < v:
            raise CertificateInvalidError(f"valuation(g) = {g.valuation} < {v}")

    with _Step("preimage"):
        K = preimage_of_arc(B.power(n0), I).intersect(I)
        inter["K_arcs"] = len(K)

    with _Step("dilate_truncate"):
        r, n_trunc = _select_dilation(g.coeffs, ep / 4.0)
        P = truncate(dilate(g, r), n_trunc)
        inter["r"] = r
        inter["truncation_index"] = n_trunc

    with _Step("certify"):
        n_grid = min(SUP_GRID_FACTOR * max(P.degree, 64), sup_grid_cap)
        inter["sup_grid_points"] = n_grid
        err = _sup_error_on(P, target, K.grid(n_grid))
        norm = luxemburg_norm(phi, P).bracket[1]
        cert = ApproxCertificate(P, K, norm, err, n0, eps, v, inter, req.seed)
        _check_certificate(cert)
    return cert


def _check_certificate(cert: ApproxCertificate) -> None:
    eps = cert.epsilon
    problems = []
    if cert.P.valuation < cert.valuation_floor:
        problems.append(f"valuation {cert.P.valuation} < {cert.valuation_floor}")
    if cert.achieved_orlicz_norm > eps:
        problems.append(f"Orlicz norm {cert.achieved_orlicz_norm:.3e} > {eps}")
    if cert.achieved_sup_error > eps:
        problems.append(f"sup error {cert.achieved_sup_error:.3e} > {eps}")
    if cert.K.measure < 1 - eps - MEASURE_SLACK:
        problems.append(f"m(K) = {cert.K.measure:.12f} < {1 - eps}")
    if problems:
        raise CertificateInvalidError("; ".join(problems))


@dataclass(frozen=True)
class ValidationReport:
    valuation_ok: bool
    orlicz_norm: float
    orlicz_ok: bool
    sup_error: float
    sup_ok: bool
    measure: float
    measure_ok: bool
    n_points: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.valuation_ok and self.orlicz_ok and self.sup_ok and self.measure_ok


def validate_certificate(
    cert: ApproxCertificate,
    target: TargetFunction,
    phi: OrliczFunction,
    n_points: int = 100_000,
    seed: int | None = None,
) -> ValidationReport:
    """Re-check a certificate from its raw data on a fresh random grid over K."""
    seed = cert.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    eps = cert.epsilon
    theta = cert.K.sample(n_points, rng) if cert.K.arcs else np.empty(0)
    err = _sup_error_on(cert.P, target, theta)
    norm = luxemburg_norm(phi, cert.P).bracket[1]
    m = cert.K.measure
    return ValidationReport(
        valuation_ok=cert.P.valuation >= cert.valuation_floor,
        orlicz_norm=norm,
        orlicz_ok=norm <= eps,
        sup_error=err,
        sup_ok=err <= eps,
        measure=m,
        measure_ok=m >= 1 - eps - MEASURE_SLACK,
        n_points=int(theta.size),
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# Chaining blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UniversalDemo:
    f: CoefficientSeries
    indices: list
    Ks: list
    certificates: list
    partial_sums: list

    def to_json(self) -> dict:
        return {
            "f": self.f.to_json(),
            "indices": list(self.indices),
            "Ks": [K.to_json() for K in self.Ks],
            "certificates": [c.to_json() for c in self.certificates],
        }


def _add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(max(a.size, b.size), dtype=complex)
    out[: a.size] += a
    out[: b.size] += b
    return out


def universal_partial_sums_demo(
    targets,
    eps_schedule,
    phi: OrliczFunction,
    blaschke: BlaschkeProduct | None = None,
    deg_cap: int = 512,
    n_cap: int = 4096,
    seed: int = 0,
) -> UniversalDemo:
    """Chain approximation blocks with disjoint spectra.

    Block ``j`` approximates ``targets[j] - f_{j-1}`` with valuation floor
    ``degree(f_{j-1}) + 1``, so the partial sum of ``f`` at ``d_j = degree(f_j)``
    is exactly ``f_j``.
    """
    targets = [TargetFunction.from_config(t) for t in targets]
    eps_schedule = [float(e) for e in eps_schedule]
    if len(targets) != len(eps_schedule) or not targets:
        raise ValidationError("targets and eps_schedule must be nonempty and of equal length")
    B = blaschke or BlaschkeProduct(DEFAULT_ZEROS)
    f = np.zeros(1, dtype=complex)
    indices, Ks, certs, partials = [], [], [], []
    for j, (t, e) in enumerate(zip(targets, eps_schedule)):
        fs = CoefficientSeries(f)
        v = fs.degree + 1
        req = ApproxRequest(e, v, t.minus(fs), phi, B, deg_cap, n_cap, seed + j)
        cert = run_pipeline(req)
        f = _add(f, cert.P.coeffs)
        d = CoefficientSeries(f).degree
        indices.append(d)
        Ks.append(cert.K)
        certs.append(cert)
        partials.append(np.array(f[: d + 1]))
    return UniversalDemo(CoefficientSeries(f), indices, Ks, certs, partials)
