"""Taylor coefficients of analytic functions on the closed disk, with aliasing certificates.

Coefficients are read off a DFT of boundary samples.  The grid is doubled
until the upper half of the DFT output (where an analytic function with
geometrically decaying coefficients leaves only aliasing residue) carries
less than ``tol`` of l2 mass.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .blaschke import TWO_PI, BlaschkeProduct
from .errors import ResourceError, ValidationError

ZERO_THRESHOLD = 1e-13
DEFAULT_MAX_SIZE = 1 << 26

__all__ = [
    "CoefficientSeries",
    "coeffs_from_samples",
    "coeffs_of_power",
    "compose_with_power",
    "dilate",
    "evaluate_on_circle",
    "multiply",
    "seq_norm",
    "sup_coeff",
    "truncate",
]


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Finite coefficient vector; index ``j`` holds the ``j``-th Taylor coefficient."""

    coeffs: np.ndarray
    aliasing_bound: float = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise ValidationError("coefficients must be a non-empty 1-d vector")
        if not np.all(np.isfinite(c)):
            raise ValidationError("coefficients must be finite")
        if not self.aliasing_bound >= 0:
            raise ValidationError("aliasing_bound must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "aliasing_bound", float(self.aliasing_bound))

    def __len__(self):
        return self.coeffs.size

    def _nonzero(self) -> np.ndarray:
        a = np.abs(self.coeffs)
        top = a.max()
        if top == 0:
            return np.empty(0, dtype=int)
        return np.flatnonzero(a > ZERO_THRESHOLD * top)

    @property
    def valuation(self) -> float:
        """Index of the first non-negligible coefficient; ``inf`` for the zero series."""
        nz = self._nonzero()
        return int(nz[0]) if nz.size else math.inf

    @property
    def degree(self) -> int:
        """Index of the last non-negligible coefficient; -1 for the zero series."""
        nz = self._nonzero()
        return int(nz[-1]) if nz.size else -1

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __call__(self, theta):
        return evaluate_on_circle(self, theta)

    def to_json(self) -> dict:
        v = self.valuation
        return {
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "aliasing_bound": self.aliasing_bound,
            "valuation": v if v != math.inf else None,
        }

    @classmethod
    def from_json(cls, obj) -> "CoefficientSeries":
        c = np.array([complex(re, im) for re, im in obj["coeffs"]])
        return cls(c, obj.get("aliasing_bound", 0.0))

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for key, val in (header or {}).items():
            buf.write(f"# {key}: {val}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "re", "im"])
        for j, c in enumerate(self.coeffs):
            w.writerow([j, repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CoefficientSeries":
        rows = [r for r in csv.reader(l for l in text.splitlines() if l and not l.startswith("#"))]
        data = {int(r[0]): complex(float(r[1]), float(r[2])) for r in rows[1:]}
        c = np.zeros(max(data) + 1, dtype=complex)
        for j, v in data.items():
            c[j] = v
        return cls(c)


def sup_coeff(s: CoefficientSeries) -> float:
    return float(np.max(np.abs(s.coeffs)))


def seq_norm(s: CoefficientSeries, p: float) -> float:
    """l^p norm of the coefficient vector (p = inf gives the sup norm)."""
    a = np.abs(s.coeffs)
    if p == math.inf:
        return float(a.max())
    if p == 1:
        return float(math.fsum(a))
    if p < 1:
        raise ValidationError("p must be >= 1")
    top = a.max()
    if top == 0:
        return 0.0
    if p == 2:
        b = a / top  # rescaled so tiny or huge entries do not underflow or overflow when squared
        return float(top * math.sqrt(math.fsum(b * b)))
    return float(top * np.sum((a / top) ** p) ** (1.0 / p))


def _tail_mass(c: np.ndarray) -> float:
    half = c.size // 2
    t = c[half:]
    return float(np.sqrt(np.vdot(t, t).real))


def _pow2_at_least(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def coeffs_from_samples(
    sample,
    min_size: int,
    tol: float = 1e-10,
    max_size: int = DEFAULT_MAX_SIZE,
    size: int | None = None,
    unimodular: bool = False,
) -> CoefficientSeries:
    """DFT coefficients of an analytic function given by ``sample(theta)``.

    With ``unimodular=True`` the Parseval defect ``|sum |c_j|^2 - 1|`` is
    folded into the certificate as well.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    M = size or _pow2_at_least(max(min_size, 1024))
    defect = math.inf
    while True:
        if M > max_size:
            raise ResourceError(
                f"grid size {M} exceeds cap {max_size}; achieved defect {defect:.3e}"
            )
        theta = TWO_PI * np.arange(M) / M
        c = np.fft.fft(sample(theta)) / M
        defect = _tail_mass(c)
        if unimodular:
            defect = max(defect, abs(float(np.vdot(c, c).real) - 1.0))
        if defect <= tol or size is not None:
            return CoefficientSeries(c, defect)
        M *= 2


def coeffs_of_power(
    B: BlaschkeProduct,
    k: int,
    tol: float = 1e-10,
    max_size: int = DEFAULT_MAX_SIZE,
    size: int | None = None,
) -> CoefficientSeries:
    """Taylor coefficients of ``B**k`` for indices ``0 .. M-1``."""
    if k < 1:
        raise ValidationError("k must be a positive integer")
    if B.is_monomial():
        c = np.zeros(max(k * B.degree + 1, 1), dtype=complex)
        c[k * B.degree] = 1.0
        return CoefficientSeries(c, 0.0)

    def sample(theta):
        w = B(np.exp(1j * theta))
        return (w / np.abs(w)) ** k

    return coeffs_from_samples(sample, 4 * k * B.degree, tol, max_size, size, unimodular=True)


def compose_with_power(
    Q: CoefficientSeries,
    B: BlaschkeProduct,
    n: int,
    tol: float = 1e-10,
    max_size: int = DEFAULT_MAX_SIZE,
) -> CoefficientSeries:
    """Coefficients of ``Q(B**n) = sum_k q_k B**(n k)``.

    The weighted sum is formed on the sample grid before the single DFT, which
    by linearity equals the weighted sum of the DFTs of the individual powers.
    Indices below ``valuation(Q) * n * (zeros of B at 0)`` vanish exactly and
    are set to zero.
    """
    q = np.asarray(Q.coeffs)
    d = Q.degree
    if d < 0:
        return CoefficientSeries(np.zeros(1), 0.0)
    q = q[: d + 1]

    def sample(theta):
        w = B(np.exp(1j * theta))
        w = (w / np.abs(w)) ** n
        acc = np.full(w.shape, q[-1], dtype=complex)
        for a in q[-2::-1]:
            acc = acc * w + a
        return acc

    s = coeffs_from_samples(sample, 4 * n * d * B.degree, tol * max(1.0, float(np.abs(q).sum())), max_size)
    c = np.array(s.coeffs)
    floor = int(min(Q.valuation * n * B.origin_multiplicity, c.size))
    dropped = float(np.sqrt(np.vdot(c[:floor], c[:floor]).real))
    c[:floor] = 0.0
    return CoefficientSeries(c, s.aliasing_bound + dropped + Q.aliasing_bound * n)


def multiply(a: CoefficientSeries, b: CoefficientSeries) -> CoefficientSeries:
    """Cauchy product; aliasing bounds propagate as ``e_a ||b||_1 + e_b ||a||_1``."""
    c = signal.convolve(a.coeffs, b.coeffs)
    # exact zeros below the combined valuation survive FFT-based convolution only approximately
    va, vb = a.valuation, b.valuation
    floor = va + vb
    if floor == math.inf:
        return CoefficientSeries(np.zeros(1), 0.0)
    floor = int(min(floor, c.size))
    if np.all(a.coeffs[:va] == 0) and np.all(b.coeffs[:vb] == 0):
        c[:floor] = 0.0
    bound = a.aliasing_bound * seq_norm(b, 1) + b.aliasing_bound * seq_norm(a, 1)
    return CoefficientSeries(c, bound)


def dilate(s: CoefficientSeries, r: float) -> CoefficientSeries:
    """Coefficients of ``z -> f(r z)``."""
    if not 0 < r < 1:
        raise ValidationError("dilation radius must lie in (0, 1)")
    j = np.arange(len(s))
    return CoefficientSeries(s.coeffs * np.exp(j * math.log(r)), s.aliasing_bound)


def truncate(s: CoefficientSeries, n: int) -> CoefficientSeries:
    """n-th Taylor partial sum."""
    if n < 0:
        raise ValidationError("truncation index must be nonnegative")
    return CoefficientSeries(s.coeffs[: n + 1], s.aliasing_bound)


def evaluate_on_circle(s, theta, eps: float = 1e-14) -> np.ndarray:
    """Values of ``sum_j c_j e^{i j theta}`` at arbitrary angles."""
    c = s.coeffs if isinstance(s, CoefficientSeries) else np.asarray(s, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    if theta.size <= 64:
        j = np.arange(c.size)
        return np.array([np.dot(c, np.exp(1j * j * t)) for t in theta.ravel()]).reshape(theta.shape)
    if c.size <= 2048:
        z = np.exp(1j * theta)
        acc = np.full(theta.shape, c[-1], dtype=complex)
        for a in c[-2::-1]:
            acc = acc * z + a
        return acc
    import finufft

    if c.size % 2:
        c = np.append(c, 0.0)
    half = c.size // 2
    x = np.mod(theta.ravel(), TWO_PI)
    vals = finufft.nufft1d2(x, np.ascontiguousarray(c), isign=1, eps=eps)
    return (vals * np.exp(1j * half * x)).reshape(theta.shape)


def values_on_uniform_grid(s: CoefficientSeries, size: int) -> np.ndarray:
    """Values at ``2 pi m / size``, m = 0..size-1 (size >= len(s))."""
    if size < len(s):
        raise ValidationError("grid must be at least as long as the series")
    c = np.zeros(size, dtype=complex)
    c[: len(s)] = s.coeffs
    return np.fft.ifft(c) * size
