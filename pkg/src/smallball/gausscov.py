"""Increment covariances of Gaussian processes and their operator norms.

The variance profile sigma2(s, t) = E (X_t - X_s)^2 determines the
covariance of the increment vector Y_k = X_{t_k} - X_{t_{k-1}} by
polarization.  This module builds that matrix (exploiting the Toeplitz
structure of stationary-increment profiles), computes matrix norms, the
summable two-norm bound used by the explicit certificates, and the
spectral density of fractional Gaussian noise, whose supremum is the
large-N limit of the Toeplitz eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate
from scipy import linalg as _sla
from scipy import special as _special
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import DegenerateProcessError
from .paths import UniformGrid
from .simulate import fgn_autocovariance

__all__ = [
    "IncrementalVariance",
    "IncrementCovariance",
    "MatrixNorms",
    "ClassEstimate",
    "SpectralSymbol",
    "SymbolSup",
    "sigma2_fbm",
    "sigma2_profile",
    "increment_covariance",
    "matrix_norms",
    "s_weight",
    "s_weight_envelope",
    "gamma_two_norm_bound",
    "fbm_cover_constant",
    "fgn_symbol",
    "symbol_sup",
    "estimate_class_parameters",
]

# dense symmetric eigensolves are used up to this size; Lanczos beyond
_DENSE_EIG_MAX = 1024


@dataclass(frozen=True)
class IncrementalVariance:
    """Variance profile sigma2(s, t) with optional envelope metadata.

    The envelope constants describe c |t-s|^{2 beta} <= sigma2 <=
    C |t-s|^{2H}; ``c_deriv`` is the constant in the entrywise increment
    covariance cover |E Y_i Y_j| <= c_deriv delta^{2H} (1+|i-j|)^{2H-2}.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    stationary: Optional[bool] = None
    H: Optional[float] = None
    beta: Optional[float] = None
    c: Optional[float] = None
    C: Optional[float] = None
    c_deriv: Optional[float] = None

    def __call__(self, s, t):
        return self.fn(s, t)


def sigma2_fbm(H: float) -> IncrementalVariance:
    """Variance profile |t-s|^{2H} of fractional Brownian motion."""
    if not (0.0 < H < 1.0):
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")

    def fn(s, t):
        return np.abs(np.asarray(t, dtype=float) - np.asarray(s, dtype=float)) ** (
            2.0 * H
        )

    return IncrementalVariance(
        fn, stationary=True, H=H, beta=H, c=1.0, C=1.0, c_deriv=fbm_cover_constant(H)
    )


def sigma2_profile(fn, stationary: Optional[bool] = None, **metadata) -> IncrementalVariance:
    """Wrap a plain sigma2 callable; stationarity is probed if unknown."""
    return IncrementalVariance(fn=fn, stationary=stationary, **metadata)


def fbm_cover_constant(H: float, scan: int = 4096) -> float:
    """Smallest c with |rho_H(m)| <= c (1+m)^{2H-2} over the scanned lags.

    The maximum sits at lag zero (value 1) for every Hurst index; the scan
    plus the |rho_H(m)| ~ H|2H-1| m^{2H-2} tail guards the claim.
    """
    m = np.arange(scan + 1)
    ratios = np.abs(fgn_autocovariance(H, m)) * (1.0 + m) ** (2.0 - 2.0 * H)
    return float(np.max(ratios))


# ---------------------------------------------------------------------------
# increment covariance matrix


@dataclass(frozen=True)
class MatrixNorms:
    one: float
    two: float
    infinity: float
    frobenius: float


def _as_grid_matrix(fn, times):
    try:
        s, t = np.meshgrid(times, times, indexing="ij")
        out = np.asarray(fn(s, t), dtype=float)
        if out.shape != s.shape:
            raise TypeError
        return out
    except Exception:
        vec = np.vectorize(fn, otypes=[float])
        s, t = np.meshgrid(times, times, indexing="ij")
        return vec(s, t)


def _eval_pairs(fn, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    try:
        out = np.asarray(fn(s, t), dtype=float)
        if out.shape != s.shape:
            raise TypeError
        return out
    except Exception:
        return np.vectorize(fn, otypes=[float])(s, t)


def _probe_stationary(fn, grid: UniformGrid) -> bool:
    delta, T = grid.delta, grid.T
    gaps = np.array([delta, 2.9 * delta, min(7.3 * delta, 0.83 * T)])
    starts = np.array([0.31 * T, 0.57 * T, 0.79 * T])
    for u in gaps:
        base = float(_eval_pairs(fn, np.array([0.0]), np.array([u]))[0])
        for s in starts:
            if s + u > T:
                continue
            val = float(_eval_pairs(fn, np.array([s]), np.array([s + u]))[0])
            if abs(val - base) > 1e-9 * (abs(base) + 1e-30):
                return False
    return True


@dataclass
class IncrementCovariance:
    """Covariance of the increment vector on a uniform grid.

    ``first_row`` is populated when the matrix is Toeplitz; the dense
    matrix is materialized on demand.  Norms are computed once and cached
    (idempotent, so concurrent readers at worst duplicate work).
    """

    grid: UniformGrid
    toeplitz: bool
    first_row: Optional[np.ndarray] = None
    _dense: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def delta(self) -> float:
        return self.grid.delta

    @property
    def gamma(self) -> np.ndarray:
        if self._dense is None:
            self._dense = _sla.toeplitz(self.first_row)
        return self._dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self.toeplitz:
            return _toeplitz_matvec(self._circ_fft, x)
        return self.gamma @ x

    @cached_property
    def _circ_fft(self):
        r = self.first_row
        circ = np.concatenate([r, [0.0], r[-1:0:-1]])
        return np.fft.rfft(circ)

    @cached_property
    def _extremes(self):
        return _extreme_eigs(self)

    @cached_property
    def norms(self) -> MatrixNorms:
        if self.toeplitz:
            a = np.abs(self.first_row)
            csum = np.concatenate([[0.0], np.cumsum(a)])
            j = np.arange(1, self.N + 1)
            col = csum[j] + csum[self.N - j + 1] - a[0]
            one = float(np.max(col))
            sq = self.first_row**2
            m = np.arange(1, self.N)
            fro = math.sqrt(self.N * sq[0] + float(np.sum(2.0 * (self.N - m) * sq[1:])))
        else:
            colsum = np.sum(np.abs(self.gamma), axis=0)
            one = float(np.max(colsum))
            fro = float(np.linalg.norm(self.gamma, "fro"))
        lo, hi = self._extremes
        return MatrixNorms(one=one, two=max(abs(lo), abs(hi)), infinity=one, frobenius=fro)

    def lambda_range(self):
        """(smallest, largest) eigenvalue."""
        return self._extremes

    def sampling_factor(self) -> np.ndarray:
        """Factor F with F F^T = Gamma, for exact Gaussian sampling."""
        lam, q = _sla.eigh(self.gamma)
        lam = np.clip(lam, 0.0, None)
        return q * np.sqrt(lam)

    def to_csv(self, path) -> None:
        np.savetxt(path, self.gamma, delimiter=",", fmt="%.17g")


def _toeplitz_matvec(circ_fft, x):
    n = x.shape[0]
    buf = np.zeros(2 * n)
    buf[:n] = x
    return np.fft.irfft(np.fft.rfft(buf) * circ_fft, 2 * n)[:n]


def _extreme_eigs(cov: IncrementCovariance):
    n = cov.N
    if n <= 2:
        lam = np.linalg.eigvalsh(cov.gamma)
        return float(lam[0]), float(lam[-1])
    if not cov.toeplitz and n <= _DENSE_EIG_MAX:
        lam = np.linalg.eigvalsh(cov.gamma)
        return float(lam[0]), float(lam[-1])
    if cov.toeplitz and n <= _DENSE_EIG_MAX:
        lam = np.linalg.eigvalsh(cov.gamma)
        return float(lam[0]), float(lam[-1])
    # Lanczos with a fixed start vector keeps results deterministic
    v0 = np.full(n, 1.0 / math.sqrt(n))
    op = LinearOperator((n, n), matvec=cov.matvec, dtype=float)
    hi = float(eigsh(op, k=1, which="LA", v0=v0, tol=1e-12)[0][0])
    # smallest eigenvalue via a shifted largest-eigenvalue solve; the shift
    # uses the one-norm, an upper bound for the two-norm
    tau = cov.norms.one if "norms" in cov.__dict__ else _one_norm_quick(cov)
    shifted = LinearOperator(
        (n, n), matvec=lambda x: tau * x - cov.matvec(x), dtype=float
    )
    lo = tau - float(eigsh(shifted, k=1, which="LA", v0=v0, tol=1e-12)[0][0])
    return lo, hi


def _one_norm_quick(cov: IncrementCovariance) -> float:
    if cov.toeplitz:
        a = np.abs(cov.first_row)
        csum = np.concatenate([[0.0], np.cumsum(a)])
        j = np.arange(1, cov.N + 1)
        return float(np.max(csum[j] + csum[cov.N - j + 1] - a[0]))
    return float(np.max(np.sum(np.abs(cov.gamma), axis=0)))


def increment_covariance(iv: IncrementalVariance, grid: UniformGrid) -> IncrementCovariance:
    """Increment covariance by polarization:

    Gamma_ij = (sigma2(t_{i-1}, t_j) + sigma2(t_i, t_{j-1})
                - sigma2(t_i, t_j) - sigma2(t_{i-1}, t_{j-1})) / 2.

    Raises if the result is indefinite beyond -1e-10 * ||Gamma||_2.
    """
    stationary = iv.stationary
    if stationary is None:
        stationary = _probe_stationary(iv.fn, grid)
    if stationary:
        # second difference of g(u) = sigma2(0, u) along lags
        u = np.arange(grid.N + 1, dtype=float) * grid.delta
        g = _eval_pairs(iv.fn, np.zeros_like(u), u)
        row = np.empty(grid.N)
        row[0] = g[1]
        if grid.N > 1:
            row[1:] = 0.5 * (g[2:] + g[:-2] - 2.0 * g[1:-1])
        cov = IncrementCovariance(grid=grid, toeplitz=True, first_row=row)
    else:
        times = grid.times
        s_mat = _as_grid_matrix(iv.fn, times)
        gamma = 0.5 * (
            s_mat[:-1, 1:] + s_mat[1:, :-1] - s_mat[1:, 1:] - s_mat[:-1, :-1]
        )
        gamma = 0.5 * (gamma + gamma.T)  # polarization is symmetric up to roundoff
        cov = IncrementCovariance(grid=grid, toeplitz=False, _dense=gamma)
    lo, hi = cov.lambda_range()
    if lo < -1e-10 * max(abs(hi), abs(lo)):
        raise ValueError(
            f"increment covariance indefinite: min eigenvalue {lo:.3e} "
            f"against max {hi:.3e}"
        )
    return cov


def matrix_norms(cov: IncrementCovariance) -> MatrixNorms:
    return cov.norms


# ---------------------------------------------------------------------------
# summable two-norm bound


def s_weight(H: float, N: int) -> float:
    """max_j sum_k (1+|k-j|)^{2H-2}, computed exactly.

    This is the row weight of the covariance cover (1+|i-j|)^{2H-2}; it
    stays bounded for H < 1/2, grows like log N at H = 1/2 and like
    N^{2H-1} for H > 1/2.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    c = np.concatenate([[0.0], np.cumsum(np.arange(1, N + 1, dtype=float) ** (2.0 * H - 2.0))])
    j = np.arange(1, N + 1)
    return float(np.max(c[j] + c[N - j + 1] - 1.0))


def s_weight_envelope(H: float, n: float) -> float:
    """Smooth dominating form of ``s_weight``: valid for every N <= n.

    H < 1/2: 2 zeta(2-2H) - 1 (constant); H = 1/2: 1 + 2 log((n+2)/2);
    H > 1/2: (1 + 2 * 1.5^{2H-1} / (2H-1)) * n^{2H-1}.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if H < 0.5:
        return float(2.0 * _special.zeta(2.0 - 2.0 * H) - 1.0)
    if H == 0.5:
        return 1.0 + 2.0 * math.log((n + 2.0) / 2.0)
    k = 1.0 + 2.0 * 1.5 ** (2.0 * H - 1.0) / (2.0 * H - 1.0)
    return float(k * n ** (2.0 * H - 1.0))


def gamma_two_norm_bound(H: float, N: int, delta: float, c_deriv: float) -> float:
    """Upper bound on ||Gamma||_2 via ||Gamma||_2 <= ||Gamma||_1.

    Valid whenever |E Y_i Y_j| <= c_deriv * delta^{2H} * (1+|i-j|)^{2H-2};
    for fBm the smallest such constant is ``fbm_cover_constant`` (= 1, the
    lag-zero term).  Returns c_deriv * delta^{2H} * s_weight(H, N).
    """
    if delta <= 0 or c_deriv <= 0:
        raise ValueError("delta and c_deriv must be positive")
    return c_deriv * delta ** (2.0 * H) * s_weight(H, N)


# ---------------------------------------------------------------------------
# spectral density of fGn


@dataclass(frozen=True)
class SpectralSymbol:
    """Spectral density f of unit-variance fGn on [-pi, pi].

    Normalized numerically so that (1/2pi) int f = rho(0) = 1.  Bounded
    iff H <= 1/2; the Toeplitz eigenvalues converge to sup f from below.
    """

    H: float
    J: int
    const: float

    @property
    def bounded(self) -> bool:
        return self.H <= 0.5

    def evaluate(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if np.any(np.abs(lam) > np.pi + 1e-12):
            raise ValueError("frequency outside [-pi, pi]")
        scalar = lam.ndim == 0
        lam = np.atleast_1d(lam)
        out = self.const * _symbol_unnormalized(self.H, self.J, lam)
        return float(out[0]) if scalar else out


def _symbol_unnormalized(H, J, lam):
    """(1 - cos lam) * sum_{j in Z} |lam + 2 pi j|^{-1-2H}, vectorized."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    expo = -1.0 - 2.0 * H
    j = 2.0 * np.pi * np.arange(1, J + 1)
    series = (np.abs(lam[:, None] + j) ** expo).sum(axis=1)
    series += (np.abs(lam[:, None] - j) ** expo).sum(axis=1)
    # analytic tail: midpoint integral approximation of the |j| > J remainder
    edge = 2.0 * np.pi * (J + 0.5)
    tail = ((edge + lam) ** (-2.0 * H) + (edge - lam) ** (-2.0 * H)) / (
        4.0 * np.pi * H
    )
    one_minus_cos = 1.0 - np.cos(lam)
    # j = 0 term: (1 - cos lam) |lam|^{-1-2H}, with the lam -> 0 limit
    # 0, 1/2 or +inf according to the sign of H - 1/2
    near = np.abs(lam) < 1e-9
    safe = np.where(near, 1.0, np.abs(lam))
    center = one_minus_cos * safe**expo
    if H < 0.5:
        center = np.where(near, 0.5 * np.abs(lam) ** (1.0 - 2.0 * H), center)
    elif H == 0.5:
        center = np.where(near, 0.5, center)
    else:
        center = np.where(near, np.where(lam == 0.0, np.inf,
                                         0.5 * np.abs(lam) ** (1.0 - 2.0 * H)),
                          center)
    return center + one_minus_cos * (series + tail)


def fgn_symbol(H: float, J: int = 1000) -> SpectralSymbol:
    """Build the fGn spectral density, normalizing by quadrature."""
    if not (0.0 < H < 1.0):
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")
    if J < 10:
        raise ValueError("J must be >= 10")

    def unnorm(x):
        return float(_symbol_unnormalized(H, J, np.array([x]))[0])

    integral, _ = _integrate.quad(unnorm, 0.0, np.pi, limit=200)
    mean = integral / np.pi  # (1/2pi) * int_{-pi}^{pi} by symmetry
    return SpectralSymbol(H=H, J=J, const=1.0 / mean)


@dataclass(frozen=True)
class SymbolSup:
    value: float
    infinite: bool


def symbol_sup(symbol: SpectralSymbol, M: int = 2048) -> SymbolSup:
    """sup f over [0, pi] by grid scan with one local refinement."""
    if M < 1024:
        raise ValueError("M must be >= 1024")
    if not symbol.bounded:
        return SymbolSup(value=math.inf, infinite=True)
    lam = np.linspace(0.0, np.pi, M + 1)
    vals = symbol.evaluate(lam)
    k = int(np.argmax(vals))
    lo = lam[max(k - 1, 0)]
    hi = lam[min(k + 1, M)]
    fine = np.linspace(lo, hi, M + 1)
    return SymbolSup(value=float(np.max(symbol.evaluate(fine))), infinite=False)


# ---------------------------------------------------------------------------
# envelope estimation from a variance profile


@dataclass(frozen=True)
class ClassEstimate:
    H_hat: float
    beta_hat: float
    c_hat: float
    C_hat: float
    slope_global: float


def estimate_class_parameters(iv: IncrementalVariance, delta_grid) -> ClassEstimate:
    """Envelope exponents from log sigma2(0, delta) vs log delta.

    The upper envelope C delta^{2H} must dominate as delta -> 0, so H_hat
    is half the smallest local slope; the lower envelope gives beta_hat as
    half the largest.  Envelope constants are then fitted tightly.
    """
    delta = np.sort(np.asarray(delta_grid, dtype=float))
    if delta.size < 4:
        raise ValueError("need at least 4 grid points")
    if delta[0] <= 0:
        raise ValueError("delta grid must be positive")
    if delta[-1] / delta[0] < 99.99:
        raise ValueError("delta grid must span at least two decades")
    var = _eval_pairs(iv.fn, np.zeros_like(delta), delta)
    if np.any(var <= 0):
        raise DegenerateProcessError("sigma2 vanished on the estimation grid")
    x = np.log(delta)
    y = np.log(var)
    local = np.diff(y) / np.diff(x)
    slope_global = float(np.polyfit(x, y, 1)[0])
    h_hat = float(np.min(local) / 2.0)
    beta_hat = float(np.max(local) / 2.0)
    c_hat = float(np.min(var / delta ** (2.0 * beta_hat)))
    big_c = float(np.max(var / delta ** (2.0 * h_hat)))
    return ClassEstimate(
        H_hat=h_hat, beta_hat=beta_hat, c_hat=c_hat, C_hat=big_c,
        slope_global=slope_global,
    )
