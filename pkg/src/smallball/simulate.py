"""Exact simulation of the processes the certificates are checked against.

Fractional Gaussian noise is sampled by circulant embedding (O(N log N))
or by a dense Cholesky factor of the increment covariance; both are exact
in distribution.  Every path is a deterministic function of
(seed, purpose, stream), via a counter-based Philox generator keyed by a
SeedSequence, so Monte Carlo results do not depend on how work is split
across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import linalg as _sla
from scipy import special as _special

from .errors import EmbeddingFailureError
from .paths import SamplePath, UniformGrid

__all__ = [
    "SeedSpec",
    "DistSpec",
    "DriftSpec",
    "ProcessSpec",
    "fgn_autocovariance",
    "simulate_fgn",
    "fgn_increments_block",
    "bm_increments_block",
    "gaussian_increments_block",
    "iid_sums_block",
    "simulate_iid_partial_sums",
    "simulate_path",
    "compose_drift",
]

PURPOSE_PROCESS = 0
PURPOSE_DRIFT = 1


@dataclass(frozen=True)
class SeedSpec:
    """Addressable randomness: (seed, purpose, stream) -> generator.

    Distinct tuples give statistically independent Philox streams; equal
    tuples reproduce draws bit for bit regardless of worker scheduling.
    """

    seed: int
    stream: int = 0
    purpose: int = PURPOSE_PROCESS

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0 or self.purpose < 0:
            raise ValueError("seed, stream and purpose must be non-negative")

    def with_stream(self, stream: int) -> "SeedSpec":
        return SeedSpec(self.seed, int(stream), self.purpose)

    def with_purpose(self, purpose: int) -> "SeedSpec":
        return SeedSpec(self.seed, self.stream, int(purpose))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=int(self.seed), spawn_key=(int(self.purpose), int(self.stream))
        )
        return np.random.Generator(np.random.Philox(seed=ss))


def fgn_autocovariance(H: float, lags) -> np.ndarray:
    """Autocorrelation of unit-variance fractional Gaussian noise.

    rho_H(k) = ((k+1)^{2H} - 2 k^{2H} + |k-1|^{2H}) / 2.
    """
    _check_hurst(H)
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * H
    return 0.5 * ((k + 1.0) ** two_h - 2.0 * k**two_h + np.abs(k - 1.0) ** two_h)


def _check_hurst(H):
    if not (0.0 < H < 1.0):
        raise ValueError(f"Hurst index must lie in (0, 1), got {H}")


@lru_cache(maxsize=32)
def _embedding_eigenvalues(H: float, N: int) -> np.ndarray:
    """Eigenvalues of the length-2N circulant extension of rho_H."""
    rho = fgn_autocovariance(H, np.arange(N + 1))
    row = np.concatenate([rho, rho[-2:0:-1]]) if N > 1 else rho
    lam = np.fft.fft(row).real
    tol = 1e-10 * lam.max()
    if lam.min() < -tol:
        raise EmbeddingFailureError(
            f"circulant embedding indefinite for H={H}, N={N}: "
            f"min eigenvalue {lam.min():.3e}"
        )
    lam = lam.copy()
    lam[lam < 0] = 0.0
    lam.setflags(write=False)
    return lam


@lru_cache(maxsize=16)
def _cholesky_factor(H: float, N: int) -> np.ndarray:
    """Lower Cholesky factor of the unit-variance fGn Toeplitz matrix."""
    gamma = _sla.toeplitz(fgn_autocovariance(H, np.arange(N)))
    factor = _sla.cholesky(gamma, lower=True)
    factor.setflags(write=False)
    return factor


def fgn_increments_block(
    H: float,
    N: int,
    delta: float,
    seed: SeedSpec,
    streams,
    method: str = "circulant",
) -> np.ndarray:
    """Sample len(streams) independent fGn vectors, one per stream id.

    Returns a (len(streams), N) array with Cov(Y_i, Y_j) =
    delta^{2H} * rho_H(|i-j|).  Row b depends only on
    (seed.seed, seed.purpose, streams[b]).
    """
    _check_hurst(H)
    if N < 1:
        raise ValueError("N must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    streams = np.asarray(streams, dtype=np.int64)
    scale = delta**H
    if H == 0.5:
        # embedding eigenvalues are identically 1: increments are iid
        out = np.empty((streams.size, N))
        for b, s in enumerate(streams):
            out[b] = seed.with_stream(s).generator().standard_normal(N)
        return scale * out
    if method == "circulant":
        return scale * _fgn_block_circulant(H, N, seed, streams)
    if method == "cholesky":
        factor = _cholesky_factor(H, N)
        z = np.empty((streams.size, N))
        for b, s in enumerate(streams):
            z[b] = seed.with_stream(s).generator().standard_normal(N)
        return scale * (z @ factor.T)
    raise ValueError(f"unknown method {method!r}")


def _fgn_block_circulant(H, N, seed, streams):
    lam = _embedding_eigenvalues(H, N)
    m = 2 * N
    # fixed draw layout per path: [xi_0, xi_N, xi_1..xi_{N-1}, eta_1..eta_{N-1}]
    z = np.empty((streams.size, m))
    for b, s in enumerate(streams):
        z[b] = seed.with_stream(s).generator().standard_normal(m)
    # the hermitian spectral vector has a real FFT; feeding the conjugate
    # half-spectrum to irfft computes it with half the transform work
    w = np.empty((streams.size, N + 1), dtype=complex)
    w[:, 0] = np.sqrt(lam[0] / m) * z[:, 0]
    w[:, N] = np.sqrt(lam[N] / m) * z[:, 1]
    if N > 1:
        half = np.sqrt(lam[1:N] / (2.0 * m))
        head = w[:, 1:N]
        head.real = half * z[:, 2 : N + 1]
        np.multiply(z[:, N + 1 :], -half, out=head.imag)
    return m * np.fft.irfft(w, n=m, axis=1)[:, :N]


def simulate_fgn(
    H: float, N: int, delta: float, seed: SeedSpec, method: str = "circulant"
) -> np.ndarray:
    """One fGn increment vector; see ``fgn_increments_block``."""
    return fgn_increments_block(H, N, delta, seed, [seed.stream], method)[0]


def bm_increments_block(N: int, delta: float, seed: SeedSpec, streams) -> np.ndarray:
    """Brownian increments: iid N(0, delta), one row per stream."""
    return fgn_increments_block(0.5, N, delta, seed, streams)


def gaussian_increments_block(factor: np.ndarray, seed: SeedSpec, streams) -> np.ndarray:
    """Increments with covariance factor @ factor.T, one row per stream."""
    n = factor.shape[0]
    z = np.empty((len(streams), n))
    for b, s in enumerate(np.asarray(streams, dtype=np.int64)):
        z[b] = seed.with_stream(s).generator().standard_normal(n)
    return z @ factor.T


# ---------------------------------------------------------------------------
# iid partial sums


@dataclass(frozen=True)
class DistSpec:
    """Bounded scalar distribution on [low, high] with exact E|Z|.

    kinds: "uniform", "rademacher", "scaled_beta" (affine image of a
    Beta(a, b) variable).
    """

    kind: str
    low: float
    high: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "rademacher", "scaled_beta"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (self.low < self.high):
            raise ValueError("need low < high")
        if self.kind == "scaled_beta" and (self.a <= 0 or self.b <= 0):
            raise ValueError("beta parameters must be positive")

    @classmethod
    def uniform(cls, low: float, high: float) -> "DistSpec":
        return cls("uniform", float(low), float(high))

    @classmethod
    def rademacher(cls) -> "DistSpec":
        return cls("rademacher", -1.0, 1.0)

    @classmethod
    def scaled_beta(cls, a: float, b: float, low: float, high: float) -> "DistSpec":
        return cls("scaled_beta", float(low), float(high), float(a), float(b))

    @property
    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.low + self.high)
        if self.kind == "rademacher":
            return 0.0
        return self.low + (self.high - self.low) * self.a / (self.a + self.b)

    @property
    def mean_abs(self) -> float:
        """E|Z|, exact per family (no quadrature)."""
        c, d = self.low, self.high
        if self.kind == "rademacher":
            return 1.0
        if c >= 0:
            return self.mean
        if d <= 0:
            return -self.mean
        if self.kind == "uniform":
            return (c * c + d * d) / (2.0 * (d - c))
        # scaled beta straddling zero: E|Z| = EZ - 2 E[Z; Z < 0], with the
        # partial moment expressed through regularized incomplete betas
        a, b = self.a, self.b
        z0 = -c / (d - c)
        cdf = _special.betainc(a, b, z0)
        partial = (a / (a + b)) * _special.betainc(a + 1.0, b, z0)
        below = c * cdf + (d - c) * partial
        return self.mean - 2.0 * below

    @property
    def abs_bound(self) -> float:
        """sup |Z| = |low| v |high|."""
        return max(abs(self.low), abs(self.high))

    @property
    def range(self) -> float:
        return self.high - self.low

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size) * 2.0 - 1.0
        return self.low + (self.high - self.low) * rng.beta(self.a, self.b, size)


def iid_sums_block(dist: DistSpec, n: int, seed: SeedSpec, streams) -> np.ndarray:
    """Partial-sum trajectories S_0..S_n, one row per stream: (B, n+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.zeros((len(streams), n + 1))
    for b, s in enumerate(np.asarray(streams, dtype=np.int64)):
        z = dist.sample(seed.with_stream(s).generator(), n)
        np.cumsum(z, out=out[b, 1:])
    return out


def simulate_iid_partial_sums(dist: DistSpec, n: int, seed: SeedSpec) -> SamplePath:
    """Partial sums as a path on the integer grid t_k = k."""
    values = iid_sums_block(dist, n, seed, [seed.stream])[0]
    return SamplePath(UniformGrid(float(n), int(n)), values)


# ---------------------------------------------------------------------------
# drift and process composition


@dataclass(frozen=True)
class DriftSpec:
    """Drift integrand a(t) added to the process as y = x + int_0^t a ds.

    kinds:
      none         -- a = 0
      constant     -- a = level
      bounded_wave -- a(t) = amplitude * sin(2 pi frequency t)
      fbm          -- independent fBm with Hurst H2 (purpose-1 stream)
      shared_fbm   -- a(t) = x(t), the simulated process itself
    """

    kind: str = "none"
    level: float = 0.0
    amplitude: float = 1.0
    frequency: float = 1.0
    H2: float = 0.5

    def __post_init__(self):
        if self.kind not in ("none", "constant", "bounded_wave", "fbm", "shared_fbm"):
            raise ValueError(f"unknown drift kind {self.kind!r}")

    def deterministic_values(self, grid: UniformGrid) -> Optional[np.ndarray]:
        if self.kind == "none":
            return np.zeros(grid.N + 1)
        if self.kind == "constant":
            return np.full(grid.N + 1, self.level)
        if self.kind == "bounded_wave":
            return self.amplitude * np.sin(2.0 * np.pi * self.frequency * grid.times)
        return None

    def sup_bound(self) -> Optional[float]:
        """Almost-sure bound on |a|, when one exists."""
        if self.kind == "none":
            return 0.0
        if self.kind == "constant":
            return abs(self.level)
        if self.kind == "bounded_wave":
            return abs(self.amplitude)
        return None


@dataclass(frozen=True)
class ProcessSpec:
    """What to simulate: the centered process x plus an optional drift."""

    kind: str
    H: float = 0.5
    drift: DriftSpec = DriftSpec()
    method: str = "circulant"
    sigma2: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        if self.kind not in ("fbm", "bm", "gaussian"):
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.kind == "fbm":
            _check_hurst(self.H)
        if self.kind == "gaussian" and self.sigma2 is None:
            raise ValueError("gaussian kind requires a sigma2 callable")

    def label(self) -> str:
        if self.kind == "fbm":
            base = f"fbm(H={self.H})"
        elif self.kind == "bm":
            base = "bm"
        else:
            base = "gaussian"
        return base if self.drift.kind == "none" else f"{base}+{self.drift.kind}"


def compose_drift(x: SamplePath, a: SamplePath) -> SamplePath:
    """y(t_k) = x(t_k) + delta * sum_{j<k} a(t_j)  (left Riemann integral)."""
    if x.grid != a.grid:
        raise ValueError("x and a must share a grid")
    integral = np.concatenate([[0.0], np.cumsum(a.values[:-1])]) * x.grid.delta
    return SamplePath(x.grid, x.values + integral)


def _x_increments_block(spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec, streams):
    if spec.kind == "fbm":
        return fgn_increments_block(
            spec.H, grid.N, grid.delta, seed, streams, spec.method
        )
    if spec.kind == "bm":
        return bm_increments_block(grid.N, grid.delta, seed, streams)
    from .gausscov import increment_covariance, sigma2_profile

    cov = increment_covariance(sigma2_profile(spec.sigma2), grid)
    return gaussian_increments_block(cov.sampling_factor(), seed, streams)


def x_values_block(
    spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec, streams
) -> np.ndarray:
    """Values of the centered process x on the grid: (B, N+1)."""
    inc = _x_increments_block(spec, grid, seed.with_purpose(PURPOSE_PROCESS), streams)
    x = np.zeros((inc.shape[0], grid.N + 1))
    np.cumsum(inc, axis=1, out=x[:, 1:])
    return x


def compose_values_block(
    x: np.ndarray, spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec, streams
) -> np.ndarray:
    """y values from precomputed x values, y = x + int_0^t a ds.

    Deterministic drifts are integrated once; random drifts draw from the
    purpose-1 substream of the same stream id, so composition order cannot
    perturb the process draws.
    """
    drift = spec.drift
    if drift.kind == "none":
        return x
    det = drift.deterministic_values(grid)
    delta = grid.delta
    if det is not None:
        integral = np.concatenate([[0.0], np.cumsum(det[:-1])]) * delta
        return x + integral[None, :]
    if drift.kind == "shared_fbm":
        a_vals = x
    else:  # independent fbm drift
        a_inc = fgn_increments_block(
            drift.H2, grid.N, delta, seed.with_purpose(PURPOSE_DRIFT), streams
        )
        a_vals = np.zeros_like(x)
        np.cumsum(a_inc, axis=1, out=a_vals[:, 1:])
    integral = np.zeros_like(x)
    np.cumsum(a_vals[:, :-1], axis=1, out=integral[:, 1:])
    return x + integral * delta


def path_values_block(
    spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec, streams
) -> np.ndarray:
    """Values of y = x + int a on the grid for a block of streams: (B, N+1)."""
    x = x_values_block(spec, grid, seed, streams)
    return compose_values_block(x, spec, grid, seed, streams)


def drift_values_block(
    spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec, streams
) -> np.ndarray:
    """Values of the drift integrand a on the grid: (B, N+1).

    Uses the same substream layout as path_values_block, so the drift paths
    returned here are exactly the ones entering the composed process.
    """
    drift = spec.drift
    det = drift.deterministic_values(grid)
    if det is not None:
        return np.broadcast_to(det, (len(streams), grid.N + 1)).copy()
    if drift.kind == "shared_fbm":
        inc = _x_increments_block(
            spec, grid, seed.with_purpose(PURPOSE_PROCESS), streams
        )
    else:
        inc = fgn_increments_block(
            drift.H2, grid.N, grid.delta, seed.with_purpose(PURPOSE_DRIFT), streams
        )
    a_vals = np.zeros((inc.shape[0], grid.N + 1))
    np.cumsum(inc, axis=1, out=a_vals[:, 1:])
    return a_vals


def simulate_path(spec: ProcessSpec, grid: UniformGrid, seed: SeedSpec) -> SamplePath:
    """Simulate one path of y = x + int a on the given grid."""
    values = path_values_block(spec, grid, seed, [seed.stream])[0]
    return SamplePath(grid, values)
