"""Semi-discrete Brownian polymer: partition functions and the T-hierarchy.

Brownian motions are sampled on a uniform grid of step ``delta``. Partition
functions follow the recursion ``Z_h(s) = int_0^s Z_{h-1}(r) e^{B_h(s) - B_h(r)} dr``
with a cumulative trapezoid rule carried out in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asymptotics import kpz_constants
from .rng import as_generator, replica_rng

__all__ = [
    "PolymerEnvironment", "HierarchyState", "log_partition_paths", "simulate_partition",
    "simulate_partition_batch", "partition_matrix", "simulate_hierarchy", "lln_experiment",
    "median_of_means",
]


@dataclass
class PolymerEnvironment:
    """Gaussian increments of ``N`` Brownian motions on ``[0, horizon]``.

    ``increments`` has shape ``(..., N, M)`` with ``M = horizon / grid_step``;
    leading axes index independent replicas.
    """
    grid_step: float
    horizon: float
    increments: np.ndarray

    @classmethod
    def sample(cls, N: int, horizon: float, grid_step: float, rng=None,
               replicas: int | None = None) -> "PolymerEnvironment":
        rng = as_generator(rng)
        M = int(round(horizon / grid_step))
        if M < 1 or abs(M * grid_step - horizon) > 1e-9 * horizon:
            raise ValueError("horizon must be a multiple of grid_step")
        shape = (N, M) if replicas is None else (replicas, N, M)
        inc = rng.standard_normal(shape) * math.sqrt(grid_step)
        return cls(grid_step, horizon, inc)

    @classmethod
    def for_replicas(cls, N: int, horizon: float, grid_step: float, master_seed: int,
                     start: int, count: int) -> "PolymerEnvironment":
        """Stack environments of replicas ``start..start+count-1``, each from its derived seed."""
        M = int(round(horizon / grid_step))
        inc = np.empty((count, N, M))
        for r in range(count):
            inc[r] = replica_rng(master_seed, start + r).standard_normal((N, M))
        return cls(grid_step, horizon, inc * math.sqrt(grid_step))

    @property
    def N(self) -> int:
        return self.increments.shape[-2]

    def paths(self) -> np.ndarray:
        """B_h on the grid including ``B_h(0) = 0``; shape ``(..., N, M+1)``."""
        inc = self.increments
        out = np.zeros(inc.shape[:-1] + (inc.shape[-1] + 1,))
        np.cumsum(inc, axis=-1, out=out[..., 1:])
        return out


@dataclass
class HierarchyState:
    """Triangular array ``T[h][k]`` (0-based) with ``k <= h``; leading replica axes allowed."""
    T: list[np.ndarray]
    tau: float

    def row(self, h: int) -> np.ndarray:
        return self.T[h - 1]


def _check_grid(env: PolymerEnvironment, t: float):
    if env.grid_step > t / 100 + 1e-15:
        raise ValueError("grid step too coarse: need delta <= t/100")
    if env.horizon + 1e-12 < t:
        raise ValueError("environment does not cover [0, t]")


def log_partition_paths(B: np.ndarray, delta: float, start: int = 0) -> np.ndarray:
    """log Z_{(0,start+1) -> (s,h)} on the grid for every level ``h > start``.

    Parameters
    ----------
    B : array (..., N, M+1)
        Brownian paths on the grid.
    delta : float
        Grid step.
    start : int
        0-based index of the starting level.

    Returns
    -------
    array (..., N, M+1)
        Levels below ``start`` are ``-inf``.
    """
    N = B.shape[-2]
    out = np.full(B.shape, -np.inf)
    out[..., start, :] = B[..., start, :]
    logd = math.log(delta)
    for h in range(start + 1, N):
        g = out[..., h - 1, :] - B[..., h, :] + logd
        C = np.logaddexp.accumulate(g, axis=-1)
        # trapezoid: drop half of the two endpoint terms
        ends = np.logaddexp(g[..., :1], g) - math.log(2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.exp(ends - C)
            logI = C + np.log1p(-np.minimum(ratio, 1.0))
        logI[..., 0] = -np.inf
        out[..., h, :] = B[..., h, :] + logI
    return out


def simulate_partition(N: int, t: float, env: PolymerEnvironment) -> np.ndarray:
    """log Z_N^t for the environment (vectorized over leading replica axes).

    Returns the logarithm; ``Z = exp`` of it is positive by construction.
    """
    _check_grid(env, t)
    m = int(round(t / env.grid_step))
    B = env.paths()[..., :N, :m + 1]
    return log_partition_paths(B, env.grid_step)[..., N - 1, m]


def simulate_partition_batch(N: int, t: float, replicas: int, master_seed: int = 0,
                             delta: float = 1e-3, chunk: int | None = None) -> np.ndarray:
    """log Z_N^t for ``replicas`` independent environments with derived seeds."""
    M = int(round(t / delta))
    chunk = chunk or max(1, int(2e7 // max(1, N * M)))
    out = np.empty(replicas)
    for s in range(0, replicas, chunk):
        c = min(chunk, replicas - s)
        env = PolymerEnvironment.for_replicas(N, t, delta, master_seed, s, c)
        out[s:s + c] = simulate_partition(N, t, env)
    return out


def partition_matrix(env: PolymerEnvironment, tau: float) -> np.ndarray:
    """log Z_{(0,i) -> (tau,j)} for all ``i <= j``; ``-inf`` below the diagonal.

    Shape ``(..., N, N)`` indexed ``[i-1, j-1]``.
    """
    m = int(round(tau / env.grid_step))
    B = env.paths()[..., : m + 1]
    N = env.N
    out = np.full(B.shape[:-2] + (N, N), -np.inf)
    for i in range(N):
        out[..., i, :] = log_partition_paths(B, env.grid_step, start=i)[..., :, m]
    return out


def _lgv_sums(logZ: np.ndarray) -> list[np.ndarray]:
    """S[h-1][k-1] = log det[Z_{i -> h-k+j}]_{i,j<=k}, computed with per-row scaling."""
    N = logZ.shape[-1]
    sums = []
    for h in range(1, N + 1):
        row = []
        for k in range(1, h + 1):
            cols = np.arange(h - k, h)
            sub = logZ[..., :k, :][..., cols]
            scale = np.max(sub, axis=-1, keepdims=True)
            sign, logdet = np.linalg.slogdet(np.exp(sub - scale))
            if np.any(sign <= 0):
                cond = np.linalg.cond(np.exp(sub - scale))
                raise FloatingPointError(
                    f"nonpositive path determinant at h={h}, k={k} (condition {np.max(cond):.2e})")
            row.append(logdet + scale[..., 0].sum(axis=-1))
        sums.append(np.stack(row, axis=-1))
    return sums


def _lgv_state(env: PolymerEnvironment, tau: float) -> HierarchyState:
    sums = _lgv_sums(partition_matrix(env, tau))
    T = [np.diff(S, axis=-1, prepend=0.0) for S in sums]
    return HierarchyState(T, tau)


def _sde_drift(T: list[np.ndarray]) -> list[np.ndarray]:
    """Drift terms e^{T_{h-1,k} - T_{h,k}} - e^{T_{h-1,k-1} - T_{h,k-1}}."""
    out = [np.zeros_like(T[0])]
    for h in range(1, len(T)):
        a = np.zeros_like(T[h])
        a[..., :h] = np.exp(T[h - 1] - T[h][..., :h])
        b = np.zeros_like(T[h])
        b[..., 1:] = a[..., :h]
        out.append(a - b)
    return out


def simulate_hierarchy(N: int, tau: float, env: PolymerEnvironment, method: str = "lgv",
                       tau0: float = 0.05) -> HierarchyState:
    """The array ``T_{h,k}`` at time ``tau``.

    ``method='lgv'`` uses the nonintersecting-path determinant of single-path
    partition functions; ``method='sde'`` starts from the ``lgv`` state at
    ``tau0`` and integrates the hierarchy by Euler-Maruyama on the same noise.
    """
    _check_grid(env, tau)
    if env.N < N:
        raise ValueError("environment has too few levels")
    sub = PolymerEnvironment(env.grid_step, env.horizon, env.increments[..., :N, :])
    if method == "lgv":
        return _lgv_state(sub, tau)
    if method != "sde":
        raise ValueError(f"unknown method {method!r}")
    m0 = int(round(tau0 / env.grid_step))
    if m0 < 1:
        raise ValueError("warm-start time below one grid step")
    state = _lgv_state(sub, m0 * env.grid_step)
    T = [x.copy() for x in state.T]
    m = int(round(tau / env.grid_step))
    dt = env.grid_step
    for step in range(m0, m):
        dB = sub.increments[..., :, step]
        drift = _sde_drift(T)
        new = []
        for h in range(N):
            dT = drift[h] * dt
            dT[..., 0] += dB[..., h]
            if h > 0:
                dT[..., 1:] += new[h - 1][..., :h] - T[h - 1][..., :h]
            new.append(T[h] + dT)
        T = new
    return HierarchyState(T, m * dt)


def median_of_means(x: np.ndarray, blocks: int = 32) -> tuple[float, float]:
    """Median-of-means estimate and a standard-error proxy from the block spread."""
    x = np.asarray(x, float)
    n = len(x) // blocks * blocks
    means = x[:n].reshape(blocks, -1).mean(axis=1)
    med = float(np.median(means))
    # sd of the median of b block means is about 1.2533 sd(block mean)/sqrt(b)
    se = float(1.2533 * means.std(ddof=1) / math.sqrt(blocks))
    return med, se


@dataclass
class LLNResult:
    mean: float
    stderr: float
    f_target: float
    bias_scale: float
    samples: np.ndarray


def lln_experiment(N: int, kappa: float, replicas: int, delta: float = 0.02,
                   master_seed: int = 0) -> LLNResult:
    """Sample mean of log Z_N^{kappa N} / N against the constant f_kappa.

    ``bias_scale = N^{-2/3}`` is the order of the expected finite-N offset.
    With one replica the standard error is undefined and reported as NaN.
    """
    t = kappa * N
    logZ = simulate_partition_batch(N, t, replicas, master_seed, delta)
    x = logZ / N
    se = float(x.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else float("nan")
    return LLNResult(float(x.mean()), se, kpz_constants(kappa).f, N ** (-2 / 3), x)
