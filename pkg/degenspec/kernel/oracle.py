"""
Monte Carlo covariance oracle.

Paths of the base process are simulated on a uniform fine grid of [0, 1], transformed exactly the
way the kernel defines the process (integration, centering, conditioning) and read off at the
requested grid by linear interpolation.
"""
import logging
import math
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.linalg import expm, solve_continuous_lyapunov

from degenspec import rng
from degenspec.constants import DEFAULTS, PROCESS
from degenspec.errors import OracleError
from degenspec.kernel import CovMatrix
from degenspec.kernel.catalog import KernelSpec, matern, wiener_cross

LOGGER = logging.getLogger(__name__)


def _wiener(generator: np.random.Generator, paths: int, steps: int) -> np.ndarray:
    increments = generator.standard_normal((paths, steps)) * np.sqrt(1.0 / steps)
    out = np.zeros((paths, steps + 1))
    np.cumsum(increments, axis=1, out=out[:, 1:])
    return out


def _ornstein_uhlenbeck(
    generator: np.random.Generator, paths: int, steps: int, alpha: float, stationary: bool
) -> np.ndarray:
    phi = np.exp(-alpha / steps)
    noise = np.sqrt((1.0 - phi * phi) / (2.0 * alpha))
    shocks = generator.standard_normal((paths, steps + 1))
    out = np.empty((paths, steps + 1))
    out[:, 0] = shocks[:, 0] / np.sqrt(2.0 * alpha) if stationary else 0.0
    for i in range(1, steps + 1):
        out[:, i] = phi * out[:, i - 1] + noise * shocks[:, i]
    return out


def _bogolyubov(generator: np.random.Generator, paths: int, alpha: float) -> np.ndarray:
    """periodic process with spectrum 1/(alpha^2 + 4 pi^2 k^2), via an inverse real FFT"""
    modes = DEFAULTS.FOURIER_MODES
    size = 2 * modes
    k = np.arange(modes + 1)
    spectrum = 1.0 / (alpha * alpha + 4.0 * np.pi**2 * k * k)
    xi = generator.standard_normal((paths, modes + 1))
    eta = generator.standard_normal((paths, modes + 1))
    coefficients = (size / 2) * np.sqrt(2.0 * spectrum) * (xi - 1j * eta)
    coefficients[:, 0] = size * np.sqrt(spectrum[0]) * xi[:, 0]
    coefficients[:, modes] = size * np.sqrt(2.0 * spectrum[modes]) * xi[:, modes]
    periodic = np.fft.irfft(coefficients, n=size, axis=1)
    return np.concatenate([periodic, periodic[:, :1]], axis=1)


def _matern(generator: np.random.Generator, paths: int, steps: int, order: int) -> np.ndarray:
    """
    Exact recursion of the state (X, X', ..) of (D + 1)^(order + 1) X = noise, the state-space
    form of the Matern process, rescaled to the catalog variance.
    """
    size = order + 1
    drift = np.eye(size, k=1)
    drift[-1] = [-math.comb(size, i) for i in range(size)]
    diffusion = np.zeros((size, size))
    diffusion[-1, -1] = 1.0
    stationary = solve_continuous_lyapunov(drift, -diffusion)
    transition = expm(drift / steps)
    noise = stationary - transition @ stationary @ transition.T
    eigenvalues, vectors = np.linalg.eigh((noise + noise.T) / 2)
    if eigenvalues.min() < -DEFAULTS.STEP_COVARIANCE_TOLERANCE * eigenvalues.max():
        raise OracleError(
            f"matern({order}) step covariance is not positive: {eigenvalues.min():.3e}"
        )
    factor = vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))
    start = np.linalg.cholesky(stationary)

    state = generator.standard_normal((paths, size)) @ start.T
    out = np.empty((paths, steps + 1))
    out[:, 0] = state[:, 0]
    for i in range(1, steps + 1):
        state = state @ transition.T + generator.standard_normal((paths, size)) @ factor.T
        out[:, i] = state[:, 0]
    return out * np.sqrt(matern(order, 0.0, 0.0, exp=np.exp) / stationary[0, 0])


def _base_paths(k: KernelSpec, generator: np.random.Generator, paths: int) -> np.ndarray:
    steps = DEFAULTS.FINE_STEPS
    t = np.linspace(0.0, 1.0, steps + 1)
    process = k.base
    param = None if k.param is None else float(k.param)
    if process == PROCESS.MATERN:
        return _matern(generator, paths, steps, k.integrations)
    if process == PROCESS.OU_STATIONARY:
        return _ornstein_uhlenbeck(generator, paths, steps, param, stationary=True)
    if process == PROCESS.OU_ZERO:
        return _ornstein_uhlenbeck(generator, paths, steps, param, stationary=False)
    if process == PROCESS.BOGOLYUBOV:
        return _bogolyubov(generator, paths, param)
    w = _wiener(generator, paths, steps)
    if process in (PROCESS.WIENER, PROCESS.BRIDGED_INTEGRATED_WIENER):
        return w
    if process == PROCESS.BROWNIAN_BRIDGE:
        return w - t * w[:, -1:]
    if process == PROCESS.ELONGATED_BRIDGE:
        return w - param * t * w[:, -1:]
    if process == PROCESS.CENTERED_WIENER:
        return _center(w)
    if process == PROCESS.CENTERED_BRIDGE:
        return _center(w - t * w[:, -1:])
    if process == PROCESS.SLEPIAN:
        # W(t + c) - W(t) splits into independent pieces over [t, 1], [1, c] and [c, c + t]
        tail = _wiener(generator, paths, steps)
        middle = generator.standard_normal((paths, 1)) * np.sqrt(param - 1.0)
        return (w[:, -1:] - w) + middle + tail
    raise OracleError(f"no path simulation for {process}")


def _integrate(x: np.ndarray, endpoint: int) -> np.ndarray:
    y = cumulative_trapezoid(x, dx=1.0 / (x.shape[1] - 1), axis=1, initial=0)
    return y - y[:, -1:] if endpoint else y


def _center(x: np.ndarray) -> np.ndarray:
    return x - trapezoid(x, dx=1.0 / (x.shape[1] - 1), axis=1)[:, None]


def _bridge(w: np.ndarray, order: int) -> np.ndarray:
    """condition W_order on W_j(1) = 0, j = 0..order, by regression on the model covariance"""
    t = np.linspace(0.0, 1.0, w.shape[1])
    levels = [w]
    for _ in range(order):
        levels.append(_integrate(levels[-1], 0))
    ends = np.stack([level[:, -1] for level in levels], axis=1)
    size = order + 1
    gram = np.array([[wiener_cross(i, j, 1.0, 1.0) for j in range(size)] for i in range(size)])
    cross = np.array([[wiener_cross(order, j, x, 1.0) for j in range(size)] for x in t])
    return levels[-1] - ends @ np.linalg.solve(gram, cross.T)


def transform(k: KernelSpec, x: np.ndarray) -> np.ndarray:
    if k.process == PROCESS.BRIDGED_INTEGRATED_WIENER:
        return _bridge(x, k.integrations)
    if k.process in (PROCESS.CENTERED_INTEGRATED_WIENER, PROCESS.CENTERED_INTEGRATED_BRIDGE):
        for _ in range(k.integrations):
            x = _center(_integrate(x, 0))
        return x
    if k.process == PROCESS.MATERN:
        return x
    for endpoint in k.endpoints:
        x = _integrate(x, endpoint)
    return x


def _sample(k: KernelSpec, grid: np.ndarray, seed: int, chunk: int, paths: int) -> np.ndarray:
    generator = rng.substream(seed, chunk)
    x = transform(k, _base_paths(k, generator, paths))
    steps = x.shape[1] - 1
    position = grid * steps
    index = np.minimum(np.floor(position).astype(int), steps - 1)
    fraction = position - index
    return x[:, index] * (1.0 - fraction) + x[:, index + 1] * fraction


def mc_covariance_oracle(
    k: KernelSpec,
    grid: Sequence[float],
    n_paths: int,
    seed: int = DEFAULTS.SEED,
    workers: int = DEFAULTS.WORKERS,
    chunk_size: int = DEFAULTS.ORACLE_CHUNK,
) -> CovMatrix:
    """
    Empirical covariance of `n_paths` simulated paths at `grid`, with per-entry standard errors.
    """
    points = np.asarray(grid, dtype=float)
    if n_paths < 2:
        raise ValueError(f"need at least 2 paths, got {n_paths}")
    if points.size == 0 or points.min() < 0 or points.max() > 1:
        raise ValueError("grid must be a nonempty subset of [0, 1]")

    def work(chunk: int, paths: int):
        values = _sample(k, points, seed, chunk, paths)
        products = values[:, :, None] * values[:, None, :]
        LOGGER.debug("oracle chunk %d: %d paths", chunk, paths)
        return products.sum(axis=0), (products * products).sum(axis=0)

    first = np.zeros((points.size, points.size))
    second = np.zeros_like(first)
    for total, squares in rng.map_chunks(work, n_paths, chunk_size, workers):
        first += total
        second += squares
    # the processes are centered, so the second moment is the covariance
    mean = first / n_paths
    variance = np.maximum(second / n_paths - mean * mean, 0.0) * n_paths / (n_paths - 1)
    return CovMatrix(points, mean, np.sqrt(variance / n_paths))
