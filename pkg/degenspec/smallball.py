"""
Small ball probabilities P{|X|_mu <= eps} from a computed spectrum.

By the Karhunen-Loeve expansion |X|_mu^2 has the law of S = sum_j lambda_j xi_j^2 with independent
standard normals xi_j, so ln P{S <= eps^2} is estimated by Monte Carlo, by a saddlepoint
approximation of the left tail of S, or predicted from the measure alone as -C ln^2(1/eps).
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from mpmath import mpf

from degenspec import artifacts, rng, structs
from degenspec.constants import DEFAULTS, METHOD
from degenspec.errors import ConvergenceError, FitError, SmallBallError
from degenspec.kernel import KernelSpec, operator_order
from degenspec.measure import MeasureSpec, to_mpf
from degenspec.spectrum import Spectrum, scaling_ratio, trusted

LOGGER = logging.getLogger(__name__)

Eps = Union[str, float, mpf]


@dataclass(frozen=True)
class SmallBallEstimate:
    eps: Eps
    log_prob: float
    method: str
    stderr: Optional[float] = None
    n_samples: Optional[int] = None
    seed: Optional[int] = None
    truncation_bound: Optional[float] = None

    def row(self) -> Tuple:
        eps = self.eps if isinstance(self.eps, str) else mpmath.nstr(mpf(self.eps), 17)
        return eps, self.log_prob, self.method, self.stderr, self.n_samples, self.seed


@dataclass(frozen=True)
class AsymptoticParams:
    C: float
    q: float
    n: int
    ell: int


class Samples(NamedTuple):
    values: np.ndarray
    # sum of the eigenvalues left out of the form
    tail_bound: float


def parse_eps(eps: Eps) -> mpf:
    value = mpf(eps.strip()) if isinstance(eps, str) else to_mpf(eps)
    if not value > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return value


def _split(sp: Spectrum) -> Tuple[Tuple[mpf, ...], mpf]:
    kept = trusted(sp)
    with mpmath.workprec(sp.precision_bits):
        dropped = mpmath.fsum(sp.eigenvalues[len(kept) :])
    if dropped:
        LOGGER.warning(
            "dropping %d untrusted eigenvalues of total mass %s",
            len(sp) - len(kept),
            mpmath.nstr(dropped),
        )
    return kept, dropped


def sample_quadratic_form(
    sp: Spectrum,
    n_samples: int,
    seed: int = DEFAULTS.SEED,
    workers: int = DEFAULTS.WORKERS,
    chunk_size: int = DEFAULTS.SAMPLE_CHUNK,
) -> Samples:
    """`n_samples` draws of sum_j lambda_j xi_j^2 over the trusted eigenvalues"""
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    kept, dropped = _split(sp)
    weights = np.array([float(x) for x in kept])

    def work(chunk: int, length: int) -> np.ndarray:
        xi = rng.standard_normal(rng.substream(seed, chunk), (length, len(weights)))
        return (xi * xi) @ weights

    values = np.concatenate(rng.map_chunks(work, n_samples, chunk_size, workers))
    return Samples(values, float(dropped))


def estimate_small_ball_mc(
    sp: Spectrum,
    eps: Eps,
    n_samples: int = DEFAULTS.N_SAMPLES,
    seed: int = DEFAULTS.SEED,
    workers: int = DEFAULTS.WORKERS,
) -> SmallBallEstimate:
    """
    Fraction of samples inside the ball. `stderr` is the binomial standard error carried to the
    log scale, sqrt((1 - p) / (n p)).
    """
    r = float(parse_eps(eps) ** 2)
    samples = sample_quadratic_form(sp, n_samples, seed, workers)
    hits = int(np.count_nonzero(samples.values <= r))
    if not hits:
        raise SmallBallError(
            f"no sample out of {n_samples} fell inside eps = {eps}, use the saddlepoint method"
        )
    p = hits / n_samples
    return SmallBallEstimate(
        eps=eps,
        log_prob=float(np.log(p)),
        method=METHOD.MC,
        stderr=float(np.sqrt((1 - p) / (n_samples * p))),
        n_samples=n_samples,
        seed=seed,
        truncation_bound=samples.tail_bound,
    )


class _Tilt:
    """cumulants of S under the exponential tilt exp(-theta S)"""

    def __init__(self, eigenvalues: Sequence[mpf]):
        self.eigenvalues = eigenvalues

    def _sum(self, theta: mpf, power: int) -> mpf:
        return mpmath.fsum((x / (1 + 2 * theta * x)) ** power for x in self.eigenvalues)

    def mean(self, theta: mpf) -> mpf:
        return self._sum(theta, 1)

    def cumulants(self, theta: mpf) -> Tuple[mpf, mpf, mpf]:
        """second, third and fourth cumulants"""
        return 2 * self._sum(theta, 2), 8 * self._sum(theta, 3), 48 * self._sum(theta, 4)

    def log_laplace(self, theta: mpf) -> mpf:
        """ln E exp(-theta S)"""
        return -mpmath.fsum(mpmath.log1p(2 * theta * x) for x in self.eigenvalues) / 2


def _solve_tilt(tilt: _Tilt, r: mpf) -> mpf:
    """
    theta > 0 with E_theta S = r, by a bracketing root search in ln(theta).
    """
    total = tilt.mean(0)
    squares = mpmath.fsum(x * x for x in tilt.eigenvalues)
    # mean(theta) >= total - 2 theta squares and mean(theta) < N / (2 theta)
    lo = mpmath.log((total - r) / (4 * squares))
    hi = mpmath.log(len(tilt.eigenvalues) / (2 * r))
    log_r = mpmath.log(r)

    def excess(x: mpf) -> mpf:
        return mpmath.log(tilt.mean(mpmath.exp(x))) - log_r

    try:
        x = mpmath.findroot(excess, (lo, hi), solver="anderson", maxsteps=DEFAULTS.ROOT_ITERATIONS)
    except (ValueError, ZeroDivisionError) as e:
        raise ConvergenceError(f"no saddlepoint for r = {mpmath.nstr(r)}", hi - lo) from e
    theta = mpmath.exp(x)
    LOGGER.debug("saddlepoint for r = %s at theta = %s", mpmath.nstr(r), mpmath.nstr(theta))
    return theta


def log_small_ball_saddlepoint(
    sp: Spectrum, eps: Eps, dps: int = DEFAULTS.SADDLEPOINT_DPS
) -> SmallBallEstimate:
    """
    Second order Lugannani-Rice approximation of ln P{S <= eps^2} at the tilt matching eps^2.
    """
    kept, dropped = _split(sp)
    with mpmath.workdps(dps):
        tilt = _Tilt([mpf(x) for x in kept])
        r = parse_eps(eps) ** 2
        total = tilt.mean(0)
        if not kept or r > total:
            raise SmallBallError(f"eps = {eps} is in the right tail, eps^2 exceeds E S = {total}")
        theta = mpf(0) if r == total else _solve_tilt(tilt, r)
        second, third, fourth = tilt.cumulants(theta)
        skew = third / second**1.5
        kurtosis = fourth / second**2
        w2 = -2 * (tilt.log_laplace(theta) + theta * r)
        if theta == 0 or w2 <= 0:
            p = mpf(1) / 2 + skew / (6 * mpmath.sqrt(2 * mpmath.pi))
        else:
            w = mpmath.sqrt(w2)
            u = theta * mpmath.sqrt(second)
            correction = (
                (kurtosis / 8 - 5 * skew**2 / 24) / u + skew / (2 * u**2) - 1 / u**3 + 1 / w**3
            )
            p = mpmath.ncdf(-w) + mpmath.npdf(w) * (1 / u - 1 / w + correction)
        if not p > 0:
            raise SmallBallError(f"saddlepoint approximation broke down at eps = {eps}")
        return SmallBallEstimate(
            eps=eps,
            log_prob=float(mpmath.log(p)),
            method=METHOD.SADDLEPOINT,
            truncation_bound=float(theta * dropped),
        )


def asymptotic_integral(C: float, r: Eps, dps: int = DEFAULTS.SADDLEPOINT_DPS) -> float:
    """
    -(C / 4) ln^2(u) where u > e solves C ln(u) / (2 u) = r, the value of
    -(1/2) int_{1/u}^1 C ln(1/z) dz / z.
    """
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    with mpmath.workdps(dps):
        r = mpf(r.strip()) if isinstance(r, str) else to_mpf(r)
        if not r > 0:
            raise ValueError(f"r must be positive, got {r}")
        # x = ln u solves x - ln x = ln(C / (2 r)), whose root above 1 is -W_{-1}(-exp(-target))
        target = mpmath.log(mpf(C) / (2 * r))
        if not target > 1:
            raise SmallBallError(f"r = {mpmath.nstr(r)} is too large, no solution with u > e")
        x = -mpmath.re(mpmath.lambertw(-mpmath.exp(-target), -1))
        return float(-mpf(C) * x * x / 4)


def asymptotic_params(spec: MeasureSpec, k: KernelSpec) -> AsymptoticParams:
    ell = operator_order(k)
    q = scaling_ratio(spec, ell)
    C = (spec.n - 1) / float(mpmath.log(to_mpf(q)))
    return AsymptoticParams(C=C, q=float(q), n=spec.n, ell=ell)


def asymptotic_log_small_ball(spec: MeasureSpec, k: KernelSpec, eps: Eps) -> SmallBallEstimate:
    params = asymptotic_params(spec, k)
    with mpmath.workdps(DEFAULTS.SADDLEPOINT_DPS):
        log_eps = mpmath.log(parse_eps(eps))
        return SmallBallEstimate(
            eps=eps, log_prob=float(-params.C * log_eps**2), method=METHOD.ASYMPTOTIC
        )


def fit_log_square_coefficient(
    estimates: Iterable[SmallBallEstimate],
) -> Tuple[float, float, float]:
    """least squares (a, b, c) of a ln^2(1/eps) + b ln(1/eps) + c through the estimates"""
    points = [(float(-mpmath.log(parse_eps(e.eps))), e.log_prob) for e in estimates]
    if len(points) < 3:
        raise FitError(f"need 3 estimates for a quadratic fit, got {len(points)}")
    x, y = np.array(points).T
    if len(set(x)) < 3:
        raise FitError("need 3 distinct eps for a quadratic fit")
    a, b, c = np.polyfit(x, y, 2)
    return float(a), float(b), float(c)


def write_estimates(rows: Iterable[SmallBallEstimate], path: Union[str, Path]):
    artifacts.write_csv(path, structs.SMALLBALL, (row.row() for row in rows))


def read_estimates(path: Union[str, Path]) -> List[SmallBallEstimate]:
    def optional(text: str, kind):
        return kind(text) if text else None

    return [
        SmallBallEstimate(
            eps=row["eps"],
            log_prob=float(row["log_prob"]),
            method=row["method"],
            stderr=optional(row["stderr"], float),
            n_samples=optional(row["n_samples"], int),
            seed=optional(row["seed"], int),
        )
        for row in artifacts.read_csv(path, structs.SMALLBALL)
    ]
