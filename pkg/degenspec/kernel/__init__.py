from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import mpmath
import numpy as np

from degenspec.constants import DEFAULTS, PROCESS
from degenspec.errors import KernelError
from degenspec.kernel import quadrature
from degenspec.kernel.catalog import (  # noqa:F401
    KernelSpec,
    closed_form,
    digest,
    load_kernel,
    loads,
    operator_order,
)
from degenspec.measure import Number, to_mpf


@dataclass(frozen=True)
class CovMatrix:
    grid: np.ndarray
    entries: np.ndarray
    stderr: Optional[np.ndarray] = None

    def rows(self):
        """(s, t, cov, stderr) per entry, row-major"""
        for i, s in enumerate(self.grid):
            for j, t in enumerate(self.grid):
                se = None if self.stderr is None else self.stderr[i, j]
                yield s, t, self.entries[i, j], se


def _check_argument(x: Number):
    if not 0 <= x <= 1:
        raise KernelError(f"argument outside [0, 1]: {x}")


def evaluation_tolerance(k: KernelSpec) -> float:
    """relative error bound of `evaluate` beyond the working precision"""
    return 0.0 if k.closed_form else DEFAULTS.QUADRATURE_TOLERANCE


def evaluate(
    k: KernelSpec, s: Number, t: Number, precision_bits: int = DEFAULTS.PRECISION_BITS
) -> mpmath.mpf:
    """
    G(s, t) for any catalog kernel at `precision_bits`; integrated kernels without a closed form
    are computed in double precision.
    """
    _check_argument(s)
    _check_argument(t)
    with mpmath.workprec(precision_bits):
        if k.closed_form:
            return +closed_form(k, to_mpf(s), to_mpf(t))
        return mpmath.mpf(quadrature.integrated_covariance(k, float(s), float(t)))


def covariance(k: KernelSpec, s: Number, t: Number) -> float:
    if k.integrations and k.process not in PROCESS.SELF_INTEGRATED:
        raise KernelError(f"{k.process} is integrated, use integrated_covariance")
    return float(evaluate(k, s, t, DEFAULTS.MIN_PRECISION_BITS))


def integrated_covariance(k: KernelSpec, t: Number, u: Number) -> float:
    if not k.integrations:
        raise KernelError(f"{k.process} is not integrated")
    return float(evaluate(k, t, u, DEFAULTS.MIN_PRECISION_BITS))


def max_variance(k: KernelSpec, points: Iterable[Number] = ()) -> float:
    """sup of G(t, t) over a fixed grid of [0, 1] and the given points"""
    grid = [*np.linspace(0.0, 1.0, DEFAULTS.MAX_VARIANCE_GRID), *points]
    return max(float(evaluate(k, x, x, DEFAULTS.MIN_PRECISION_BITS)) for x in grid)


def covariance_matrix(k: KernelSpec, grid: Sequence[float]) -> CovMatrix:
    points = np.asarray(grid, dtype=float)
    entries = np.empty((len(points), len(points)))
    for i, s in enumerate(points):
        for j in range(i, len(points)):
            entries[i, j] = entries[j, i] = float(
                evaluate(k, s, points[j], DEFAULTS.MIN_PRECISION_BITS)
            )
    return CovMatrix(points, entries)
