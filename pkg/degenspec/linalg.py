"""
Symmetric matrices and their eigenvalues in extended precision.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from mpmath import mpf

from degenspec.constants import DEFAULTS
from degenspec.errors import ConvergenceError

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Provenance:
    """where a Gram matrix came from, and what bounds its distance to the untruncated operator"""

    measure_digest: str
    kernel_digest: str
    depth: int
    tail_mass: mpf
    max_variance: float
    kernel_tolerance: float = 0.0


@dataclass(frozen=True)
class SymMatrix:
    """
    Symmetric matrix keeping only its upper triangle: `upper[i][j - i]` is entry (i, j), j >= i.
    """

    upper: Tuple[Tuple[mpf, ...], ...]
    precision_bits: int
    provenance: Optional[Provenance] = None

    @classmethod
    def from_function(
        cls,
        order: int,
        entry: Callable[[int, int], mpf],
        precision_bits: int,
        provenance: Optional[Provenance] = None,
    ) -> "SymMatrix":
        with mpmath.workprec(precision_bits):
            upper = tuple(tuple(+entry(i, j) for j in range(i, order)) for i in range(order))
        return cls(upper, precision_bits, provenance)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], precision_bits: int) -> "SymMatrix":
        """only the upper triangle of `rows` is read"""
        with mpmath.workprec(precision_bits):
            return cls.from_function(len(rows), lambda i, j: mpf(rows[i][j]), precision_bits)

    @property
    def order(self) -> int:
        return len(self.upper)

    def __getitem__(self, index: Tuple[int, int]) -> mpf:
        i, j = index
        if i > j:
            i, j = j, i
        return self.upper[i][j - i]

    def rows(self) -> List[List[mpf]]:
        return [[self[i, j] for j in range(self.order)] for i in range(self.order)]

    def max_abs(self) -> mpf:
        return max((abs(x) for row in self.upper for x in row), default=mpf(0))

    def frobenius(self) -> mpf:
        with mpmath.workprec(self.precision_bits):
            total = mpf(0)
            for row in self.upper:
                total += row[0] ** 2 + 2 * mpmath.fsum(x * x for x in row[1:])
            return mpmath.sqrt(total)

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.rows()])


def _off_diagonal(a: List[List[mpf]]) -> mpf:
    n = len(a)
    return mpmath.sqrt(2 * mpmath.fsum(a[p][q] ** 2 for p in range(n) for q in range(p + 1, n)))


def _rotate(a: List[List[mpf]], p: int, q: int):
    """zero a[p][q] with one Jacobi rotation, updating both triangles"""
    apq = a[p][q]
    theta = (a[q][q] - a[p][p]) / (2 * apq)
    t = 1 / (abs(theta) + mpmath.sqrt(theta * theta + 1))
    if theta < 0:
        t = -t
    c = 1 / mpmath.sqrt(t * t + 1)
    s = t * c
    tau = s / (1 + c)
    a[p][p] -= t * apq
    a[q][q] += t * apq
    a[p][q] = a[q][p] = mpf(0)
    for r in range(len(a)):
        if r == p or r == q:
            continue
        arp, arq = a[r][p], a[r][q]
        a[r][p] = a[p][r] = arp - s * (arq + tau * arp)
        a[r][q] = a[q][r] = arq + s * (arp - tau * arq)


def jacobi(
    m: SymMatrix,
    sweeps: int = DEFAULTS.SWEEP_BUDGET,
    slack_bits: int = DEFAULTS.CONVERGENCE_SLACK_BITS,
) -> List[mpf]:
    """
    Eigenvalues of `m` by cyclic Jacobi rotations at the matrix precision, in diagonal order.
    Sweeps stop once the off-diagonal Frobenius mass drops below 2^(slack - precision) * |m|_F.
    """
    with mpmath.workprec(m.precision_bits):
        a = m.rows()
        n = m.order
        threshold = mpmath.ldexp(m.frobenius(), slack_bits - m.precision_bits)
        # entries this small cannot keep the off-diagonal mass above the threshold
        negligible = threshold / max(n, 1)
        off = _off_diagonal(a)
        for sweep in range(sweeps):
            LOGGER.debug("jacobi sweep %d on %dx%d: off-diagonal %s", sweep, n, n, mpmath.nstr(off))
            if off <= threshold:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if abs(a[p][q]) > negligible:
                        _rotate(a, p, q)
            off = _off_diagonal(a)
        else:
            if off > threshold:
                raise ConvergenceError(f"jacobi did not converge in {sweeps} sweeps", off)
        return [a[i][i] for i in range(n)]
