"""
Covariances of integrated and centered processes by nested Gauss-Legendre quadrature.

An s-times integrated (and possibly centered) process is a linear functional of its base,
X_s(t) = int_0^1 h(t, v) X(v) dv, with an integration kernel h that is polynomial in (t, v) on
either side of the diagonal. Its covariance is then int int h(t, v) h(u, w) G(v, w) dv dw.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as P

from degenspec.constants import DEFAULTS, PROCESS
from degenspec.errors import QuadratureError
from degenspec.kernel.catalog import KernelSpec, numpy_base

LOGGER = logging.getLogger(__name__)


def _pad(c: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    out = np.zeros(shape)
    out[: c.shape[0], : c.shape[1]] = c
    return out


def _add(*terms: np.ndarray) -> np.ndarray:
    shape = (max(c.shape[0] for c in terms), max(c.shape[1] for c in terms))
    return sum(_pad(c, shape) for c in terms)


def _diagonal(c: np.ndarray) -> np.ndarray:
    """coefficients of c(v, v) as a polynomial in v alone"""
    out = np.zeros((1, c.shape[0] + c.shape[1] - 1))
    for i in range(c.shape[0]):
        out[0, i : i + c.shape[1]] += c[i]
    return out


def _at_one(c: np.ndarray) -> np.ndarray:
    """coefficients of c(1, v)"""
    return c.sum(axis=0, keepdims=True)


@dataclass(frozen=True)
class IntegrationKernel:
    """
    h(t, v) = sum c[i, j] t^i v^j with `below` used where t < v and `above` where t > v.
    """

    below: np.ndarray
    above: np.ndarray

    @classmethod
    def first(cls, endpoint: int) -> "IntegrationKernel":
        """kernel of int_endpoint^t X(v) dv, up to the overall sign"""
        if endpoint:
            return cls(np.array([[-1.0]]), np.array([[0.0]]))
        return cls(np.array([[0.0]]), np.array([[1.0]]))

    def integrate(self, endpoint: int) -> "IntegrationKernel":
        low = P.polyint(self.below, axis=0)
        high = P.polyint(self.above, axis=0)
        low_diagonal = _diagonal(low)
        high_diagonal = _diagonal(high)
        if endpoint:
            high_one = _at_one(high)
            return IntegrationKernel(
                _add(low, -low_diagonal, -high_one, high_diagonal),
                _add(high, -high_one),
            )
        return IntegrationKernel(low, _add(low_diagonal, high, -high_diagonal))

    def center(self) -> "IntegrationKernel":
        """subtract the mean over t in [0, 1]"""
        low = P.polyint(self.below, axis=0)
        high = P.polyint(self.above, axis=0)
        mean = _add(_diagonal(low), _at_one(high), -_diagonal(high))
        return IntegrationKernel(_add(self.below, -mean), _add(self.above, -mean))

    def __call__(self, t: np.ndarray, v: np.ndarray) -> np.ndarray:
        t, v = np.broadcast_arrays(t, v)
        return np.where(
            t < v, P.polyval2d(t, v, self.below), P.polyval2d(t, v, self.above)
        )


def integration_kernel(k: KernelSpec) -> IntegrationKernel:
    if k.process in (PROCESS.CENTERED_INTEGRATED_WIENER, PROCESS.CENTERED_INTEGRATED_BRIDGE):
        h = IntegrationKernel.first(0).center()
        for _ in range(k.integrations - 1):
            h = h.integrate(0).center()
        return h
    if not k.integrations:
        raise ValueError(f"{k.process} has no integrations")
    h = IntegrationKernel.first(k.endpoints[0])
    for endpoint in k.endpoints[1:]:
        h = h.integrate(endpoint)
    return h


def _panels(breaks: np.ndarray, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on the panels between consecutive `breaks` (last axis).
    """
    x, w = legendre.leggauss(nodes)
    lo, hi = breaks[..., :-1, None], breaks[..., 1:, None]
    half = (hi - lo) / 2
    return half * x + (hi + lo) / 2, half * w


def nested_integral(
    h: IntegrationKernel,
    base: Callable[[np.ndarray, np.ndarray], np.ndarray],
    t: float,
    u: float,
    nodes: int,
) -> Tuple[float, float]:
    """
    int int h(t, v) h(u, w) G(v, w) dv dw with outer panels split at t and u and inner panels
    split at u and v. Returns the value and the integral of the absolute integrand.
    """
    v, wv = _panels(np.array(sorted({0.0, 1.0, t, u})), nodes)
    v, wv = v.ravel(), wv.ravel()
    inner_breaks = np.stack(
        [np.zeros_like(v), np.minimum(v, u), np.maximum(v, u), np.ones_like(v)], axis=-1
    )
    w, ww = _panels(inner_breaks, nodes)
    vv = v[:, None, None]
    integrand = h(u, w) * base(vv, w) * ww
    inner = integrand.sum(axis=(1, 2))
    inner_abs = np.abs(integrand).sum(axis=(1, 2))
    outer = h(t, v) * wv
    return float(outer @ inner), float(np.abs(outer) @ inner_abs)


@lru_cache(maxsize=DEFAULTS.COVARIANCE_CACHE)
def _covariance(k: KernelSpec, t: float, u: float, nodes: int, tolerance: float) -> float:
    h = integration_kernel(k)
    base = numpy_base(k)
    coarse, _ = nested_integral(h, base, t, u, nodes)
    fine, scale = nested_integral(h, base, t, u, 2 * nodes)
    achieved = abs(fine - coarse) / scale if scale else 0.0
    LOGGER.debug("quadrature %s at (%r, %r): %r, doubling estimate %.3e", k, t, u, fine, achieved)
    if achieved > tolerance:
        raise QuadratureError(f"quadrature of {k.process} at ({t}, {u})", fine, achieved)
    return fine


def integrated_covariance(
    k: KernelSpec,
    t: float,
    u: float,
    nodes: int = DEFAULTS.GAUSS_NODES,
    tolerance: float = DEFAULTS.QUADRATURE_TOLERANCE,
) -> float:
    # the covariance is symmetric, cache one orientation
    t, u = sorted((float(t), float(u)))
    return _covariance(k, t, u, nodes, tolerance)
