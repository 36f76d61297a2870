"""
Closed-form covariances of the Gaussian process catalog.

Base formulas are written against a numeric backend (`mpmath` or `numpy`) so that the extended
precision Gram matrix and the double precision quadrature and oracle paths share one definition.
"""
import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple, Union

import mpmath
import numpy as np

from degenspec.constants import PROCESS
from degenspec.errors import KernelError, SpecError
from degenspec.measure import Number, parse_number, render_number, to_mpf

BASE = (
    PROCESS.WIENER,
    PROCESS.BROWNIAN_BRIDGE,
    PROCESS.CENTERED_WIENER,
    PROCESS.CENTERED_BRIDGE,
    PROCESS.ELONGATED_BRIDGE,
    PROCESS.SLEPIAN,
    PROCESS.OU_STATIONARY,
    PROCESS.OU_ZERO,
    PROCESS.BOGOLYUBOV,
)


@dataclass(frozen=True)
class KernelSpec:
    process: str
    param: Optional[Number] = None
    integrations: int = 0
    endpoints: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.process not in PROCESS.ALL:
            raise KernelError(f"unknown process {self.process!r}")
        if isinstance(self.integrations, bool) or not isinstance(self.integrations, int):
            raise KernelError(f"integrations must be an integer, got {self.integrations!r}")
        if self.integrations < 0:
            raise KernelError(f"integrations must be nonnegative, got {self.integrations}")
        if any(b not in (0, 1) for b in self.endpoints):
            raise KernelError(f"endpoints must be 0 or 1, got {list(self.endpoints)}")
        if self.process in PROCESS.SELF_INTEGRATED:
            if self.endpoints:
                raise KernelError(f"{self.process} takes no endpoints")
        elif len(self.endpoints) != self.integrations:
            raise KernelError(
                f"expected {self.integrations} endpoints, got {len(self.endpoints)}"
            )
        if self.process in (PROCESS.CENTERED_INTEGRATED_WIENER, PROCESS.CENTERED_INTEGRATED_BRIDGE):
            if not 1 <= self.integrations <= 2:
                raise KernelError(f"{self.process} supports 1 or 2 integrations")
        self._check_param()

    def _check_param(self):
        param = self.param
        if self.process not in PROCESS.PARAMETRIZED:
            if param is not None:
                raise KernelError(f"{self.process} takes no parameter")
            return
        if param is None:
            raise KernelError(f"{self.process} requires a parameter")
        if self.process in (PROCESS.OU_STATIONARY, PROCESS.BOGOLYUBOV) and not param > 0:
            raise KernelError(f"{self.process} needs alpha > 0, got {param}")
        if self.process == PROCESS.OU_ZERO and param == 0:
            raise KernelError("ou_zero needs alpha != 0")
        if self.process == PROCESS.ELONGATED_BRIDGE and not param < 1:
            raise KernelError(f"elongated_bridge needs u < 1, got {param}")
        if self.process == PROCESS.SLEPIAN and not param >= 1:
            raise KernelError(f"slepian needs c >= 1, got {param}")

    @property
    def base(self) -> str:
        """process whose paths get integrated"""
        if self.process == PROCESS.CENTERED_INTEGRATED_WIENER:
            return PROCESS.CENTERED_WIENER
        if self.process == PROCESS.CENTERED_INTEGRATED_BRIDGE:
            return PROCESS.CENTERED_BRIDGE
        return self.process

    @property
    def closed_form(self) -> bool:
        if self.process in BASE:
            return self.integrations == 0 or (
                self.process == PROCESS.WIENER and not any(self.endpoints)
            )
        return self.process in (PROCESS.BRIDGED_INTEGRATED_WIENER, PROCESS.MATERN)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "process": self.process,
            "param": None if self.param is None else render_number(self.param),
            "integrations": self.integrations,
            "endpoints": list(self.endpoints),
        }


def operator_order(k: KernelSpec) -> int:
    return 1 + k.integrations


def digest(k: KernelSpec) -> str:
    text = json.dumps(k.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def loads(text: str) -> KernelSpec:
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as e:
        raise SpecError(f"kernel spec is not valid JSON: {e}") from e
    if not isinstance(data, dict) or "process" not in data:
        raise SpecError("kernel spec must be a JSON object with a 'process' key")
    unknown = set(data) - {"process", "param", "integrations", "endpoints"}
    if unknown:
        raise SpecError(f"unknown kernel spec keys: {', '.join(sorted(unknown))}")
    param = data.get("param")
    return KernelSpec(
        process=data["process"],
        param=None if param is None else parse_number(param),
        integrations=data.get("integrations", 0),
        endpoints=tuple(data.get("endpoints", ())),
    )


def load_kernel(path: Union[str, Path]) -> KernelSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecError(f"cannot read kernel spec {path}: {e}") from e
    return loads(text)


def base_covariance(process: str, param: Any, s: Any, t: Any, exp: Callable = mpmath.exp):
    """
    G(s, t) of a base process; `s`, `t` and `param` are mpf scalars or numpy arrays, `exp` the
    matching exponential.
    """
    lo = (s + t - abs(s - t)) / 2
    # one in the backend precision
    one = s * 0 + 1
    if process == PROCESS.WIENER:
        return lo
    if process == PROCESS.BROWNIAN_BRIDGE:
        return lo - s * t
    if process == PROCESS.CENTERED_WIENER:
        return lo - s + s * s / 2 - t + t * t / 2 + one / 3
    if process == PROCESS.CENTERED_BRIDGE:
        return lo - s * t - (s - s * s) / 2 - (t - t * t) / 2 + one / 12
    if process == PROCESS.ELONGATED_BRIDGE:
        return lo - (2 * param - param * param) * s * t
    if process == PROCESS.SLEPIAN:
        return param - abs(s - t)
    if process == PROCESS.OU_STATIONARY:
        return exp(-param * abs(s - t)) / (2 * param)
    if process == PROCESS.OU_ZERO:
        return (exp(-param * abs(s - t)) - exp(-param * (s + t))) / (2 * param)
    if process == PROCESS.BOGOLYUBOV:
        tau = abs(s - t)
        return (exp(param * tau) + exp(param - param * tau)) / (2 * param * (exp(param) - 1))
    raise KernelError(f"{process} is not a base process")


def matern(order: int, s: Any, t: Any, exp: Callable = mpmath.exp):
    """Matern covariance of smoothness order + 1/2, unit length scale"""
    tau = abs(s - t)
    total = 0
    for k in range(order + 1):
        coefficient = math.factorial(order + k) // (math.factorial(k) * math.factorial(order - k))
        total = total + coefficient * (2 * tau) ** (order - k)
    return exp(-tau) * total / (2 ** (2 * order + 1) * math.factorial(order))


def wiener_cross(i: int, j: int, t: Any, u: Any):
    """
    Cov(W_i(t), W_j(u)) for the i- and j-fold integrals of W from 0, expanded around
    min(t, u) so every term is nonnegative.
    """
    low = min(t, u)
    if t <= u:
        p, q, gap = i, j, u - low
    else:
        p, q, gap = j, i, t - low
    total = 0
    for k in range(q + 1):
        total = total + math.comb(q, k) * gap ** (q - k) * low ** (p + k + 1) / (p + k + 1)
    return total / (math.factorial(i) * math.factorial(j))


@lru_cache(maxsize=16)
def _bridge_system(order: int, precision_bits: int) -> mpmath.matrix:
    size = order + 1
    one = mpmath.mpf(1)
    gram = mpmath.matrix(size, size)
    for i in range(size):
        for j in range(size):
            gram[i, j] = wiener_cross(i, j, one, one)
    return mpmath.inverse(gram)


def bridged_integrated_wiener(order: int, t: mpmath.mpf, u: mpmath.mpf) -> mpmath.mpf:
    """W_order conditioned on W_j(1) = 0 for j = 0..order"""
    inverse = _bridge_system(order, mpmath.mp.prec)
    one = mpmath.mpf(1)
    left = mpmath.matrix([wiener_cross(order, j, t, one) for j in range(order + 1)])
    right = mpmath.matrix([wiener_cross(order, j, u, one) for j in range(order + 1)])
    correction = (left.T * inverse * right)[0, 0]
    return wiener_cross(order, order, t, u) - correction


def closed_form(k: KernelSpec, s: mpmath.mpf, t: mpmath.mpf) -> mpmath.mpf:
    if k.process == PROCESS.MATERN:
        return matern(k.integrations, s, t)
    if k.process == PROCESS.BRIDGED_INTEGRATED_WIENER:
        return bridged_integrated_wiener(k.integrations, s, t)
    if k.integrations:
        return wiener_cross(k.integrations, k.integrations, s, t)
    param = None if k.param is None else to_mpf(k.param)
    return base_covariance(k.process, param, s, t)


def numpy_base(k: KernelSpec) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """vectorized covariance of the process `k` integrates"""
    param = None if k.param is None else float(k.param)
    if k.process == PROCESS.MATERN:
        return lambda s, t: matern(k.integrations, s, t, exp=np.exp)
    return lambda s, t: base_covariance(k.base, param, s, t, exp=np.exp)
