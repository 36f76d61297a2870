"""
Degenerate self-similar probability measures on [0, 1].

A measure is given by a partition 0 = alpha_1 < ... < alpha_{n+1} = 1, levels beta_k and a
single nonzero contraction d placed on the interval m, reflected when e = 1. Its primitive is the
fixed point of the similarity operator and is a step function whose jumps are the atoms.
"""
import bisect
import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import mpmath
from mpmath import mpf

from degenspec.constants import CRITERION, DEFAULTS
from degenspec.errors import SpecError

LOGGER = logging.getLogger(__name__)

Number = Union[Fraction, mpf]


def parse_number(value: Any) -> Number:
    """
    Accept ints, "p/q" or decimal strings (exact) and binary floats (extended precision).
    """
    if isinstance(value, bool):
        raise SpecError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise SpecError(f"not a rational number: {value!r}") from e
    if isinstance(value, (float, mpf)):
        return mpf(value)
    raise SpecError(f"not a number: {value!r}")


def to_mpf(value: Number) -> mpf:
    if isinstance(value, Fraction):
        return mpf(value.numerator) / value.denominator
    return mpf(value)


def render_number(value: Number) -> str:
    """
    Exact "p/q" text; binary values are written as the rational they equal.
    """
    if isinstance(value, Fraction):
        return str(value)
    man, exp = mpf(value).man_exp
    return str(Fraction(man) * Fraction(2) ** exp)


@dataclass(frozen=True)
class MeasureSpec:
    alpha: Tuple[Number, ...]
    beta: Tuple[Number, ...]
    d: Number
    m: int
    e: int

    def __post_init__(self):
        n = len(self.alpha) - 1
        if n < 2:
            raise SpecError(f"need at least 3 partition points, got {len(self.alpha)}")
        if self.alpha[0] != 0 or self.alpha[-1] != 1:
            raise SpecError("partition must start at 0 and end at 1")
        if any(b <= a for a, b in zip(self.alpha, self.alpha[1:])):
            raise SpecError("partition points must be strictly increasing")
        if len(self.beta) != n:
            raise SpecError(f"expected {n} beta values, got {len(self.beta)}")
        if not 1 <= self.m <= n:
            raise SpecError(f"m must lie in 1..{n}, got {self.m}")
        if self.e not in (0, 1):
            raise SpecError(f"e must be 0 or 1, got {self.e}")
        if abs(self.d) >= 1:
            raise SpecError(f"|d| must be below 1, got {self.d}")

    @classmethod
    def from_values(
        cls,
        alpha: Sequence[Any],
        beta: Sequence[Any],
        d: Any,
        m: int,
        e: int,
    ) -> "MeasureSpec":
        """
        Parse raw values; the spec stays in the rational field unless a binary float is given.
        """
        if isinstance(m, bool) or not isinstance(m, int):
            raise SpecError(f"m must be an integer, got {m!r}")
        if isinstance(e, bool) or not isinstance(e, int):
            raise SpecError(f"e must be an integer, got {e!r}")
        values = [parse_number(v) for v in (*alpha, *beta, d)]
        if not all(isinstance(v, Fraction) for v in values):
            values = [to_mpf(v) for v in values]
        n_alpha = len(alpha)
        return cls(
            alpha=tuple(values[:n_alpha]),
            beta=tuple(values[n_alpha:-1]),
            d=values[-1],
            m=m,
            e=e,
        )

    @property
    def n(self) -> int:
        return len(self.alpha) - 1

    @property
    def exact(self) -> bool:
        return isinstance(self.d, Fraction)

    @property
    def a(self) -> Tuple[Number, ...]:
        return tuple(b - a for a, b in zip(self.alpha, self.alpha[1:]))

    @property
    def rho(self) -> Number:
        """(-1)^e d, the mass ratio between consecutive scaling levels"""
        return -self.d if self.e else self.d

    @property
    def a_m(self) -> Number:
        return self.alpha[self.m] - self.alpha[self.m - 1]

    def contract(self, x: Number) -> Number:
        """S_m, the affine map of [0, 1] onto the m-th interval"""
        if self.e:
            return self.alpha[self.m] - self.a_m * x
        return self.alpha[self.m - 1] + self.a_m * x

    def expand(self, t: Number) -> Number:
        """inverse of S_m"""
        if self.e:
            return (self.alpha[self.m] - t) / self.a_m
        return (t - self.alpha[self.m - 1]) / self.a_m

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": [render_number(v) for v in self.alpha],
            "beta": [render_number(v) for v in self.beta],
            "d": render_number(self.d),
            "m": self.m,
            "e": self.e,
        }


@dataclass(frozen=True)
class Violation:
    criterion: int
    detail: str

    @property
    def name(self) -> str:
        return CRITERION.NAMES[self.criterion]

    def __str__(self):
        return f"criterion {self.criterion} ({self.name}): {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class PiecewiseConstant:
    """
    Step function on [0, 1], left-continuous at its breakpoints.
    """

    breakpoints: Tuple[Number, ...]
    values: Tuple[Number, ...]

    def __post_init__(self):
        if len(self.breakpoints) < 2 or self.breakpoints[0] != 0 or self.breakpoints[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(self.values) != len(self.breakpoints) - 1:
            raise ValueError("need exactly one value per interval")

    @classmethod
    def constant(cls, value: Number = Fraction(0)) -> "PiecewiseConstant":
        return cls((Fraction(0), Fraction(1)), (value,))

    def __call__(self, t: Number) -> Number:
        if not 0 <= t <= 1:
            raise ValueError(f"argument outside [0, 1]: {t}")
        i = bisect.bisect_left(self.breakpoints, t)
        return self.values[max(i, 1) - 1]

    def simplified(self) -> "PiecewiseConstant":
        """merge neighbouring intervals carrying equal values"""
        breakpoints = [self.breakpoints[0]]
        values: List[Number] = []
        for b, v in zip(self.breakpoints[1:], self.values):
            if values and values[-1] == v:
                breakpoints[-1] = b
            else:
                values.append(v)
                breakpoints.append(b)
        return PiecewiseConstant(tuple(breakpoints), tuple(values))

    def sup_distance(self, other: "PiecewiseConstant") -> Number:
        points = sorted(set(self.breakpoints) | set(other.breakpoints))
        return max(
            abs(self((a + b) / 2) - other((a + b) / 2)) for a, b in zip(points, points[1:])
        )

    def variation(self, lo: Number = 0, hi: Number = 1) -> Number:
        """total variation over the open interval ]lo, hi["""
        total: Number = Fraction(0)
        for b, left, right in zip(self.breakpoints[1:-1], self.values, self.values[1:]):
            if lo < b < hi:
                total += abs(right - left)
        return total


@dataclass(frozen=True)
class Atom:
    location: Number
    weight: Number
    level: int


@dataclass(frozen=True)
class AtomList:
    atoms: Tuple[Atom, ...]
    depth: int
    tail_mass: Number
    _prefix: Tuple[Number, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        prefix: List[Number] = []
        total: Number = Fraction(0)
        for atom in self.atoms:
            total = total + atom.weight
            prefix.append(total)
        object.__setattr__(self, "_prefix", tuple(prefix))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    @property
    def locations(self) -> List[Number]:
        return [atom.location for atom in self.atoms]

    @property
    def weights(self) -> List[Number]:
        return [atom.weight for atom in self.atoms]

    @property
    def total_mass(self) -> Number:
        return (self._prefix[-1] if self._prefix else 0) + self.tail_mass

    def cdf(self, t: Number) -> Number:
        """mass of the atoms strictly left of t"""
        if not 0 <= t <= 1:
            raise ValueError(f"argument outside [0, 1]: {t}")
        i = bisect.bisect_left(self.locations, t)
        return self._prefix[i - 1] if i else Fraction(0)


def _lt(x: Number, y: Number, tolerance: float) -> bool:
    if isinstance(x, Rational) and isinstance(y, Rational):
        return x < y
    return y - x > tolerance


def _eq(x: Number, y: Number, tolerance: float) -> bool:
    if isinstance(x, Rational) and isinstance(y, Rational):
        return x == y
    return abs(x - y) <= tolerance


def _interval_ends(spec: MeasureSpec, i: int) -> Tuple[Number, Number]:
    """limits of the first iterate S[0] at the left and right end of interval i (1-based)"""
    beta = spec.beta[i - 1]
    if i != spec.m:
        return beta, beta
    return beta + spec.d * spec.e, beta + spec.d * (1 - spec.e)


def jumps(spec: MeasureSpec) -> List[Number]:
    """jumps of the primitive at alpha_2, ..., alpha_n"""
    return [
        _interval_ends(spec, k)[0] - _interval_ends(spec, k - 1)[1] for k in range(2, spec.n + 1)
    ]


def _boundary(spec: MeasureSpec, tolerance: float) -> List[Violation]:
    n, m, d, e, beta = spec.n, spec.m, spec.d, spec.e, spec.beta
    violations: List[Violation] = []
    d_first = d if m == 1 else 0
    d_last = d if m == n else 0
    if not _eq(d_first * e + beta[0], 0, tolerance):
        violations.append(
            Violation(CRITERION.BOUNDARY, f"d_1*e_1 + beta_1 = {d_first * e + beta[0]}, expected 0")
        )
    if not _eq(d_last * (1 - e) + beta[-1], 1, tolerance):
        violations.append(
            Violation(
                CRITERION.BOUNDARY,
                f"d_n*(1-e_n) + beta_n = {d_last * (1 - e) + beta[-1]}, expected 1",
            )
        )
    return violations


def _positivity(spec: MeasureSpec, tolerance: float) -> List[Violation]:
    if _lt(0, spec.rho, tolerance) and _lt(spec.rho, 1, tolerance):
        return []
    return [Violation(CRITERION.POSITIVITY, f"(-1)^e*d = {spec.rho} is not inside ]0, 1[")]


def _monotonicity(spec: MeasureSpec, tolerance: float) -> List[Violation]:
    beta = spec.beta
    return [
        Violation(
            CRITERION.MONOTONICITY,
            f"beta_{k} = {beta[k - 1]} is not below beta_{k + 1} = {beta[k]}",
        )
        for k in range(1, spec.n)
        if not _lt(beta[k - 1], beta[k], tolerance)
    ]


def _singular_continuity(spec: MeasureSpec, tolerance: float) -> List[Violation]:
    n, m, beta = spec.n, spec.m, spec.beta
    violations: List[Violation] = []
    middle = spec.d * beta[-1] + beta[m - 1]
    if m > 1 and not _lt(beta[m - 2], middle, tolerance):
        violations.append(
            Violation(
                CRITERION.SINGULAR_CONTINUITY,
                f"beta_{m - 1} = {beta[m - 2]} is not below d*beta_n + beta_m = {middle}",
            )
        )
    if m < n and not _lt(middle, beta[m], tolerance):
        violations.append(
            Violation(
                CRITERION.SINGULAR_CONTINUITY,
                f"d*beta_n + beta_m = {middle} is not below beta_{m + 1} = {beta[m]}",
            )
        )
    return violations


def _nondegeneracy(spec: MeasureSpec, tolerance: float) -> List[Violation]:
    return [
        Violation(CRITERION.NONDEGENERACY, f"jump at alpha_{k} is {jump}, expected > 0")
        for k, jump in enumerate(jumps(spec), start=2)
        if not _lt(0, jump, tolerance)
    ]


Check = Callable[[MeasureSpec, float], List[Violation]]

# every check reads the spec only, so any order reports the same violations
CHECKS: Tuple[Check, ...] = (
    _boundary,
    _positivity,
    _monotonicity,
    _singular_continuity,
    _nondegeneracy,
)


def validate(
    spec: MeasureSpec,
    tolerance: float = DEFAULTS.VALIDATION_TOLERANCE,
    checks: Sequence[Check] = CHECKS,
) -> ValidationReport:
    """
    Check the four probability-measure criteria and nondegeneracy of every partition jump.
    Equalities are exact on rational specs and up to `tolerance` otherwise. Violations are
    reported in criterion order whatever the order of `checks`.
    """
    violations = [v for check in checks for v in check(spec, tolerance)]
    violations.sort(key=lambda v: v.criterion)
    return ValidationReport(tuple(violations))


def singular_point(spec: MeasureSpec) -> Number:
    """accumulation point of the atoms, the fixed point of S_m"""
    sign = -1 if spec.e else 1
    return spec.alpha[spec.m - 1 + spec.e] / (1 - sign * spec.a_m)


def apply_similarity(spec: MeasureSpec, f: PiecewiseConstant) -> PiecewiseConstant:
    breakpoints: List[Number] = [spec.alpha[0]]
    values: List[Number] = []
    for i in range(1, spec.n + 1):
        if i != spec.m:
            breakpoints.append(spec.alpha[i])
            values.append(spec.beta[i - 1])
            continue
        images = [spec.contract(b) for b in f.breakpoints]
        inner = [spec.d * v + spec.beta[i - 1] for v in f.values]
        if spec.e:
            images.reverse()
            inner.reverse()
        # endpoints of the image coincide with alpha_m and alpha_{m+1}
        breakpoints.extend(images[1:-1])
        breakpoints.append(spec.alpha[i])
        values.extend(inner)
    return PiecewiseConstant(tuple(breakpoints), tuple(values)).simplified()


def iterate(spec: MeasureSpec, j: int) -> PiecewiseConstant:
    """f_j = S^j[0]"""
    f = PiecewiseConstant.constant()
    for _ in range(j):
        f = apply_similarity(spec, f)
    return f


@lru_cache(maxsize=64)
def _atoms(spec: MeasureSpec, depth: int, precision_bits: int) -> AtomList:
    level0 = [(spec.alpha[k - 1], jump) for k, jump in zip(range(2, spec.n + 1), jumps(spec))]
    merged: Dict[Number, Atom] = {}
    positions = [location for location, _ in level0]
    scale: Number = Fraction(1) if spec.exact else mpf(1)
    for level in range(depth + 1):
        for position, (_, jump) in zip(positions, level0):
            weight = jump * scale
            existing = merged.get(position)
            if existing is None:
                merged[position] = Atom(position, weight, level)
            else:
                LOGGER.debug("merging coincident atoms at %s", position)
                merged[position] = Atom(position, existing.weight + weight, existing.level)
        positions = [spec.contract(p) for p in positions]
        scale = scale * spec.rho
    atoms = tuple(merged[location] for location in sorted(merged))
    return AtomList(atoms=atoms, depth=depth, tail_mass=scale)


def atoms(
    spec: MeasureSpec,
    depth: int = DEFAULTS.DEPTH,
    precision_bits: int = DEFAULTS.PRECISION_BITS,
) -> AtomList:
    """
    Enumerate the atoms of levels 0..depth. Rational specs are enumerated exactly, others at
    `precision_bits`.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    report = validate(spec)
    if not report.valid:
        raise SpecError("not a probability measure: " + "; ".join(map(str, report.violations)))
    if spec.exact:
        return _atoms(spec, depth, 0)
    with mpmath.workprec(precision_bits):
        return _atoms(spec, depth, precision_bits)


def cdf(spec: MeasureSpec, t: Number, depth: int = DEFAULTS.DEPTH) -> Number:
    if not 0 <= t <= 1:
        raise ValueError(f"argument outside [0, 1]: {t}")
    return atoms(spec, depth).cdf(t)


def primitive(spec: MeasureSpec, depth: int = DEFAULTS.DEPTH) -> PiecewiseConstant:
    """the truncated primitive cdf(., depth) as a step function"""
    atom_list = atoms(spec, depth)
    breakpoints = (Fraction(0), *atom_list.locations, Fraction(1))
    values = (Fraction(0), *atom_list._prefix)
    return PiecewiseConstant(breakpoints, values)


def compose(outer: MeasureSpec, inner: MeasureSpec) -> MeasureSpec:
    """
    Spec of the similarity operator S_outer o S_inner.
    """
    m = outer.m
    images = [outer.contract(p) for p in inner.alpha]
    levels = [outer.d * b + outer.beta[m - 1] for b in inner.beta]
    inner_m = inner.m
    if outer.e:
        images.reverse()
        levels.reverse()
        inner_m = inner.n - inner.m + 1
    alpha = (*outer.alpha[:m], *images[1:-1], *outer.alpha[m:])
    beta = (*outer.beta[: m - 1], *levels, *outer.beta[m:])
    return MeasureSpec(
        alpha=alpha,
        beta=beta,
        d=outer.d * inner.d,
        m=m - 1 + inner_m,
        e=outer.e ^ inner.e,
    )


def power(spec: MeasureSpec, times: int) -> MeasureSpec:
    """spec of S^times; its fixed point is the same primitive"""
    if times < 1:
        raise ValueError(f"power must be positive, got {times}")
    result = spec
    for _ in range(times - 1):
        result = compose(result, spec)
    return result


def digest(spec: MeasureSpec) -> str:
    text = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def loads(text: str) -> MeasureSpec:
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as e:
        raise SpecError(f"measure spec is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SpecError("measure spec must be a JSON object")
    missing = {"alpha", "beta", "d", "m", "e"} - set(data)
    if missing:
        raise SpecError(f"measure spec misses keys: {', '.join(sorted(missing))}")
    return MeasureSpec.from_values(data["alpha"], data["beta"], data["d"], data["m"], data["e"])


def load_measure(path: Union[str, Path]) -> MeasureSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecError(f"cannot read measure spec {path}: {e}") from e
    return loads(text)


def dump_measure(spec: MeasureSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2)


def variation(f: PiecewiseConstant, interval: Tuple[Number, Number] = (0, 1)) -> Number:
    """total variation of f over the open interval"""
    return f.variation(*interval)


def nested_interval(spec: MeasureSpec, level: int) -> Tuple[Number, Number]:
    """S_m^level(]0, 1[) as (left, right)"""
    lo: Number = Fraction(0)
    hi: Number = Fraction(1)
    for _ in range(level):
        lo, hi = sorted((spec.contract(lo), spec.contract(hi)))
    return lo, hi
