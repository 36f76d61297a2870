"""
Eigenvalues of the integral operator of a catalog kernel against a truncated degenerate measure.

For an atomic measure the operator is similar to the weighted Gram matrix
sqrt(w_i w_j) G(t_i, t_j), so its nonzero eigenvalues are found by a finite extended precision
eigensolve. The counting function N(lambda) = #{j: lambda_j > lambda} is then confronted with its
exponential-decay prediction (n - 1) ln(1/lambda) / ln q.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import mpmath
import numpy as np
from mpmath import mpf
from scipy import stats

from degenspec import artifacts, kernel, measure, structs
from degenspec.constants import DEFAULTS
from degenspec.errors import FitError, SpecError, TrustError
from degenspec.kernel import KernelSpec
from degenspec.linalg import Provenance, SymMatrix, jacobi
from degenspec.measure import AtomList, MeasureSpec, Number, to_mpf

LOGGER = logging.getLogger(__name__)

Window = Tuple[float, float]


@dataclass(frozen=True)
class Spectrum:
    """eigenvalues strictly descending and positive"""

    eigenvalues: Tuple[mpf, ...]
    precision_bits: int
    trust_threshold: mpf = mpf(0)
    provenance: Optional[Provenance] = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def source(self) -> Optional[Tuple[str, str, int]]:
        if self.provenance is None:
            return None
        return self.provenance.measure_digest, self.provenance.kernel_digest, self.provenance.depth


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    window: Window
    points_used: int

    def to_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "window": list(self.window),
            "points_used": self.points_used,
        }


def gram_matrix(
    atoms: AtomList,
    k: KernelSpec,
    precision_bits: int = DEFAULTS.PRECISION_BITS,
    measure_digest: str = "",
) -> SymMatrix:
    if not len(atoms):
        raise ValueError("no atoms to build a Gram matrix from")
    with mpmath.workprec(precision_bits):
        roots = [mpmath.sqrt(to_mpf(w)) for w in atoms.weights]
        locations = atoms.locations

        def entry(i: int, j: int) -> mpf:
            g = kernel.evaluate(k, locations[i], locations[j], precision_bits)
            return roots[i] * roots[j] * g

        provenance = Provenance(
            measure_digest=measure_digest,
            kernel_digest=kernel.digest(k),
            depth=atoms.depth,
            tail_mass=to_mpf(atoms.tail_mass),
            max_variance=kernel.max_variance(k, (float(x) for x in locations)),
            kernel_tolerance=kernel.evaluation_tolerance(k),
        )
        m = SymMatrix.from_function(len(atoms), entry, precision_bits, provenance)
    LOGGER.debug("gram matrix %dx%d for %s at %d bits", m.order, m.order, k, precision_bits)
    return m


def trust_threshold(m: SymMatrix) -> mpf:
    """
    Eigenvalues below this may be moved by the truncated measure tail or by kernel evaluation
    error: 4 tail_mass max_t G(t, t) + N tolerance max |entry|.
    """
    p = m.provenance
    if p is None:
        return mpf(0)
    with mpmath.workprec(m.precision_bits):
        tail = DEFAULTS.TRUST_SAFETY_FACTOR * p.tail_mass * mpf(p.max_variance)
        return tail + m.order * mpf(p.kernel_tolerance) * m.max_abs()


def eigenvalues(m: SymMatrix, sweeps: int = DEFAULTS.SWEEP_BUDGET) -> Spectrum:
    values = jacobi(m, sweeps=sweeps)
    descending = sorted((x for x in values if x > 0), reverse=True)
    distinct = tuple(x for i, x in enumerate(descending) if i == 0 or x != descending[i - 1])
    dropped = len(values) - len(distinct)
    if dropped:
        LOGGER.debug("dropped %d nonpositive or repeated eigenvalues", dropped)
    return Spectrum(distinct, m.precision_bits, trust_threshold(m), m.provenance)


def trusted(sp: Spectrum) -> Tuple[mpf, ...]:
    return tuple(x for x in sp.eigenvalues if x > sp.trust_threshold)


def counting_function(sp: Spectrum, lam: Union[Number, str]) -> int:
    with mpmath.workprec(sp.precision_bits):
        lam = mpf(lam) if isinstance(lam, str) else to_mpf(lam)
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        if lam < sp.trust_threshold:
            raise TrustError(
                f"lambda {mpmath.nstr(lam)} is below the trust threshold "
                f"{mpmath.nstr(sp.trust_threshold)}"
            )
        return sum(1 for x in sp.eigenvalues if x > lam)


def scaling_ratio(spec: MeasureSpec, ell: int) -> Number:
    """q = 1 / (rho a_m^(2 ell - 1))"""
    if ell < 1:
        raise ValueError(f"operator order must be at least 1, got {ell}")
    q = 1 / (spec.rho * spec.a_m ** (2 * ell - 1))
    assert q > 1, f"q = {q} for a spec that should be valid"
    return q


def theoretical_slope(spec: MeasureSpec, ell: int) -> Tuple[float, float]:
    """(n - 1) / ln q and q"""
    q = scaling_ratio(spec, ell)
    return (spec.n - 1) / float(mpmath.log(to_mpf(q))), float(q)


def default_window(sp: Spectrum) -> Window:
    if not sp.eigenvalues:
        raise FitError("empty spectrum")
    hi = sp.eigenvalues[0] * DEFAULTS.WINDOW_HEAD
    lo = max(sp.trust_threshold * DEFAULTS.WINDOW_TAIL, sp.eigenvalues[-1])
    return float(hi), float(lo)


def _window_points(sp: Spectrum, window: Window) -> Tuple[np.ndarray, np.ndarray]:
    """(ln(1/lambda_j), j) for the eigenvalues inside the window, j counted from 1"""
    hi, lo = window
    xs, ys = [], []
    for j, lam in enumerate(sp.eigenvalues, start=1):
        if lo <= lam <= hi:
            xs.append(float(-mpmath.log(lam)))
            ys.append(j)
    return np.array(xs), np.array(ys, dtype=float)


def fit_counting_slope(sp: Spectrum, window: Optional[Window] = None) -> SlopeFit:
    window = default_window(sp) if window is None else (float(window[0]), float(window[1]))
    hi, lo = window
    if not hi > lo > 0:
        raise FitError(f"window needs hi > lo > 0, got ({hi}, {lo})")
    if lo < sp.trust_threshold:
        raise TrustError(f"window bottom {lo} is below the trust threshold")
    x, y = _window_points(sp, window)
    if len(x) < DEFAULTS.MIN_FIT_POINTS:
        raise FitError(
            f"{len(x)} eigenvalues in window ({hi:.3e}, {lo:.3e}), "
            f"need {DEFAULTS.MIN_FIT_POINTS}"
        )
    if np.ptp(x) == 0:
        raise FitError("degenerate regression, all eigenvalues in the window are equal")
    result = stats.linregress(x, y)
    LOGGER.debug("slope fit on %d points: %r", len(x), result)
    return SlopeFit(
        float(result.slope), float(result.intercept), float(result.stderr), window, len(x)
    )


def compare_asymptotics(sp1: Spectrum, sp2: Spectrum, window: Optional[Window] = None) -> float:
    """ratio of the fitted slopes on a common window"""
    if window is None:
        hi1, lo1 = default_window(sp1)
        hi2, lo2 = default_window(sp2)
        window = (min(hi1, hi2), max(lo1, lo2))
    return fit_counting_slope(sp1, window).slope / fit_counting_slope(sp2, window).slope


def scaling_grid(coarse: Spectrum, fine: Spectrum, q: Number) -> List[mpf]:
    """
    Geometric midpoints of consecutive trusted eigenvalues of `fine`, restricted to where both
    N_fine(lambda) and N_coarse(q lambda) are trusted.
    """
    with mpmath.workprec(fine.precision_bits):
        q = to_mpf(q)
        floor = max(fine.trust_threshold, coarse.trust_threshold / q)
        values = [x for x in fine.eigenvalues if x > floor]
        return [
            mpmath.sqrt(a * b)
            for a, b in zip(values, values[1:])
            if q * mpmath.sqrt(a * b) > coarse.trust_threshold
        ]


def scaling_defects(
    coarse: Spectrum, fine: Spectrum, q: Number, n_minus_1: int, lambdas: Iterable[Number]
) -> List[Tuple[mpf, int]]:
    """
    (lambda, D) wherever D = N_fine(lambda) - N_coarse(q lambda) - (n - 1) is nonzero, `fine`
    being one level deeper than `coarse`. D always lies in [-(n - 1), 1].
    """
    defects = []
    with mpmath.workprec(fine.precision_bits):
        q = to_mpf(q)
        for lam in lambdas:
            lam = to_mpf(lam)
            defect = counting_function(fine, lam) - counting_function(coarse, q * lam) - n_minus_1
            if defect:
                defects.append((lam, defect))
    return defects


def residual_periodogram(sp: Spectrum, fit: SlopeFit) -> List[Tuple[float, float]]:
    """(frequency per index, power) of the fit residuals j - (slope ln(1/lambda_j) + intercept)"""
    x, y = _window_points(sp, fit.window)
    residuals = y - (fit.slope * x + fit.intercept)
    residuals -= residuals.mean()
    power = np.abs(np.fft.rfft(residuals)) ** 2 / len(residuals)
    return list(zip(np.fft.rfftfreq(len(residuals)).tolist(), power.tolist()))


def write_spectrum(sp: Spectrum, path: Union[str, Path], **extra):
    artifacts.write_csv(
        path,
        structs.EIGS,
        ((j, artifacts.decimal(lam, sp.precision_bits)) for j, lam in enumerate(sp.eigenvalues, 1)),
    )
    meta = {
        "precision_bits": sp.precision_bits,
        "trust_threshold": artifacts.decimal(sp.trust_threshold, sp.precision_bits),
    }
    p = sp.provenance
    if p is not None:
        meta.update(
            measure_digest=p.measure_digest,
            kernel_digest=p.kernel_digest,
            depth=p.depth,
            tail_mass=artifacts.decimal(p.tail_mass, sp.precision_bits),
            max_variance=p.max_variance,
            kernel_tolerance=p.kernel_tolerance,
        )
    meta.update(extra)
    artifacts.write_meta(path, meta)


def read_spectrum(path: Union[str, Path]) -> Spectrum:
    meta = artifacts.read_meta(path)
    if meta is None:
        raise SpecError(f"{path} or its metadata is missing")
    bits = meta["precision_bits"]
    rows = artifacts.read_csv(path, structs.EIGS)
    values = tuple(artifacts.parse_decimal(row["lambda"], bits) for row in rows)
    provenance = None
    if "measure_digest" in meta:
        provenance = Provenance(
            measure_digest=meta["measure_digest"],
            kernel_digest=meta["kernel_digest"],
            depth=meta["depth"],
            tail_mass=artifacts.parse_decimal(meta["tail_mass"], bits),
            max_variance=meta["max_variance"],
            kernel_tolerance=meta["kernel_tolerance"],
        )
    threshold = artifacts.parse_decimal(meta["trust_threshold"], bits)
    return Spectrum(values, bits, threshold, provenance)


def spectrum(
    spec: MeasureSpec,
    k: KernelSpec,
    depth: int = DEFAULTS.DEPTH,
    precision_bits: int = DEFAULTS.PRECISION_BITS,
) -> Spectrum:
    """atoms, Gram matrix and eigensolve in one go"""
    atoms = measure.atoms(spec, depth, precision_bits)
    return eigenvalues(gram_matrix(atoms, k, precision_bits, measure.digest(spec)))

