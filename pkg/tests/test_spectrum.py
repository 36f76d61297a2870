import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mpf

from conftest import DEPTH, FIGURE, FOUR_INTERVAL, PRECISION_BITS, WIENER
from degenspec import artifacts, kernel, measure, spectrum
from degenspec.constants import PROCESS
from degenspec.errors import FitError, SpecError, TrustError
from degenspec.kernel import KernelSpec
from degenspec.measure import Atom, AtomList
from degenspec.spectrum import Spectrum

WIENER_KERNEL = KernelSpec(PROCESS.WIENER)


def atom_list(*pairs):
    return AtomList(
        atoms=tuple(Atom(Fraction(t), Fraction(w), 0) for t, w in pairs),
        depth=0,
        tail_mass=Fraction(0),
    )


def geometric(ratio, count, bits=128):
    with mpmath.workprec(bits):
        return Spectrum(tuple(mpf(ratio) ** -j for j in range(1, count + 1)), bits)


def test_gram_single_atom():
    m = spectrum.gram_matrix(atom_list(("1/2", 1)), WIENER_KERNEL, 128)
    assert m.order == 1
    assert float(m[0, 0]) == pytest.approx(0.5, rel=1e-30)
    assert m.provenance.tail_mass == 0
    assert m.provenance.max_variance == 1


def test_gram_two_atoms():
    m = spectrum.gram_matrix(atom_list(("3/10", "1/2"), ("4/5", "1/2")), WIENER_KERNEL, 384)
    assert m.to_numpy() == pytest.approx(np.array([[0.15, 0.15], [0.15, 0.40]]), rel=1e-15)
    assert m.rows() == [list(row) for row in zip(*m.rows())]
    sp = spectrum.eigenvalues(m)
    root = math.sqrt(0.1525)
    assert [float(x) for x in sp.eigenvalues] == pytest.approx(
        [(0.55 + root) / 2, (0.55 - root) / 2], rel=1e-14
    )
    assert sp.trust_threshold == 0


def test_gram_empty():
    with pytest.raises(ValueError):
        spectrum.gram_matrix(AtomList((), 0, Fraction(1)), WIENER_KERNEL)


def test_counting_function():
    with mpmath.workprec(64):
        sp = Spectrum((mpf("0.5"), mpf("0.1"), mpf("0.02")), 64, mpf("0.001"))
    assert spectrum.counting_function(sp, "0.05") == 2
    assert spectrum.counting_function(sp, 0.7) == 0
    assert spectrum.counting_function(sp, "0.1") == 1
    assert spectrum.counting_function(sp, Fraction(1, 100)) == 3
    with pytest.raises(TrustError):
        spectrum.counting_function(sp, "0.0001")
    with pytest.raises(ValueError):
        spectrum.counting_function(sp, 0)


def test_theoretical_slope():
    spec = measure.load_measure(FIGURE)
    slope, q = spectrum.theoretical_slope(spec, 1)
    assert q == 6
    assert slope == pytest.approx(2 / math.log(6))
    assert slope == pytest.approx(1.11622, abs=1e-5)
    slope, q = spectrum.theoretical_slope(spec, 2)
    assert q == 24
    assert slope == pytest.approx(2 / math.log(24))
    assert slope == pytest.approx(0.62932, abs=1e-5)
    slope, q = spectrum.theoretical_slope(measure.load_measure(FOUR_INTERVAL), 1)
    assert q == pytest.approx(40 / 3)
    assert slope == pytest.approx(3 / math.log(40 / 3))
    with pytest.raises(ValueError):
        spectrum.scaling_ratio(spec, 0)


def test_fit_geometric_sequences():
    # lambda_j = 6^(-j/2) counts exactly 2 ln(1/lambda) / ln 6 eigenvalues
    fit = spectrum.fit_counting_slope(geometric(math.sqrt(6), 40))
    assert fit.slope == pytest.approx(2 / math.log(6), rel=1e-10)
    assert fit.intercept == pytest.approx(0, abs=1e-8)
    assert fit.points_used >= 20
    fit = spectrum.fit_counting_slope(geometric(24, 20))
    assert fit.slope == pytest.approx(1 / math.log(24), rel=1e-10)
    assert fit.to_dict()["points_used"] == fit.points_used


def test_fit_errors():
    with pytest.raises(FitError):
        spectrum.fit_counting_slope(Spectrum((mpf("0.5"),) * 6, 64), (1, 0.1))
    with pytest.raises(FitError):
        spectrum.fit_counting_slope(geometric(2, 4), (1, 0.01))
    with pytest.raises(FitError):
        spectrum.fit_counting_slope(geometric(2, 20), (0.01, 0.1))
    with pytest.raises(FitError):
        spectrum.default_window(Spectrum((), 64))
    trusting = Spectrum(geometric(2, 30).eigenvalues, 128, mpf("1e-5"))
    with pytest.raises(TrustError):
        spectrum.fit_counting_slope(trusting, (0.1, 1e-7))


def test_compare_identical():
    sp = geometric(3, 30)
    assert spectrum.compare_asymptotics(sp, sp) == pytest.approx(1)


def test_default_window(wiener_spectrum):
    hi, lo = spectrum.default_window(wiener_spectrum)
    assert hi == pytest.approx(float(wiener_spectrum.eigenvalues[0]) * 1e-3)
    assert lo == pytest.approx(float(wiener_spectrum.trust_threshold) * 1e3)


def test_spectrum_shape(wiener_spectrum):
    values = wiener_spectrum.eigenvalues
    assert len(values) == 2 * (DEPTH + 1)
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(x > 0 for x in spectrum.trusted(wiener_spectrum))
    spec = measure.load_measure(FIGURE)
    assert wiener_spectrum.source == (
        measure.digest(spec),
        kernel.digest(kernel.load_kernel(WIENER)),
        DEPTH,
    )


def test_wiener_slope(wiener_spectrum):
    fit = spectrum.fit_counting_slope(wiener_spectrum)
    assert fit.points_used >= 20
    assert fit.slope == pytest.approx(2 / math.log(6), rel=0.05)


def test_integrated_wiener_slope(integrated_wiener_spectrum):
    fit = spectrum.fit_counting_slope(integrated_wiener_spectrum)
    assert fit.slope == pytest.approx(2 / math.log(24), rel=0.05)


def test_precision_doubling():
    spec = measure.load_measure(FIGURE)
    low = spectrum.spectrum(spec, WIENER_KERNEL, depth=12, precision_bits=128)
    high = spectrum.spectrum(spec, WIENER_KERNEL, depth=12, precision_bits=256)
    kept = spectrum.trusted(low)
    assert len(kept) >= 5
    with mpmath.workprec(256):
        for a, b in zip(kept, high.eigenvalues):
            assert abs(a - b) / b < mpmath.ldexp(1, -64)


def test_truncation_stability(wiener_spectrum, wiener_spectrum_deeper):
    p = wiener_spectrum.provenance
    bound = 4 * p.tail_mass * p.max_variance
    kept = spectrum.trusted(wiener_spectrum)
    assert len(kept) > 50
    with mpmath.workprec(PRECISION_BITS):
        for a, b in zip(kept, wiener_spectrum_deeper.eigenvalues):
            assert abs(b - a) <= bound


def test_exponential_decay(wiener_spectrum):
    # ln lambda_j falls by ln q / (n - 1) per index
    j = np.arange(10, 51)
    logs = np.array([float(mpmath.log(wiener_spectrum.eigenvalues[i - 1])) for i in j])
    slope = np.polyfit(j, logs, 1)[0]
    assert slope == pytest.approx(-math.log(6) / 2, rel=0.05)


def test_scaling_relation(wiener_spectrum, wiener_spectrum_deeper):
    lambdas = spectrum.scaling_grid(wiener_spectrum, wiener_spectrum_deeper, 6)
    assert len(lambdas) > 10
    defects = spectrum.scaling_defects(wiener_spectrum, wiener_spectrum_deeper, 6, 2, lambdas)
    # the relation holds away from a few near-coincident eigenvalues, where one count lags
    assert len(defects) <= 0.05 * len(lambdas)
    assert all(defect == -1 for _, defect in defects)


def test_kernel_invariance(wiener_spectrum, ou_zero_spectrum, bridge_spectrum, bogolyubov_spectrum):
    assert 0.97 <= spectrum.compare_asymptotics(bridge_spectrum, bogolyubov_spectrum) <= 1.03
    assert 0.97 <= spectrum.compare_asymptotics(wiener_spectrum, ou_zero_spectrum) <= 1.03


def test_residual_periodogram(wiener_spectrum):
    fit = spectrum.fit_counting_slope(wiener_spectrum)
    periodogram = spectrum.residual_periodogram(wiener_spectrum, fit)
    assert len(periodogram) == fit.points_used // 2 + 1
    assert periodogram[0][0] == 0
    assert periodogram[-1][0] <= 0.5
    assert periodogram[0][1] == pytest.approx(0, abs=1e-12)
    assert all(power >= 0 for _, power in periodogram)


def test_write_read_spectrum(tmp_path):
    spec = measure.load_measure(FIGURE)
    sp = spectrum.spectrum(spec, WIENER_KERNEL, depth=3, precision_bits=128)
    path = tmp_path / "eigs.csv"
    spectrum.write_spectrum(sp, path, inputs="abc")
    assert path.read_text().splitlines()[0] == "index,lambda"
    assert artifacts.read_meta(path)["inputs"] == "abc"
    loaded = spectrum.read_spectrum(path)
    assert loaded.eigenvalues == sp.eigenvalues
    assert loaded.trust_threshold == sp.trust_threshold
    assert loaded.provenance == sp.provenance
    assert loaded.precision_bits == 128
    artifacts.meta_path(path).unlink()
    with pytest.raises(SpecError):
        spectrum.read_spectrum(path)
