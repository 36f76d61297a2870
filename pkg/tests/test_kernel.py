import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from conftest import BOGOLYUBOV, INTEGRATED_WIENER, OU_ZERO, WIENER
from degenspec import kernel
from degenspec.constants import DEFAULTS, PROCESS
from degenspec.errors import KernelError, QuadratureError, SpecError
from degenspec.kernel import KernelSpec, quadrature

CATALOG = [
    KernelSpec(PROCESS.WIENER),
    KernelSpec(PROCESS.BROWNIAN_BRIDGE),
    KernelSpec(PROCESS.CENTERED_WIENER),
    KernelSpec(PROCESS.CENTERED_BRIDGE),
    KernelSpec(PROCESS.ELONGATED_BRIDGE, Fraction(1, 2)),
    KernelSpec(PROCESS.SLEPIAN, Fraction(3, 2)),
    KernelSpec(PROCESS.OU_STATIONARY, Fraction(2)),
    KernelSpec(PROCESS.OU_ZERO, Fraction(-1)),
    KernelSpec(PROCESS.BOGOLYUBOV, Fraction(1)),
    KernelSpec(PROCESS.BRIDGED_INTEGRATED_WIENER, integrations=1),
    KernelSpec(PROCESS.MATERN, integrations=1),
    KernelSpec(PROCESS.CENTERED_INTEGRATED_WIENER, integrations=1),
    KernelSpec(PROCESS.CENTERED_INTEGRATED_BRIDGE, integrations=2),
    KernelSpec(PROCESS.WIENER, integrations=2, endpoints=(0, 0)),
    KernelSpec(PROCESS.WIENER, integrations=1, endpoints=(1,)),
    KernelSpec(PROCESS.OU_ZERO, Fraction(1), integrations=1, endpoints=(1,)),
]


def test_base_examples():
    ou = KernelSpec(PROCESS.OU_STATIONARY, Fraction(1))
    assert kernel.covariance(ou, 0.4, 0.4) == pytest.approx(0.5, rel=1e-15)
    assert kernel.covariance(KernelSpec(PROCESS.WIENER), 0.3, 0.7) == pytest.approx(0.3)
    bogolyubov = kernel.load_kernel(BOGOLYUBOV)
    expected = (1 + math.e) / (2 * (math.e - 1))
    assert kernel.covariance(bogolyubov, 0.25, 0.25) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(1.08198, abs=1e-5)
    slepian = KernelSpec(PROCESS.SLEPIAN, Fraction(1))
    assert kernel.covariance(slepian, 0.2, 0.5) == pytest.approx(0.7)


def test_centered_means_vanish():
    for k in (
        KernelSpec(PROCESS.CENTERED_WIENER),
        KernelSpec(PROCESS.CENTERED_BRIDGE),
        KernelSpec(PROCESS.CENTERED_INTEGRATED_WIENER, integrations=1),
        KernelSpec(PROCESS.CENTERED_INTEGRATED_WIENER, integrations=2),
    ):
        for t in (0.0, 0.3, 1.0):
            points = [t] if 0 < t < 1 else None
            mean, _ = quad(lambda s: float(kernel.evaluate(k, s, t, 64)), 0, 1, points=points)
            assert abs(mean) < 1e-9


def test_integrated_examples():
    k = kernel.load_kernel(INTEGRATED_WIENER)
    assert kernel.integrated_covariance(k, 1, 1) == pytest.approx(1 / 3, rel=1e-15)
    assert kernel.integrated_covariance(k, 0.5, 1) == pytest.approx(5 / 48, rel=1e-15)
    assert kernel.integrated_covariance(k, 0, 0.7) == 0
    ou = KernelSpec(PROCESS.OU_STATIONARY, Fraction(1), integrations=1, endpoints=(1,))
    assert abs(kernel.integrated_covariance(ou, 1, 0.4)) < 1e-14
    assert kernel.integrated_covariance(ou, 0.4, 0.4) > 0
    with pytest.raises(KernelError):
        kernel.integrated_covariance(KernelSpec(PROCESS.WIENER), 0.5, 0.5)
    with pytest.raises(KernelError):
        kernel.covariance(k, 0.5, 0.5)


def test_quadrature_consistency():
    rng = random.Random(3)
    for integrations in (1, 2):
        k = KernelSpec(PROCESS.WIENER, integrations=integrations, endpoints=(0,) * integrations)
        for _ in range(10):
            t, u = rng.random(), rng.random()
            exact = kernel.integrated_covariance(k, t, u)
            approximate = quadrature.integrated_covariance(k, t, u)
            assert approximate == pytest.approx(exact, rel=1e-10)


def test_quadrature_cache_bounded():
    info = quadrature._covariance.cache_info()
    assert info.maxsize == DEFAULTS.COVARIANCE_CACHE
    k = KernelSpec(PROCESS.WIENER, integrations=1, endpoints=(1,))
    quadrature.integrated_covariance(k, 0.25, 0.75)
    quadrature.integrated_covariance(k, 0.75, 0.25)
    assert quadrature._covariance.cache_info().currsize <= DEFAULTS.COVARIANCE_CACHE
    assert quadrature._covariance.cache_info().hits > info.hits


def test_integration_kernel_matches_recurrence():
    # int_0^t X(v) dv
    h = quadrature.integration_kernel(KernelSpec(PROCESS.WIENER, integrations=1, endpoints=(0,)))
    assert h(0.6, np.array([0.2, 0.8])).tolist() == [1.0, 0.0]
    h = quadrature.integration_kernel(KernelSpec(PROCESS.WIENER, integrations=2, endpoints=(0, 1)))
    # int_1^t 1{v < s} ds for v < t and for v > t
    assert h(0.6, np.array([0.2, 0.8])) == pytest.approx([-0.4, -0.2])


def test_quadrature_error():
    k = KernelSpec(PROCESS.OU_STATIONARY, Fraction(3), integrations=1, endpoints=(0,))
    with pytest.raises(QuadratureError) as e:
        quadrature.integrated_covariance(k, 0.3, 0.8, nodes=2, tolerance=1e-15)
    assert e.value.achieved > 1e-15
    assert e.value.estimate > 0


def test_operator_order():
    assert kernel.operator_order(KernelSpec(PROCESS.WIENER)) == 1
    bridge = KernelSpec(PROCESS.BROWNIAN_BRIDGE, integrations=2, endpoints=(0, 1))
    assert kernel.operator_order(bridge) == 3
    assert kernel.operator_order(KernelSpec(PROCESS.MATERN, integrations=1)) == 2


@pytest.mark.parametrize("k", CATALOG, ids=lambda k: f"{k.process}-{k.integrations}")
def test_symmetry(k):
    rng = random.Random(11)
    for _ in range(5):
        s, t = rng.random(), rng.random()
        assert float(kernel.evaluate(k, s, t, 64)) == pytest.approx(
            float(kernel.evaluate(k, t, s, 64)), rel=1e-12, abs=1e-15
        )


@pytest.mark.parametrize("k", CATALOG, ids=lambda k: f"{k.process}-{k.integrations}")
def test_positive_semidefinite(k):
    rng = np.random.default_rng(5)
    for size in (3, 8, 12):
        matrix = kernel.covariance_matrix(k, np.sort(rng.random(size)))
        assert (matrix.entries == matrix.entries.T).all()
        eigenvalues = np.linalg.eigvalsh(matrix.entries)
        assert eigenvalues.min() >= -1e-10 * eigenvalues.max()
        assert (np.diag(matrix.entries) >= -1e-14).all()


def test_boundary_pinning():
    for k, points in (
        (KernelSpec(PROCESS.BROWNIAN_BRIDGE), (0, 1)),
        (kernel.load_kernel(OU_ZERO), (0,)),
        (KernelSpec(PROCESS.ELONGATED_BRIDGE, Fraction(-2)), (0,)),
        (KernelSpec(PROCESS.BRIDGED_INTEGRATED_WIENER, integrations=2), (0, 1)),
        (kernel.load_kernel(INTEGRATED_WIENER), (0,)),
        (KernelSpec(PROCESS.SLEPIAN, Fraction(1), integrations=1, endpoints=(1,)), (1,)),
    ):
        for x in points:
            assert abs(float(kernel.evaluate(k, x, x, 64))) < 1e-14
    # ou_zero starts at 0 but is free at 1
    assert float(kernel.evaluate(kernel.load_kernel(OU_ZERO), 1, 1, 64)) > 0.1


def test_special_cases():
    bridge = KernelSpec(PROCESS.BROWNIAN_BRIDGE)
    conditioned = KernelSpec(PROCESS.BRIDGED_INTEGRATED_WIENER)
    ou = KernelSpec(PROCESS.OU_STATIONARY, Fraction(1))
    matern = KernelSpec(PROCESS.MATERN)
    for s, t in ((0.1, 0.9), (0.5, 0.5), (0.7, 0.2)):
        expected = kernel.covariance(bridge, s, t)
        assert kernel.covariance(conditioned, s, t) == pytest.approx(expected)
        assert kernel.covariance(matern, s, t) == pytest.approx(kernel.covariance(ou, s, t))


def test_extended_precision():
    with mpmath.workprec(384):
        value = kernel.evaluate(KernelSpec(PROCESS.WIENER), Fraction(3, 10), Fraction(7, 10), 384)
        assert abs(value - mpmath.mpf(3) / 10) < mpmath.mpf(2) ** -380
        k = kernel.load_kernel(INTEGRATED_WIENER)
        value = kernel.evaluate(k, Fraction(1, 2), Fraction(1))
        assert abs(value - mpmath.mpf(5) / 48) < mpmath.mpf(2) ** -370
    assert kernel.evaluation_tolerance(k) == 0
    quadrature_kernel = KernelSpec(PROCESS.WIENER, integrations=1, endpoints=(1,))
    assert kernel.evaluation_tolerance(quadrature_kernel) == DEFAULTS.QUADRATURE_TOLERANCE


def test_max_variance():
    assert kernel.max_variance(kernel.load_kernel(WIENER)) == 1
    assert kernel.max_variance(KernelSpec(PROCESS.BROWNIAN_BRIDGE)) == pytest.approx(0.25)
    slepian = KernelSpec(PROCESS.SLEPIAN, Fraction(2))
    assert kernel.max_variance(slepian, [0.123]) == pytest.approx(2)


def test_kernel_spec_errors():
    with pytest.raises(KernelError):
        KernelSpec("fractional_brownian_motion")
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.OU_STATIONARY)
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.OU_STATIONARY, Fraction(0))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.BOGOLYUBOV, Fraction(-1))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.OU_ZERO, Fraction(0))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.ELONGATED_BRIDGE, Fraction(1))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.SLEPIAN, Fraction(1, 2))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.WIENER, Fraction(1))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.WIENER, integrations=2, endpoints=(0,))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.WIENER, integrations=1, endpoints=(2,))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.MATERN, integrations=1, endpoints=(0,))
    with pytest.raises(KernelError):
        KernelSpec(PROCESS.CENTERED_INTEGRATED_BRIDGE, integrations=3)
    with pytest.raises(KernelError):
        kernel.evaluate(KernelSpec(PROCESS.WIENER), 0.5, 1.5)


def test_load_kernel(tmp_path):
    k = kernel.load_kernel(BOGOLYUBOV)
    assert k == KernelSpec(PROCESS.BOGOLYUBOV, Fraction(1))
    assert kernel.load_kernel(INTEGRATED_WIENER).endpoints == (0,)
    assert kernel.digest(k) != kernel.digest(kernel.load_kernel(OU_ZERO))
    same = kernel.loads('{"process": "bogolyubov", "param": 1.0}')
    assert kernel.digest(k) == kernel.digest(same)
    with pytest.raises(SpecError):
        kernel.load_kernel(tmp_path / "missing.json")
    with pytest.raises(SpecError):
        kernel.loads('{"process": "wiener", "order": 2}')
    with pytest.raises(SpecError):
        kernel.loads("[]")
