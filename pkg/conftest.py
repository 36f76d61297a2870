from pathlib import Path

import pytest

from degenspec import kernel, measure, spectrum

FIXTURES = Path(__file__).parent / "fixtures"

FIGURE = FIXTURES / "measures" / "figure.json"
FIGURE_MIRRORED = FIXTURES / "measures" / "figure_mirrored.json"
FIGURE_FLAT = FIXTURES / "measures" / "figure_flat.json"
FOUR_INTERVAL = FIXTURES / "measures" / "four_interval.json"

WIENER = FIXTURES / "kernels" / "wiener.json"
INTEGRATED_WIENER = FIXTURES / "kernels" / "integrated_wiener.json"
BROWNIAN_BRIDGE = FIXTURES / "kernels" / "brownian_bridge.json"
BOGOLYUBOV = FIXTURES / "kernels" / "bogolyubov.json"
OU_ZERO = FIXTURES / "kernels" / "ou_zero.json"

DEPTH = 60
PRECISION_BITS = 384


def figure_spectrum(kernel_path: Path, depth: int = DEPTH) -> spectrum.Spectrum:
    return spectrum.spectrum(
        measure.load_measure(FIGURE), kernel.load_kernel(kernel_path), depth, PRECISION_BITS
    )


@pytest.fixture(scope="session")
def wiener_spectrum():
    return figure_spectrum(WIENER)


@pytest.fixture(scope="session")
def wiener_spectrum_deeper():
    return figure_spectrum(WIENER, DEPTH + 1)


@pytest.fixture(scope="session")
def integrated_wiener_spectrum():
    return figure_spectrum(INTEGRATED_WIENER)


@pytest.fixture(scope="session")
def bridge_spectrum():
    return figure_spectrum(BROWNIAN_BRIDGE)


@pytest.fixture(scope="session")
def bogolyubov_spectrum():
    return figure_spectrum(BOGOLYUBOV)


@pytest.fixture(scope="session")
def ou_zero_spectrum():
    return figure_spectrum(OU_ZERO)
