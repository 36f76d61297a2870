from pathlib import Path

from degenspec import kernel, measure, spectrum

FIXTURES = Path(__file__).parent.parent / "fixtures"

spec = measure.load_measure(FIXTURES / "measures" / "figure.json")
wiener = kernel.load_kernel(FIXTURES / "kernels" / "wiener.json")
DEPTH = 20
PRECISION_BITS = 256

atom_list = measure.atoms(spec, DEPTH, PRECISION_BITS)
gram = spectrum.gram_matrix(atom_list, wiener, PRECISION_BITS, measure.digest(spec))
