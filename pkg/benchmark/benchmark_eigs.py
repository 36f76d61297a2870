import mpmath
import numpy as np
from rich.pretty import pprint

from benchmark import PRECISION_BITS, gram
from benchmark.decorators import timed
from degenspec import linalg


@timed
def eigs_jacobi():
    return sorted(linalg.jacobi(gram), reverse=True)


@timed
def eigs_mpmath():
    with mpmath.workprec(PRECISION_BITS):
        values = mpmath.eigsy(mpmath.matrix(gram.rows()), eigvals_only=True)
    return sorted((values[i] for i in range(gram.order)), reverse=True)


@timed
def eigs_numpy():
    return sorted(np.linalg.eigvalsh(gram.to_numpy()), reverse=True)


def benchmark_eigs():
    jacobi_time, jacobi_values = eigs_jacobi()
    mpmath_time, mpmath_values = eigs_mpmath()
    numpy_time, numpy_values = eigs_numpy()
    smallest = jacobi_values[-1]
    return {
        "seconds": sorted(
            {"jacobi": jacobi_time, "mpmath": mpmath_time, "numpy": numpy_time}.items(),
            key=lambda x: x[1],
        ),
        "smallest eigenvalue": float(smallest),
        "mpmath relative error": float(abs(mpmath_values[-1] - smallest) / smallest),
        # double precision loses the bottom of the spectrum
        "numpy relative error": float(abs(numpy_values[-1] - smallest) / smallest),
    }


if __name__ == "__main__":
    pprint(benchmark_eigs())
