from rich.pretty import pprint

from benchmark import DEPTH, PRECISION_BITS, gram
from benchmark.benchmark_eigs import benchmark_eigs

if __name__ == "__main__":
    pprint({"depth": DEPTH, "precision_bits": PRECISION_BITS, "order": gram.order})
    pprint(benchmark_eigs())
