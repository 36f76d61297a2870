"""
CSV layouts and file names of every exported artifact.
"""
from typing import Tuple

Header = Tuple[str, ...]

ATOMS: Header = ("location", "weight", "level")
EIGS: Header = ("index", "lambda")
COV: Header = ("s", "t", "cov", "stderr")
SMALLBALL: Header = ("eps", "log_prob", "method", "stderr", "n_samples", "seed")

META_SUFFIX = ".meta"

# artifact names inside a run's output directory
ATOMS_FILE = "atoms.csv"
EIGS_FILE = "eigs.csv"
SLOPE_FILE = "slope.json"
SMALLBALL_FILE = "smallball.csv"
REPORT_FILE = "report.json"
COV_FILE = "cov.csv"
