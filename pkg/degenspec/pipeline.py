"""
Batch runs: atoms, spectrum, counting-slope fit and small ball sweep, each stage writing its
artifact into the output directory and the whole run summarized in report.json.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from degenspec import artifacts, kernel, measure, smallball, spectrum, structs
from degenspec.constants import DEFAULTS, EXIT, METHOD
from degenspec.contexts import Stage
from degenspec.errors import Error, StageError
from degenspec.measure import AtomList
from degenspec.smallball import SmallBallEstimate
from degenspec.spectrum import Spectrum
from degenspec.version import __VERSION__

LOGGER = logging.getLogger(__name__)


def split_list(value: Union[str, Iterable[str]]) -> Tuple[str, ...]:
    """comma separated text or an iterable of strings as a tuple of nonempty items"""
    if isinstance(value, str):
        value = value.split(",")
    return tuple(item.strip() for item in value if item.strip())


@dataclass(frozen=True)
class RunConfig:
    measure: Path
    kernel: Path
    depth: int = DEFAULTS.DEPTH
    precision_bits: int = DEFAULTS.PRECISION_BITS
    eps_list: Tuple[str, ...] = DEFAULTS.EPS
    methods: Tuple[str, ...] = DEFAULTS.METHODS
    seed: int = DEFAULTS.SEED
    n_samples: int = DEFAULTS.N_SAMPLES
    workers: int = DEFAULTS.WORKERS
    output_dir: Path = Path("out")

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")
        if self.precision_bits < DEFAULTS.MIN_PRECISION_BITS:
            raise ValueError(
                f"precision_bits must be at least {DEFAULTS.MIN_PRECISION_BITS}, "
                f"got {self.precision_bits}"
            )
        for eps in self.eps_list:
            smallball.parse_eps(eps)
        if not self.methods:
            raise ValueError("no small ball method selected")
        unknown = sorted(set(self.methods) - set(METHOD.ALL))
        if unknown:
            raise ValueError(f"unknown methods: {', '.join(unknown)}")
        if self.n_samples < 1:
            raise ValueError(f"samples must be positive, got {self.n_samples}")
        if self.workers < 1:
            raise ValueError(f"workers must be positive, got {self.workers}")

    @classmethod
    def from_options(cls, options: Mapping[str, Any]) -> "RunConfig":
        """
        Build from option-file or command line values keyed by option name. `eps`, `method`,
        `samples` and `out` fill `eps_list`, `methods`, `n_samples` and `output_dir`; None means
        not given.
        """
        missing = [key for key in ("measure", "kernel") if options.get(key) is None]
        if missing:
            raise ValueError(f"missing options: {', '.join(missing)}")
        values: Dict[str, Any] = {
            "measure": Path(options["measure"]),
            "kernel": Path(options["kernel"]),
        }
        for name, key, convert in (
            ("depth", "depth", int),
            ("precision_bits", "precision_bits", int),
            ("eps_list", "eps", split_list),
            ("methods", "method", split_list),
            ("seed", "seed", int),
            ("n_samples", "samples", int),
            ("workers", "workers", int),
            ("output_dir", "out", Path),
        ):
            if options.get(key) is not None:
                values[name] = convert(options[key])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "measure": str(self.measure),
            "kernel": str(self.kernel),
            "depth": self.depth,
            "precision_bits": self.precision_bits,
            "eps": list(self.eps_list),
            "methods": list(self.methods),
            "seed": self.seed,
            "samples": self.n_samples,
            "workers": self.workers,
            "out": str(self.output_dir),
        }


class Pipeline:
    """
    One run over a RunConfig. The measure and kernel files are read up front so that a missing or
    malformed input fails before any stage starts.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.spec = measure.load_measure(config.measure)
        self.kernel = kernel.load_kernel(config.kernel)
        self.measure_digest = measure.digest(self.spec)
        self.kernel_digest = kernel.digest(self.kernel)
        self.timings: Dict[str, float] = {}
        self.errors: List[Dict[str, str]] = []

    def path(self, name: str) -> Path:
        return self.config.output_dir / name

    @staticmethod
    def _reusable(path: Path, digest: str) -> bool:
        meta = artifacts.read_meta(path)
        return meta is not None and meta.get("inputs") == digest

    def _record(self, error: StageError, **context: str):
        self.errors.append({"stage": error.stage, "error": str(error.cause), **context})

    def atoms_digest(self) -> str:
        c = self.config
        return artifacts.inputs_digest(
            measure=self.measure_digest, depth=c.depth, precision_bits=c.precision_bits
        )

    def eigs_digest(self) -> str:
        c = self.config
        return artifacts.inputs_digest(
            measure=self.measure_digest,
            kernel=self.kernel_digest,
            depth=c.depth,
            precision_bits=c.precision_bits,
        )

    def atoms(self) -> AtomList:
        c = self.config
        path = self.path(structs.ATOMS_FILE)
        digest = self.atoms_digest()
        with Stage("atoms", self.timings):
            atom_list = measure.atoms(self.spec, c.depth, c.precision_bits)
            if self._reusable(path, digest):
                LOGGER.info("reusing %s", path)
            else:
                artifacts.write_atoms(atom_list, path, c.precision_bits)
                artifacts.write_meta(
                    path,
                    {
                        "inputs": digest,
                        "count": len(atom_list),
                        "tail_mass": artifacts.decimal(atom_list.tail_mass, c.precision_bits),
                    },
                )
        return atom_list

    def eigs(self, atom_list: Optional[AtomList] = None) -> Spectrum:
        c = self.config
        path = self.path(structs.EIGS_FILE)
        digest = self.eigs_digest()
        if self._reusable(path, digest):
            with Stage("eigs", self.timings):
                sp = spectrum.read_spectrum(path)
            LOGGER.info("reusing %s", path)
            return sp
        if atom_list is None:
            atom_list = self.atoms()
        with Stage("eigs", self.timings):
            m = spectrum.gram_matrix(atom_list, self.kernel, c.precision_bits, self.measure_digest)
            sp = spectrum.eigenvalues(m)
            spectrum.write_spectrum(sp, path, inputs=digest)
        return sp

    def slope(self, sp: Spectrum) -> Dict[str, Any]:
        ell = kernel.operator_order(self.kernel)
        theory, q = spectrum.theoretical_slope(self.spec, ell)
        data: Dict[str, Any] = {
            "theoretical_slope": theory,
            "q": q,
            "operator_order": ell,
            "fit": None,
            "ratio": None,
        }
        try:
            with Stage("slope", self.timings):
                fit = spectrum.fit_counting_slope(sp)
                data.update(
                    fit=fit.to_dict(),
                    ratio=fit.slope / theory,
                    periodogram=spectrum.residual_periodogram(sp, fit),
                )
        except StageError as e:
            self._record(e)
        artifacts.write_json(self.path(structs.SLOPE_FILE), data)
        return data

    def _estimate(self, sp: Spectrum, method: str, eps: str) -> SmallBallEstimate:
        c = self.config
        if method == METHOD.MC:
            return smallball.estimate_small_ball_mc(sp, eps, c.n_samples, c.seed, c.workers)
        if method == METHOD.SADDLEPOINT:
            return smallball.log_small_ball_saddlepoint(sp, eps)
        return smallball.asymptotic_log_small_ball(self.spec, self.kernel, eps)

    def smallball(self, sp: Spectrum) -> List[SmallBallEstimate]:
        """one row per method and eps; a failing pair is recorded and skipped"""
        rows = []
        with Stage("smallball", self.timings):
            for method in self.config.methods:
                for eps in self.config.eps_list:
                    try:
                        rows.append(self._estimate(sp, method, eps))
                    except Error as e:
                        LOGGER.warning("%s estimate at eps = %s failed: %s", method, eps, e)
                        self.errors.append(
                            {"stage": "smallball", "method": method, "eps": eps, "error": str(e)}
                        )
            smallball.write_estimates(rows, self.path(structs.SMALLBALL_FILE))
        return rows

    def coefficient(self, rows: List[SmallBallEstimate]) -> Dict[str, Any]:
        """fitted ln^2(1/eps) coefficient of the measured estimates against C"""
        params = smallball.asymptotic_params(self.spec, self.kernel)
        data: Dict[str, Any] = {"C": params.C, "method": None, "fitted": None, "ratio": None}
        measured = [m for m in (METHOD.SADDLEPOINT, METHOD.MC) if m in self.config.methods]
        if not measured:
            return data
        method = measured[0]
        try:
            with Stage("coefficient", self.timings):
                a, _, _ = smallball.fit_log_square_coefficient(
                    row for row in rows if row.method == method
                )
        except StageError as e:
            self._record(e)
        else:
            data.update(method=method, fitted=-a, ratio=-a / params.C)
        return data

    def report(
        self,
        sp: Spectrum,
        slope: Dict[str, Any],
        rows: List[SmallBallEstimate],
        coefficient: Dict[str, Any],
    ) -> Dict[str, Any]:
        fit = slope["fit"] or {}
        report = {
            "tool_version": __VERSION__,
            "config": self.config.to_dict(),
            "measure_digest": self.measure_digest,
            "kernel_digest": self.kernel_digest,
            "eigenvalues": len(sp),
            "trusted_eigenvalues": len(spectrum.trusted(sp)),
            "trust_threshold": float(sp.trust_threshold),
            "slope": {
                "theory": slope["theoretical_slope"],
                "q": slope["q"],
                "fitted": fit.get("slope"),
                "stderr": fit.get("stderr"),
                "points_used": fit.get("points_used"),
                "ratio": slope["ratio"],
            },
            "smallball": [
                {
                    "eps": row.row()[0],
                    "method": row.method,
                    "log_prob": row.log_prob,
                    "stderr": row.stderr,
                }
                for row in rows
            ],
            "coefficient": coefficient,
            "artifacts": {
                "atoms": structs.ATOMS_FILE,
                "eigs": structs.EIGS_FILE,
                "slope": structs.SLOPE_FILE,
                "smallball": structs.SMALLBALL_FILE,
            },
            "timings": dict(self.timings),
            "errors": list(self.errors),
        }
        artifacts.write_json(self.path(structs.REPORT_FILE), report)
        return report

    def run(self) -> Dict[str, Any]:
        """
        All stages in order. Failures in atoms or eigs raise StageError; later failures are
        recorded in the report's `errors`.
        """
        sp = self.eigs(self.atoms())
        slope = self.slope(sp)
        rows = self.smallball(sp)
        return self.report(sp, slope, rows, self.coefficient(rows))


def exit_status(report: Mapping[str, Any]) -> int:
    return EXIT.DOMAIN_FAILURE if report.get("errors") else EXIT.OK


def load_report(output_dir: Union[str, Path]) -> Dict[str, Any]:
    return artifacts.read_json(Path(output_dir) / structs.REPORT_FILE)
