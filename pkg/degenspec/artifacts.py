"""
Exported files: CSV tables with decimal-string numbers, `.meta` JSON sidecars and JSON reports.

Numbers are never written as binary floats, so extended precision values survive the round trip.
"""
import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import mpmath
from mpmath import mpf

from degenspec import structs
from degenspec.errors import SpecError
from degenspec.measure import AtomList, Number, to_mpf

PathLike = Union[str, Path]


def digits(precision_bits: int) -> int:
    """decimal digits that pin down a binary value of `precision_bits`"""
    return math.ceil(precision_bits * math.log10(2)) + 1


def decimal(value: Number, precision_bits: int) -> str:
    with mpmath.workprec(precision_bits):
        return mpmath.nstr(to_mpf(value), digits(precision_bits))


def cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # numpy scalars repr with their type name
        return repr(float(value))
    return str(value)


def write_csv(path: PathLike, header: structs.Header, rows: Iterable[Sequence[Any]]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(value) for value in row])


def read_csv(path: PathLike, header: structs.Header) -> List[Dict[str, str]]:
    try:
        with Path(path).open(encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != header:
                raise SpecError(f"{path}: expected header {','.join(header)}")
            return list(reader)
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e}") from e


def meta_path(path: PathLike) -> Path:
    return Path(path).with_suffix(structs.META_SUFFIX)


def write_json(path: PathLike, data: Dict[str, Any]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise SpecError(f"{path}: expected a JSON object")
    return data


def write_meta(path: PathLike, meta: Dict[str, Any]):
    write_json(meta_path(path), meta)


def read_meta(path: PathLike) -> Optional[Dict[str, Any]]:
    """sidecar of `path`, None when either file is missing or the sidecar is unreadable"""
    if not Path(path).exists() or not meta_path(path).exists():
        return None
    try:
        return read_json(meta_path(path))
    except SpecError:
        return None


def inputs_digest(**inputs: Any) -> str:
    text = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def write_atoms(atoms: AtomList, path: PathLike, precision_bits: int):
    write_csv(
        path,
        structs.ATOMS,
        (
            (decimal(a.location, precision_bits), decimal(a.weight, precision_bits), a.level)
            for a in atoms
        ),
    )


def read_atom_count(path: PathLike) -> int:
    return len(read_csv(path, structs.ATOMS))


def write_cov_csv(cov, path: PathLike):
    """oracle or model covariance table, one row per grid pair"""
    write_csv(path, structs.COV, cov.rows())


def parse_decimal(text: str, precision_bits: int) -> mpf:
    with mpmath.workprec(precision_bits):
        try:
            return mpf(text)
        except ValueError as e:
            raise SpecError(f"not a decimal number: {text!r}") from e
