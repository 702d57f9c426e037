"""Run artifacts: provenance JSON, CSV curves and the PASS/FAIL summary.

CSV files use RFC-4180 quoting, '.' as decimal separator and 17 significant
digits so a rerun with the same provenance reproduces them byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Sequence

import numpy as np

from oqt_sim.utils.structured_logging import get_logger

logger = get_logger(__name__)

CURVES_DIR = "curves"
PROVENANCE_FILE = "provenance.json"
SUMMARY_FILE = "summary.txt"


@dataclass(frozen=True)
class CheckResult:
    """One invariant verdict as it appears in the summary."""

    name: str
    passed: bool
    detail: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.status} {self.name}" + (f": {self.detail}" if self.detail else "")


def format_float(value: Any) -> str:
    return format(float(value), ".17g")


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"real": obj.real, "imag": obj.imag}
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def to_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def config_hash(normalized: Mapping[str, Any]) -> str:
    """sha256 of the canonical JSON form of a normalized config."""
    canonical = json.dumps(normalized, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+-]", "_", name)


def write_csv(path: Path, columns: Mapping[str, Sequence[float]]) -> Path:
    """Write equal-length columns as a CSV table with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=np.float64) for n in names]
    lengths = {a.size for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"CSV columns have different lengths: {sorted(lengths)}")

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([format_float(v) for v in row])
    return path


def write_curves(out_dir: Path, curves: Mapping[str, Mapping[str, Sequence[float]]]) -> list[Path]:
    paths = []
    for name, columns in curves.items():
        paths.append(write_csv(Path(out_dir) / CURVES_DIR / f"{safe_name(name)}.csv", columns))
    logger.info(f"Wrote {len(paths)} curve files", extra={"out_dir": str(out_dir)})
    return paths


def write_provenance(out_dir: Path, provenance: Mapping[str, Any]) -> Path:
    path = Path(out_dir) / PROVENANCE_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(provenance) + "\n", encoding="utf-8")
    return path


def write_summary(out_dir: Path, checks: Iterable[CheckResult]) -> Path:
    """One PASS/FAIL line per check, followed by the totals."""
    checks = list(checks)
    failed = sum(not c.passed for c in checks)
    lines = [c.line() for c in checks]
    lines.append(f"TOTAL {len(checks)} checks, {failed} failed")
    path = Path(out_dir) / SUMMARY_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: Path) -> Dict[str, np.ndarray]:
    """Read a curve file back into float columns."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body], dtype=np.float64)
    data = data.reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}
