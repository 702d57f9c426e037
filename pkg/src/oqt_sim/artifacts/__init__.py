"""Writers for provenance, curve and summary artifacts."""

from oqt_sim.artifacts.writers import (
    CheckResult,
    config_hash,
    read_csv,
    write_csv,
    write_curves,
    write_provenance,
    write_summary,
)

__all__ = [
    "CheckResult",
    "config_hash",
    "read_csv",
    "write_csv",
    "write_curves",
    "write_provenance",
    "write_summary",
]
