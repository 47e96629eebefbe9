"""Experiment records and their CSV serialization.

Records carry enough provenance (seeds, primes, rule tags) to re-derive any
row in isolation.  CSV output is byte-deterministic: float cells use Python's
shortest round-trip repr, the config echo is JSON with sorted keys, and
volatile fields (wall time, thread count) never enter the file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from . import __version__


@dataclass
class ExperimentRecord:
    """Rows plus the configuration echo that reproduces them."""

    experiment: str
    config: dict
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__

    def add_row(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def _cell(self, value) -> str:
        if isinstance(value, float):
            return repr(value)
        return str(value)

    def to_csv(self) -> str:
        lines = [
            f"# experiment: {self.experiment}",
            f"# version: {self.version}",
            f"# config: {json.dumps(self.config, sort_keys=True)}",
            ",".join(self.columns),
        ]
        for row in self.rows:
            lines.append(",".join(self._cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


class Stopwatch:
    """Minimal wall-clock timer for record bookkeeping."""

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
