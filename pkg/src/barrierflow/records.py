"""Trajectory records and their deterministic CSV form.

Rows are validated on append (finite values, strictly increasing index) and
floats are written with shortest round-trip decimal formatting, so a rerun
with identical inputs produces a byte-identical file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_INT_COLUMNS = {"k", "damping_events"}


@dataclass
class TrajectoryRecord:
    kind: str  # "dynamics" or "algorithm"
    columns: list[str]
    metadata: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    aux: dict = field(default_factory=dict)

    def append(self, values) -> None:
        row = [float(v) for v in values]
        if len(row) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(row)}")
        if not all(np.isfinite(row)):
            raise ValueError(f"non-finite row rejected: {row}")
        if self.rows and row[0] <= self.rows[-1][0]:
            raise ValueError("rows must be strictly increasing in the index column")
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def data(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([r[j] for r in self.rows])

    def points(self, prefix: str) -> np.ndarray:
        """Stacked vector-valued column group, e.g. prefix 'x' -> x0, x1, ..."""
        names = [c for c in self.columns if c.startswith(prefix) and c[len(prefix):].isdigit()]
        names.sort(key=lambda c: int(c[len(prefix):]))
        idx = [self.columns.index(c) for c in names]
        return np.array([[r[j] for j in idx] for r in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                cells = []
                for name, v in zip(self.columns, row):
                    if name in _INT_COLUMNS:
                        cells.append(str(int(v)))
                    else:
                        cells.append(repr(float(v)))
                fh.write(",".join(cells) + "\n")


def load_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def vector_columns(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]
