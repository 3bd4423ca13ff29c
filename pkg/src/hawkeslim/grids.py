"""Sampled paths on time grids, with delimited-text round-tripping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PathGrid"]


@dataclass(frozen=True)
class PathGrid:
    """A path sampled on a sorted time grid.

    Parameters
    ----------
    times : 1-d array of nonnegative, nondecreasing sample times.  Grids may
        be uniform or event-indexed (one stamp per event).
    values : samples at those times; shape ``(n,)`` for scalar paths or
        ``(n, k)`` for k-component paths.

    Rescaled paths conventionally live on [0, 1]; raw event-time paths and
    limit-model paths use their natural horizon, which the type does not
    restrict.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if times.size == 0:
            raise ValueError("a path needs at least one sample")
        if times[0] < 0.0:
            raise ValueError("times must be nonnegative")
        if np.any(np.diff(times) < 0.0):
            raise ValueError("times must be nondecreasing")
        if values.ndim not in (1, 2):
            raise ValueError("values must have shape (n,) or (n, k)")
        if values.shape[0] != times.size:
            raise ValueError(
                f"values leading axis {values.shape[0]} does not match "
                f"{times.size} time stamps"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_components(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def value_at(self, t):
        """Right-continuous lookup: the sample at the largest grid time <= t.

        Times before the first stamp return the first sample.  Accepts
        scalars or arrays.
        """
        idx = np.searchsorted(self.times, t, side="right") - 1
        idx = np.clip(idx, 0, self.times.size - 1)
        return self.values[idx]

    def to_csv(self, path) -> None:
        """Write ``time,value`` (or ``time,value_1,...,value_k``) rows."""
        if self.values.ndim == 1:
            header = "time,value"
            table = np.column_stack([self.times, self.values])
        else:
            header = ",".join(
                ["time"] + [f"value_{j + 1}" for j in range(self.values.shape[1])]
            )
            table = np.column_stack([self.times, self.values])
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "PathGrid":
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        values = table[:, 1:]
        if values.shape[1] == 1:
            values = values[:, 0]
        return cls(table[:, 0], values)
