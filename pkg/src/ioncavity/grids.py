"""Two-axis result grids shared by the sweep, robustness and pulse engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Axis:
    """One named sweep axis with its SI values and unit label."""

    name: str
    values: np.ndarray
    unit: str = "-"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValidationError(f"axis {self.name!r} needs a non-empty 1-D value array")


@dataclass(frozen=True)
class SweepGrid:
    """Evaluated quantity on the cartesian product of two axes.

    values[i, j] corresponds to (axes[0].values[i], axes[1].values[j]).
    Infeasible cells carry NaN in ``values`` and False in ``feasible``; they
    are serialised as an empty value field with feasible=0, never as NaN text.
    """

    axes: tuple[Axis, Axis]
    values: np.ndarray
    feasible: np.ndarray
    quantity: str
    unit: str = "-"
    fixed: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "feasible", np.asarray(self.feasible, dtype=bool))
        shape = (self.axes[0].values.size, self.axes[1].values.size)
        if self.values.shape != shape or self.feasible.shape != shape:
            raise ValidationError(
                f"grid shape {self.values.shape} does not match axes {shape}"
            )
        if np.any(np.isnan(self.values) & self.feasible):
            raise ValidationError("feasible cells must carry finite values")
