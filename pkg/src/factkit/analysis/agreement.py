"""Inter-annotator agreement with missing observations.

Krippendorff's alpha is computed through the coincidence matrix over
units with at least two raters (nominal distance), which is the measure
of choice when raters vary per unit.  Fleiss' kappa requires an equal
rater count per unit and is provided for comparability on the subset
where that holds.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import UsageError, UndefinedMetricError

MISSING = None


@dataclass
class LabelMatrix:
    """Rows are units (claims), columns are raters; ``None`` marks a
    missing observation."""

    values: list[list[str | None]]
    categories: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.values:
            widths = {len(row) for row in self.values}
            if len(widths) > 1:
                raise UsageError("ragged label matrix")
        observed = sorted({v for row in self.values for v in row if v is not None})
        if not self.categories:
            self.categories = observed
        else:
            unknown = set(observed) - set(self.categories)
            if unknown:
                raise UsageError(f"values outside category set: {sorted(unknown)}")
        if sum(1 for row in self.values for v in row if v is not None) < 2:
            raise UsageError("label matrix needs at least 2 observations")

    def unit_values(self) -> list[list[str]]:
        return [[v for v in row if v is not None] for row in self.values]


def krippendorff_alpha(matrix: LabelMatrix) -> float:
    """Nominal-distance alpha = 1 - D_o / D_e via the coincidence matrix.

    Units with fewer than two ratings contribute nothing; if no unit is
    pairable the measure is undefined.  Zero observed disagreement is
    reported as 1.0.
    """
    cats = {c: i for i, c in enumerate(matrix.categories)}
    m = len(cats)
    coincidence = np.zeros((m, m), dtype=np.float64)
    pairable_units = 0
    for values in matrix.unit_values():
        mu = len(values)
        if mu < 2:
            continue
        pairable_units += 1
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if i != j:
                    coincidence[cats[a], cats[b]] += 1.0 / (mu - 1)
    if pairable_units == 0:
        raise UndefinedMetricError("no unit has two or more ratings")

    n_c = coincidence.sum(axis=1)
    n = float(n_c.sum())
    disagreement = float(coincidence.sum() - np.trace(coincidence))  # sum over c != k
    d_o = disagreement / n
    if d_o == 0.0:
        return 1.0
    d_e = float(n * n - np.sum(n_c * n_c)) / (n * (n - 1.0))
    return 1.0 - d_o / d_e


def fleiss_kappa(matrix: LabelMatrix) -> float:
    """Standard Fleiss' kappa; every unit must have the same rater count."""
    unit_values = matrix.unit_values()
    if not unit_values:
        raise UsageError("empty matrix")
    rater_counts = {len(v) for v in unit_values}
    if len(rater_counts) != 1:
        raise UsageError(f"unequal rater counts per unit: {sorted(rater_counts)}")
    m = rater_counts.pop()
    if m < 2:
        raise UsageError("fleiss kappa needs at least 2 raters per unit")

    cats = {c: i for i, c in enumerate(matrix.categories)}
    counts = np.zeros((len(unit_values), len(cats)), dtype=np.float64)
    for row, values in enumerate(unit_values):
        for v in values:
            counts[row, cats[v]] += 1

    p_i = (np.sum(counts**2, axis=1) - m) / (m * (m - 1))
    p_bar = float(p_i.mean())
    p_c = counts.sum(axis=0) / (len(unit_values) * m)
    p_e = float(np.sum(p_c**2))
    if p_e == 1.0:
        return 1.0  # single category everywhere: perfect by convention
    return (p_bar - p_e) / (1.0 - p_e)


def matrix_from_rows(rows: Sequence[Sequence[str | None]],
                     categories: Sequence[str] | None = None) -> LabelMatrix:
    return LabelMatrix(values=[list(r) for r in rows],
                       categories=list(categories or []))
