"""Results tables: one row per system, letters marking non-significant pairs."""

from __future__ import annotations

from collections.abc import Sequence

import pandas as pd

from brain.ranking.evaluation import MEASURES, MeasureResult, measure_deltas
from brain.ranking.significance import SignificanceMatrix
from core.errors import UsageError

MEASURE_LABELS = {"map": "MAP", "mrr": "MRR", "p1": "P@1"}


def results_frame(systems: Sequence[MeasureResult], matrices: Sequence[SignificanceMatrix] = ()) -> pd.DataFrame:
    """Aggregate measures per system with the letters of tied systems."""
    by_measure = {matrix.measure: matrix for matrix in matrices}
    letters = next(iter(by_measure.values())).letters() if by_measure else {}
    rows = []
    for system in systems:
        row: dict[str, object] = {"letter": letters.get(system.name, ""), "system": system.name}
        for measure in MEASURES:
            row[MEASURE_LABELS[measure]] = system.aggregate.get(measure, 0.0)
            matrix = by_measure.get(measure)
            row[f"{MEASURE_LABELS[measure]} ties"] = matrix.nonsignificant_letters().get(system.name, "") if matrix else ""
        row["queries"] = len(system.per_query)
        rows.append(row)
    return pd.DataFrame(rows)


def render_results_table(
    systems: Sequence[MeasureResult],
    matrices: Sequence[SignificanceMatrix] = (),
    baseline: str | None = None,
) -> str:
    """Human-readable table: ``0.2457^bc`` marks no significant difference from b and c.

    With ``baseline``, a final row gives the percent change of the last
    system against the named one.
    """
    frame = results_frame(systems, matrices)
    lines = []
    for record in frame.to_dict("records"):
        cells = {}
        for measure in MEASURES:
            label = MEASURE_LABELS[measure]
            ties = record[f"{label} ties"]
            cells[label] = f"{record[label]:.4f}" + (f"^{ties}" if ties else "")
        prefix = f"({record['letter']}) " if record["letter"] else ""
        lines.append({"System": f"{prefix}{record['system']}", **cells})

    if baseline is not None and len(systems) >= 2:
        base = next((system for system in systems if system.name == baseline), None)
        if base is None:
            raise UsageError(f"Unknown baseline system {baseline!r}")
        deltas = measure_deltas(base, systems[-1])
        lines.append(
            {
                "System": f"delta vs {baseline}",
                **{
                    MEASURE_LABELS[m]: "n/a" if deltas[m][1] is None else f"{deltas[m][1]:+.1f}%"
                    for m in MEASURES
                },
            }
        )
    table = pd.DataFrame(lines, columns=["System", *MEASURE_LABELS.values()])
    return table.to_string(index=False)
