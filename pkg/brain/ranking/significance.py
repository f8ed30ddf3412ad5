"""Paired t-tests between systems with Bonferroni correction."""

from __future__ import annotations

import itertools
import string
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import betainc

from brain.ranking.evaluation import MEASURES, MeasureResult
from core.errors import DataError, QueryMismatchError, UsageError
from core.logging import get_logger

logger = get_logger(__name__)

_DEGENERATE_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class TTestResult:
    t_statistic: float
    p_value: float
    n: int


@dataclass(frozen=True, slots=True)
class PairTest:
    system_a: str
    system_b: str
    t_statistic: float
    p_raw: float
    p_adjusted: float
    significant: bool


@dataclass(slots=True)
class SignificanceMatrix:
    """All unordered system pairs for one measure within one table block."""

    measure: str
    alpha: float
    systems: list[str]
    pairs: list[PairTest] = field(default_factory=list)

    @property
    def multiplier(self) -> int:
        return len(self.pairs)

    def letters(self) -> dict[str, str]:
        """Letter per system, in system order: a, b, c, ..."""
        return {name: letter_for(i) for i, name in enumerate(self.systems)}

    def nonsignificant_letters(self) -> dict[str, str]:
        """For each system, the letters of systems it is not significantly different from."""
        letters = self.letters()
        marks: dict[str, list[str]] = {name: [] for name in self.systems}
        for pair in self.pairs:
            if not pair.significant:
                marks[pair.system_a].append(letters[pair.system_b])
                marks[pair.system_b].append(letters[pair.system_a])
        return {name: "".join(sorted(found)) for name, found in marks.items()}


def letter_for(index: int) -> str:
    letters = string.ascii_lowercase
    if index < len(letters):
        return letters[index]
    return letters[index // len(letters) - 1] + letters[index % len(letters)]


def student_t_two_sided(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t via the regularized incomplete beta."""
    if np.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def paired_ttest(per_query_a: Mapping[str, float], per_query_b: Mapping[str, float]) -> TTestResult:
    """Classic paired t-test over per-query differences a - b.

    When every difference is equal the variance vanishes: p is 1.0 for a zero
    mean difference and 0.0 otherwise.

    Raises:
        QueryMismatchError: If the query sets differ
        DataError: If fewer than two queries are paired
    """
    mismatch = set(per_query_a) ^ set(per_query_b)
    if mismatch:
        raise QueryMismatchError("Systems cover different queries", mismatch)
    query_ids = sorted(per_query_a)
    n = len(query_ids)
    if n < 2:
        raise DataError(f"Paired t-test needs at least 2 queries, got {n}")

    diffs = np.array([per_query_a[q] - per_query_b[q] for q in query_ids], dtype=float)
    mean = float(diffs.mean())
    if np.allclose(diffs, diffs[0], rtol=0.0, atol=_DEGENERATE_TOLERANCE):
        if abs(mean) <= _DEGENERATE_TOLERANCE:
            return TTestResult(0.0, 1.0, n)
        return TTestResult(float(np.copysign(np.inf, mean)), 0.0, n)

    std_err = float(diffs.std(ddof=1)) / np.sqrt(n)
    t = mean / std_err
    return TTestResult(t, student_t_two_sided(t, n - 1), n)


def bonferroni(p_value: float, comparisons: int) -> float:
    return min(1.0, p_value * comparisons)


def significance_matrix(systems: Sequence[MeasureResult], alpha: float = 0.05, measure: str = "map") -> SignificanceMatrix:
    """Pairwise paired t-tests with Bonferroni-adjusted p-values.

    Raises:
        UsageError: If fewer than two systems are given or the measure is unknown
        QueryMismatchError: If systems cover different queries
    """
    if len(systems) < 2:
        raise UsageError("Significance testing needs at least two systems")
    if measure not in MEASURES:
        raise UsageError(f"Unknown measure {measure!r}; expected one of {', '.join(MEASURES)}")

    combos = list(itertools.combinations(systems, 2))
    matrix = SignificanceMatrix(measure=measure, alpha=alpha, systems=[s.name for s in systems])
    for a, b in combos:
        result = paired_ttest(a.values(measure), b.values(measure))
        adjusted = bonferroni(result.p_value, len(combos))
        matrix.pairs.append(
            PairTest(
                system_a=a.name,
                system_b=b.name,
                t_statistic=result.t_statistic,
                p_raw=result.p_value,
                p_adjusted=adjusted,
                significant=adjusted < alpha,
            )
        )
    logger.info(
        "Significance computed",
        measure=measure,
        pairs=len(combos),
        significant=sum(1 for pair in matrix.pairs if pair.significant),
    )
    return matrix


def write_significance(matrices: Sequence[SignificanceMatrix], path: Path) -> None:
    """Tab-separated export of every pair test."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("measure\tsystem_a\tsystem_b\tt\tp_raw\tp_adjusted\tsignificant\n")
        for matrix in matrices:
            for pair in matrix.pairs:
                f.write(
                    f"{matrix.measure}\t{pair.system_a}\t{pair.system_b}\t{pair.t_statistic:.6g}\t"
                    f"{pair.p_raw:.6g}\t{pair.p_adjusted:.6g}\t{int(pair.significant)}\n"
                )
