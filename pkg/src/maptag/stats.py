"""Statistics for tagging experiments.

Covers the analysis toolkit used to evaluate tagging-condition studies:
Pearson chi-square independence tests on contingency tables, the Friedman
rank sum test computed from rank-count matrices, Cohen's kappa for coder
agreement, per-condition tag means, tag frequency tables, cumulative tag
evolution, and balanced Latin square condition ordering.

Everything is pure and deterministic. P-values come from an internally
implemented regularized incomplete gamma (series + continued fraction), so
no statistics dependency is required at runtime.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateTableError, InvalidMatrixError, ValidationError

TYPE_CODES = ("factual", "personal", "other")
CATEGORY_CODES = ("event", "location", "other", "people", "time")


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulated counts with labeled rows and columns."""

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.row_labels) < 2 or len(self.col_labels) < 2:
            raise ValidationError("contingency table needs at least 2 rows and 2 columns")
        if len(self.counts) != len(self.row_labels):
            raise ValidationError("count rows do not match row labels")
        for row in self.counts:
            if len(row) != len(self.col_labels):
                raise ValidationError("count columns do not match column labels")
            if any(c < 0 or int(c) != c for c in row):
                raise ValidationError("counts must be non-negative integers")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


@dataclass(frozen=True)
class RankCountMatrix:
    """How often each condition was ranked 1st, 2nd, ... by n participants.

    Rows are conditions, columns are ranks 1..k. Every row and every rank
    column must sum to n (each participant ranks every condition exactly
    once, no ties).
    """

    conditions: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self):
        k = len(self.conditions)
        if k < 2:
            raise InvalidMatrixError("need at least 2 conditions")
        if len(self.counts) != k or any(len(row) != k for row in self.counts):
            raise InvalidMatrixError("rank-count matrix must be k x k")
        if any(c < 0 or int(c) != c for row in self.counts for c in row):
            raise InvalidMatrixError("rank counts must be non-negative integers")
        for label, row in zip(self.conditions, self.counts):
            if sum(row) != self.n:
                raise InvalidMatrixError(f"row {label!r} sums to {sum(row)}, expected n={self.n}")
        for rank in range(k):
            col = sum(row[rank] for row in self.counts)
            if col != self.n:
                raise InvalidMatrixError(f"rank column {rank + 1} sums to {col}, expected n={self.n}")


@dataclass(frozen=True)
class CodedTag:
    """A human coder's type/category judgment for one tag. Data only."""

    tag_id: str
    coder_id: str
    type_code: str
    category_code: str

    def __post_init__(self):
        if self.type_code not in TYPE_CODES:
            raise ValidationError(f"unknown type code {self.type_code!r}")
        if self.category_code not in CATEGORY_CODES:
            raise ValidationError(f"unknown category code {self.category_code!r}")


@dataclass(frozen=True)
class StatResult:
    """Named test outcome as exposed over the CLI and HTTP surfaces."""

    name: str
    statistic: float
    df: int
    p: float


def chi_square(table: ContingencyTable) -> tuple[float, int]:
    """Pearson chi-square statistic and degrees of freedom.

    statistic = sum (O - E)^2 / E  with E = row_total * col_total / N,
    df = (rows - 1) * (cols - 1). No continuity correction.
    """
    counts = np.asarray(table.counts, dtype=float)
    row_tot = counts.sum(axis=1)
    col_tot = counts.sum(axis=0)
    total = counts.sum()
    if total <= 0 or (row_tot == 0).any() or (col_tot == 0).any():
        raise DegenerateTableError("zero marginal total; expected counts undefined")
    expected = np.outer(row_tot, col_tot) / total
    statistic = float(((counts - expected) ** 2 / expected).sum())
    df = (counts.shape[0] - 1) * (counts.shape[1] - 1)
    return statistic, df


def friedman_from_rank_counts(matrix: RankCountMatrix) -> tuple[float, int]:
    """Friedman rank sum statistic from a condition-by-rank count matrix.

    Rank sums R_j = sum_r count[j][r] * r; the statistic is
    12 / (n*k*(k+1)) * sum R_j^2 - 3*n*(k+1), chi-square distributed with
    df = k - 1 under the null.
    """
    k = len(matrix.conditions)
    n = matrix.n
    rank_sums = [sum(count * (rank + 1) for rank, count in enumerate(row)) for row in matrix.counts]
    statistic = 12.0 / (n * k * (k + 1)) * sum(r * r for r in rank_sums) - 3.0 * n * (k + 1)
    return statistic, k - 1


def cohens_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """Chance-corrected agreement between two coders' label sequences.

    kappa = (p_o - p_e) / (1 - p_e) where p_o is observed agreement and p_e
    the agreement expected from the marginal code frequencies. The fully
    degenerate case p_e = 1 (both coders constant on one code) is defined
    as 1.
    """
    if len(a) != len(b):
        raise ValidationError(f"code lists differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValidationError("code lists must be non-empty")
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    freq_a = Counter(a)
    freq_b = Counter(b)
    p_e = sum(freq_a[c] * freq_b.get(c, 0) for c in freq_a) / (n * n)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def mean_tags_per_condition(
    records: Iterable[tuple[str, int, int]],
) -> dict[str, tuple[float, float]]:
    """Mean accepted and rejected tag counts per condition.

    Takes (condition, accepted_count, rejected_count) records, one per
    annotation. Conditions with no annotations are simply absent from the
    result rather than reported as zero.
    """
    sums: dict[str, list[float]] = {}
    for condition, accepted, rejected in records:
        acc = sums.setdefault(condition, [0.0, 0.0, 0.0])
        acc[0] += accepted
        acc[1] += rejected
        acc[2] += 1
    return {c: (acc / cnt, rej / cnt) for c, (acc, rej, cnt) in sums.items()}


def tag_frequency(labels: Iterable[str]) -> list[tuple[str, int]]:
    """Case-sensitive label counts, ordered by count desc then label asc."""
    counts = Counter(labels)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def cumulative_evolution(records: Iterable[tuple[str, int]]) -> dict[str, list[int]]:
    """Cumulative tag-count series per condition.

    Takes (condition, tags_added) records in annotation-creation order and
    returns, per condition, the running total after each of its annotations.
    """
    series: dict[str, list[int]] = {}
    for condition, added in records:
        prev = series.setdefault(condition, [])
        prev.append((prev[-1] if prev else 0) + added)
    return series


def balanced_latin_square(k: int, labels: Sequence[str] | None = None) -> list[list]:
    """A k x k balanced Latin square of condition orderings.

    Each condition appears once per row and per column, and immediately
    precedes every other condition equally often across rows. The standard
    construction (0, 1, k-1, 2, k-2, ...; subsequent rows shift by one)
    only balances adjacency for even k, so odd k is rejected.
    """
    if k < 2 or k % 2 != 0:
        raise ValidationError(f"balanced Latin square requires an even k >= 2, got {k}")
    if labels is not None and len(labels) != k:
        raise ValidationError(f"expected {k} labels, got {len(labels)}")
    first = [0]
    for step in range(1, k):
        first.append(first[-1] + step if step % 2 == 1 else first[-1] - step)
    # first is 0, 1, k-1, 2, k-2, ... modulo k
    first = [v % k for v in first]
    rows = [[(v + shift) % k for v in first] for shift in range(k)]
    if labels is None:
        return rows
    return [[labels[v] for v in row] for row in rows]


def crosstab(pairs: Iterable[tuple[str, str]]) -> ContingencyTable:
    """Contingency table from (row_key, col_key) observations."""
    pairs = list(pairs)
    rows = sorted({r for r, _ in pairs})
    cols = sorted({c for _, c in pairs})
    counts = Counter(pairs)
    return ContingencyTable(
        row_labels=tuple(rows),
        col_labels=tuple(cols),
        counts=tuple(tuple(counts[(r, c)] for c in cols) for r in rows),
    )


def chi_square_result(table: ContingencyTable, name: str = "chi-square") -> StatResult:
    statistic, df = chi_square(table)
    return StatResult(name=name, statistic=statistic, df=df, p=chi2_sf(statistic, df))


def friedman_result(matrix: RankCountMatrix, name: str = "friedman") -> StatResult:
    statistic, df = friedman_from_rank_counts(matrix)
    return StatResult(name=name, statistic=statistic, df=df, p=chi2_sf(statistic, df))


# --- chi-square upper tail -------------------------------------------------
#
# P(a, x) by power series for x < a + 1, Q(a, x) by Lentz's continued
# fraction otherwise; the chi-square survival function is Q(df/2, x/2).

_EPS = 1e-15
_TINY = 1e-300
_MAX_ITER = 1000


def _gamma_p_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0.0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    if a <= 0.0 or x < 0.0:
        raise ValidationError(f"Q(a, x) requires a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if df < 1:
        raise ValidationError(f"df must be >= 1, got {df}")
    return regularized_gamma_q(df / 2.0, x / 2.0)


# --- delimited-text table files --------------------------------------------
#
# One header line with column labels, then one line per row: the row label
# followed by integer counts. Comma-separated; blank lines and '#' comments
# are ignored.


def _parse_rows(lines: Iterable[str]) -> list[list[str]]:
    rows = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    if len(rows) < 2:
        raise ValidationError("table file needs a header line and at least one data row")
    return rows


def load_contingency_table(lines: Iterable[str]) -> ContingencyTable:
    """Read a contingency table from delimited text."""
    rows = _parse_rows(lines)
    col_labels = tuple(rows[0][1:])
    row_labels = tuple(r[0] for r in rows[1:])
    try:
        counts = tuple(tuple(int(c) for c in r[1:]) for r in rows[1:])
    except ValueError as exc:
        raise ValidationError(f"non-integer count in table: {exc}") from exc
    return ContingencyTable(row_labels=row_labels, col_labels=col_labels, counts=counts)


def load_rank_counts(lines: Iterable[str]) -> RankCountMatrix:
    """Read a rank-count matrix from delimited text.

    The header names ranks 1..k in order; each data row is a condition
    followed by its per-rank counts.
    """
    rows = _parse_rows(lines)
    header = rows[0][1:]
    if [h for h in header] != [str(i) for i in range(1, len(header) + 1)]:
        raise ValidationError(f"rank header must be 1..k in order, got {header}")
    conditions = tuple(r[0] for r in rows[1:])
    try:
        counts = tuple(tuple(int(c) for c in r[1:]) for r in rows[1:])
    except ValueError as exc:
        raise ValidationError(f"non-integer count in matrix: {exc}") from exc
    n = sum(counts[0]) if counts else 0
    return RankCountMatrix(conditions=conditions, counts=counts, n=n)
