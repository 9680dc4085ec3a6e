"""Calendar quarters and quarterly rate series."""

from __future__ import annotations

import csv
import datetime as _dt
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlignmentError, SchemaError

_LABEL_RE = re.compile(r"^(\d{4})Q([1-4])$")


@dataclass(frozen=True, order=True)
class Quarter:
    """A calendar quarter, ordered chronologically.

    Parameters
    ----------
    year : int
    q : int
        Quarter number in 1..4.
    """

    year: int
    q: int

    def __post_init__(self):
        if not 1 <= self.q <= 4:
            raise ValueError(f"quarter number must be in 1..4, got {self.q}")

    @classmethod
    def from_date(cls, date: _dt.date) -> "Quarter":
        return cls(date.year, (date.month - 1) // 3 + 1)

    @classmethod
    def from_date_string(cls, text: str) -> "Quarter":
        """Parse an ISO ``YYYY-MM-DD`` date into its quarter."""
        return cls.from_date(_dt.date.fromisoformat(text.strip()))

    @classmethod
    def parse(cls, label: str) -> "Quarter":
        """Parse a ``YYYYQn`` label."""
        m = _LABEL_RE.match(label.strip())
        if m is None:
            raise ValueError(f"not a quarter label: {label!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def label(self) -> str:
        return f"{self.year}Q{self.q}"

    def end_date(self) -> _dt.date:
        month = self.q * 3
        day = {3: 31, 6: 30, 9: 30, 12: 31}[month]
        return _dt.date(self.year, month, day)

    def index(self) -> int:
        """Monotone integer index (quarters since year 0)."""
        return self.year * 4 + (self.q - 1)

    def shift(self, n: int) -> "Quarter":
        idx = self.index() + n
        return Quarter(idx // 4, idx % 4 + 1)

    def next(self) -> "Quarter":
        return self.shift(1)

    def prev(self) -> "Quarter":
        return self.shift(-1)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.label()


def quarter_range(first: Quarter, last: Quarter) -> list[Quarter]:
    """Inclusive list of consecutive quarters from ``first`` to ``last``."""
    if last < first:
        raise ValueError("last quarter precedes first")
    return [first.shift(i) for i in range(last.index() - first.index() + 1)]


@dataclass(frozen=True)
class RateSeries:
    """A gap-free quarterly series of rate levels in percentage points.

    Invariants: ``quarters`` are strictly increasing consecutive calendar
    quarters and ``values`` has the same length.
    """

    quarters: tuple[Quarter, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.quarters) != len(self.values):
            raise ValueError("quarters and values lengths differ")
        if len(self.quarters) == 0:
            raise ValueError("empty rate series")
        for prev, cur in zip(self.quarters, self.quarters[1:]):
            if cur.index() != prev.index() + 1:
                raise AlignmentError(
                    f"rate series has a calendar gap between {prev.label()} and {cur.label()}"
                )
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("rate series contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def first(self) -> Quarter:
        return self.quarters[0]

    @property
    def last(self) -> Quarter:
        return self.quarters[-1]

    def covers(self, first: Quarter, last: Quarter) -> bool:
        return self.first <= first and last <= self.last

    def level(self, quarter: Quarter) -> float:
        i = quarter.index() - self.first.index()
        if not 0 <= i < len(self.values):
            raise AlignmentError(f"rate series does not cover {quarter.label()}")
        return float(self.values[i])

    def change(self, quarter: Quarter) -> float:
        """Level change from the previous quarter to ``quarter``."""
        return self.level(quarter) - self.level(quarter.prev())


def parse_rate_csv(path: str | Path, sampling: str = "last"):
    """Read a ``date,value`` CSV into a quarterly :class:`RateSeries`.

    Dates may be any frequency (daily, monthly); observations are collapsed
    to one value per calendar quarter, either the last observation in the
    quarter (default) or the within-quarter mean.

    Returns
    -------
    (RateSeries, list[ParseIssue])
        The collapsed series and per-row issues for rows that could not be
        used. Schema problems raise :class:`SchemaError`.
    """
    from .panel import ParseIssue  # local import to avoid a cycle

    if sampling not in ("last", "mean"):
        raise ValueError(f"unknown sampling mode {sampling!r}")
    path = Path(path)
    issues: list[ParseIssue] = []
    buckets: dict[Quarter, list[tuple[_dt.date, float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty rate file") from None
        cols = [c.strip().lower() for c in header]
        if cols[:2] != ["date", "value"]:
            raise SchemaError(f"{path}: expected header 'date,value', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                date = _dt.date.fromisoformat(row[0].strip())
            except (ValueError, IndexError):
                issues.append(ParseIssue(lineno, "date", "unparseable date"))
                continue
            try:
                value = float(row[1])
            except (ValueError, IndexError):
                issues.append(ParseIssue(lineno, "value", "unparseable number"))
                continue
            if not np.isfinite(value):
                issues.append(ParseIssue(lineno, "value", "non-finite value"))
                continue
            buckets.setdefault(Quarter.from_date(date), []).append((date, value))
    if not buckets:
        raise SchemaError(f"{path}: no usable rate observations")
    quarters = sorted(buckets)
    values = np.empty(len(quarters))
    for i, q in enumerate(quarters):
        obs = sorted(buckets[q])
        if sampling == "last":
            values[i] = obs[-1][1]
        else:
            values[i] = float(np.mean([v for _, v in obs]))
    return RateSeries(tuple(quarters), values), issues
