"""Call-report ingestion and decile panel construction.

Input files are plain CSV:

* call report: ``cert,date,intincy,eintexp,asset`` with quarter-end dates,
  annualized interest-income-to-assets ratios as decimal fractions
  (``intincy``), cumulative within-calendar-year interest expense in
  currency (``eintexp``), and total assets in currency;
* rates: ``date,value`` at any frequency, collapsed to quarterly;
* market: ``date,xlf_ret,spy_ret`` quarterly simple returns.

Malformed rows never abort a parse; they are collected as
:class:`ParseIssue` records suitable for a JSON-lines error report. All
downstream ratios are decimal fractions per quarter: annualized income is
divided by 4, cumulative expense is de-cumulated and divided by
same-quarter assets.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AlignmentError, InsufficientDataError, SchemaError
from .quarters import Quarter, RateSeries


@dataclass(frozen=True)
class BankQuarterRecord:
    """One institution-quarter row from the call report."""

    institution_id: str
    quarter: Quarter
    int_income_ratio: float  # fraction of assets per year
    cum_int_expense: float  # currency, cumulative within calendar year
    assets: float  # currency


@dataclass(frozen=True)
class ParseIssue:
    """One rejected or suspect input row."""

    line: int
    column: str | None
    reason: str

    def to_json(self) -> str:
        return json.dumps({"line": self.line, "column": self.column, "reason": self.reason})


@dataclass(frozen=True)
class CallReportParse:
    records: list[BankQuarterRecord]
    issues: list[ParseIssue]


_CALL_REPORT_COLUMNS = ("cert", "date", "intincy", "eintexp", "asset")


def parse_call_report(path: str | Path) -> CallReportParse:
    """Parse a call-report CSV, collecting malformed rows as issues.

    Raises :class:`SchemaError` if the header is missing any documented
    column. Duplicate institution-quarter rows keep the first occurrence and
    flag the rest.
    """
    path = Path(path)
    records: list[BankQuarterRecord] = []
    issues: list[ParseIssue] = []
    seen: set[tuple[str, Quarter]] = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file")
        fields = {c.strip().lower() for c in reader.fieldnames}
        missing = [c for c in _CALL_REPORT_COLUMNS if c not in fields]
        if missing:
            raise SchemaError(f"{path}: header missing columns {missing}")
        for row in reader:
            lineno = reader.line_num
            row = {(k.strip().lower() if k else k): v for k, v in row.items()}
            cert = (row.get("cert") or "").strip()
            if not cert:
                issues.append(ParseIssue(lineno, "cert", "empty institution id"))
                continue
            try:
                quarter = Quarter.from_date_string(row.get("date") or "")
            except ValueError:
                issues.append(ParseIssue(lineno, "date", "unparseable date"))
                continue
            values = {}
            bad = False
            for col in ("intincy", "eintexp", "asset"):
                try:
                    v = float(row.get(col) or "")
                except ValueError:
                    issues.append(ParseIssue(lineno, col, "unparseable number"))
                    bad = True
                    break
                if not np.isfinite(v):
                    issues.append(ParseIssue(lineno, col, "non-finite value"))
                    bad = True
                    break
                values[col] = v
            if bad:
                continue
            if values["asset"] <= 0.0:
                issues.append(ParseIssue(lineno, "asset", "nonpositive assets"))
                continue
            if values["eintexp"] < 0.0:
                issues.append(ParseIssue(lineno, "eintexp", "negative cumulative expense"))
                continue
            key = (cert, quarter)
            if key in seen:
                issues.append(ParseIssue(lineno, None, "duplicate institution-quarter row"))
                continue
            seen.add(key)
            records.append(
                BankQuarterRecord(
                    institution_id=cert,
                    quarter=quarter,
                    int_income_ratio=values["intincy"],
                    cum_int_expense=values["eintexp"],
                    assets=values["asset"],
                )
            )
    return CallReportParse(records, issues)


@dataclass(frozen=True)
class FlaggedExpense:
    """An institution-quarter excluded from the expense series."""

    institution_id: str
    quarter: Quarter
    reason: str


@dataclass(frozen=True)
class ExpenseResult:
    """Per-quarter expense ratios keyed by (institution_id, quarter)."""

    ratios: dict[tuple[str, Quarter], float]
    flagged: list[FlaggedExpense]


def deannualize_expense(records: list[BankQuarterRecord]) -> ExpenseResult:
    """Convert cumulative within-year expense to per-quarter ratios.

    Q1 expense is the cumulative value itself; Q2..Q4 are first differences
    against the same institution's previous quarter. Differences are
    normalized by same-quarter assets to match income units. Institution
    quarters whose cumulative value decreases, or whose previous quarter is
    missing (so the difference is undefined), are flagged and excluded
    rather than repaired.
    """
    by_inst: dict[str, list[BankQuarterRecord]] = {}
    for rec in records:
        by_inst.setdefault(rec.institution_id, []).append(rec)

    ratios: dict[tuple[str, Quarter], float] = {}
    flagged: list[FlaggedExpense] = []
    for inst in sorted(by_inst):
        recs = sorted(by_inst[inst], key=lambda r: r.quarter)
        prev: BankQuarterRecord | None = None
        for rec in recs:
            q = rec.quarter
            if q.q == 1:
                quarterly = rec.cum_int_expense
            elif prev is not None and prev.quarter == q.prev() and prev.quarter.year == q.year:
                diff = rec.cum_int_expense - prev.cum_int_expense
                if diff < 0.0:
                    flagged.append(
                        FlaggedExpense(inst, q, "cumulative expense decreased within year")
                    )
                    prev = rec
                    continue
                quarterly = diff
            else:
                flagged.append(
                    FlaggedExpense(inst, q, "missing prior quarter for de-cumulation")
                )
                prev = rec
                continue
            ratios[(inst, q)] = quarterly / rec.assets
            prev = rec
    return ExpenseResult(ratios, flagged)


def assign_deciles(records: list[BankQuarterRecord]) -> dict[str, int]:
    """Asset-size deciles (1 smallest, 10 largest) for one quarter's cross-section.

    Ranks by assets with institution-id as the lexicographic tiebreak, so the
    assignment is a pure function of the record set regardless of input
    order. Institution i of n (0-based rank) lands in decile
    ``i * 10 // n + 1``.
    """
    if not records:
        raise InsufficientDataError("no records to rank")
    quarters = {r.quarter for r in records}
    if len(quarters) != 1:
        raise ValueError(f"records span {len(quarters)} quarters, expected one")
    ids = [r.institution_id for r in records]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate institution ids in cross-section")
    n = len(records)
    if n < 10:
        raise InsufficientDataError(f"cross-section has {n} institutions, need at least 10")
    ranked = sorted(records, key=lambda r: (r.assets, r.institution_id))
    return {rec.institution_id: i * 10 // n + 1 for i, rec in enumerate(ranked)}


@dataclass(frozen=True)
class DecileSeries:
    """Differenced, aligned series for one decile."""

    d_int_inc: np.ndarray
    d_int_exp: np.ndarray
    d_ff: np.ndarray
    d_ff_lag: np.ndarray


@dataclass(frozen=True)
class DecilePanel:
    """Aligned rate-change regression inputs for all ten deciles.

    ``quarters[t]`` labels the t-th differenced observation; every series in
    every decile has exactly ``len(quarters)`` entries.
    """

    quarters: tuple[Quarter, ...]
    deciles: dict[int, DecileSeries]
    weighting: str = "equal"

    def __post_init__(self):
        if sorted(self.deciles) != list(range(1, 11)):
            raise ValueError("panel must contain deciles 1..10")
        n = len(self.quarters)
        for d, s in self.deciles.items():
            for name in ("d_int_inc", "d_int_exp", "d_ff", "d_ff_lag"):
                if len(getattr(s, name)) != n:
                    raise ValueError(f"decile {d} series {name} length != {n}")

    @property
    def n_quarters(self) -> int:
        return len(self.quarters)

    def series(self, decile: int) -> DecileSeries:
        if decile not in self.deciles:
            raise KeyError(f"no decile {decile}")
        return self.deciles[decile]

    def design_matrix(self, decile: int) -> np.ndarray:
        """Regression design ``[1, d_ff, d_ff_lag]`` for one decile."""
        s = self.series(decile)
        return np.column_stack([np.ones(len(s.d_ff)), s.d_ff, s.d_ff_lag])


def _aggregate(pairs: list[tuple[str, float, float]], weighting: str) -> float:
    """Weighted mean over (id, value, weight) pairs, accumulated in id order.

    Sorting before summation pins the floating-point reduction order, so the
    aggregate is invariant to input row order.
    """
    pairs = sorted(pairs)
    if weighting == "equal":
        return float(sum(v for _, v, _ in pairs)) / len(pairs)
    num = sum(v * w for _, v, w in pairs)
    den = sum(w for _, _, w in pairs)
    return float(num / den)


def build_decile_panel(
    records: list[BankQuarterRecord],
    rates: RateSeries,
    weighting: str = "equal",
) -> DecilePanel:
    """Aggregate institution records into differenced decile series.

    Every quarter needs at least 10 institutions; deciles are re-ranked each
    quarter. Income levels are per-quarter fractions (annualized ratio / 4),
    expense levels come from :func:`deannualize_expense` with flagged
    institution-quarters excluded. Leading quarters where some decile has no
    usable expense observation (e.g. a sample starting mid-year, where
    de-cumulation is undefined) are dropped; a gap after the panel start
    raises :class:`AlignmentError`. The rate series must cover the retained
    span plus one leading quarter so both ``d_ff`` and its lag exist for
    every differenced observation.
    """
    if weighting not in ("equal", "asset"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if not records:
        raise InsufficientDataError("no records")

    by_quarter: dict[Quarter, list[BankQuarterRecord]] = {}
    for rec in records:
        by_quarter.setdefault(rec.quarter, []).append(rec)
    quarters = sorted(by_quarter)
    if len(quarters) < 3:
        raise InsufficientDataError(f"records span {len(quarters)} quarters, need at least 3")
    for prev, cur in zip(quarters, quarters[1:]):
        if cur.index() != prev.index() + 1:
            raise AlignmentError(
                f"record quarters have a gap between {prev.label()} and {cur.label()}"
            )

    expense = deannualize_expense(records)

    income_levels: dict[int, dict[Quarter, float]] = {d: {} for d in range(1, 11)}
    expense_levels: dict[int, dict[Quarter, float]] = {d: {} for d in range(1, 11)}
    for q in quarters:
        recs = by_quarter[q]
        try:
            deciles = assign_deciles(recs)
        except InsufficientDataError as exc:
            raise InsufficientDataError(f"quarter {q.label()}: {exc}") from None
        inc_pairs: dict[int, list[tuple[str, float, float]]] = {d: [] for d in range(1, 11)}
        exp_pairs: dict[int, list[tuple[str, float, float]]] = {d: [] for d in range(1, 11)}
        for rec in recs:
            d = deciles[rec.institution_id]
            inc_pairs[d].append((rec.institution_id, rec.int_income_ratio / 4.0, rec.assets))
            ratio = expense.ratios.get((rec.institution_id, q))
            if ratio is not None:
                exp_pairs[d].append((rec.institution_id, ratio, rec.assets))
        for d in range(1, 11):
            if inc_pairs[d]:
                income_levels[d][q] = _aggregate(inc_pairs[d], weighting)
            if exp_pairs[d]:
                expense_levels[d][q] = _aggregate(exp_pairs[d], weighting)

    def complete(q: Quarter) -> bool:
        return all(q in income_levels[d] and q in expense_levels[d] for d in range(1, 11))

    start = next((i for i, q in enumerate(quarters) if complete(q)), None)
    if start is None:
        raise InsufficientDataError("no quarter has full decile coverage for both series")
    for q in quarters[start:]:
        if not complete(q):
            raise AlignmentError(
                f"decile coverage gap at {q.label()} after panel start "
                f"{quarters[start].label()}"
            )
    usable = quarters[start:]
    if len(usable) < 3:
        raise InsufficientDataError(
            f"only {len(usable)} quarters have full coverage, need at least 3"
        )

    lead = usable[0].prev()
    if not rates.covers(lead, usable[-1]):
        raise AlignmentError(
            f"rate series [{rates.first.label()}..{rates.last.label()}] must cover "
            f"[{lead.label()}..{usable[-1].label()}] (panel span plus one leading quarter)"
        )

    diff_quarters = usable[1:]
    d_ff = np.array([rates.change(q) for q in diff_quarters])
    d_ff_lag = np.array([rates.change(q.prev()) for q in diff_quarters])

    deciles: dict[int, DecileSeries] = {}
    for d in range(1, 11):
        inc = np.array([income_levels[d][q] for q in usable])
        exp = np.array([expense_levels[d][q] for q in usable])
        deciles[d] = DecileSeries(
            d_int_inc=np.diff(inc),
            d_int_exp=np.diff(exp),
            d_ff=d_ff.copy(),
            d_ff_lag=d_ff_lag.copy(),
        )
    return DecilePanel(quarters=tuple(diff_quarters), deciles=deciles, weighting=weighting)


@dataclass(frozen=True)
class MarketSeries:
    """Quarterly sector and market returns (not necessarily gap-free)."""

    quarters: tuple[Quarter, ...]
    xlf_ret: np.ndarray
    spy_ret: np.ndarray

    def __post_init__(self):
        if not (len(self.quarters) == len(self.xlf_ret) == len(self.spy_ret)):
            raise ValueError("market series length mismatch")


def parse_market_csv(path: str | Path):
    """Read ``date,xlf_ret,spy_ret`` rows; returns (MarketSeries, issues)."""
    path = Path(path)
    issues: list[ParseIssue] = []
    rows: dict[Quarter, tuple[float, float]] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file")
        fields = {c.strip().lower() for c in reader.fieldnames}
        missing = [c for c in ("date", "xlf_ret", "spy_ret") if c not in fields]
        if missing:
            raise SchemaError(f"{path}: header missing columns {missing}")
        for row in reader:
            lineno = reader.line_num
            row = {(k.strip().lower() if k else k): v for k, v in row.items()}
            try:
                quarter = Quarter.from_date_string(row.get("date") or "")
            except ValueError:
                issues.append(ParseIssue(lineno, "date", "unparseable date"))
                continue
            try:
                xlf = float(row.get("xlf_ret") or "")
                spy = float(row.get("spy_ret") or "")
            except ValueError:
                issues.append(ParseIssue(lineno, None, "unparseable number"))
                continue
            if not (np.isfinite(xlf) and np.isfinite(spy)):
                issues.append(ParseIssue(lineno, None, "non-finite value"))
                continue
            if quarter in rows:
                issues.append(ParseIssue(lineno, "date", "duplicate quarter"))
                continue
            rows[quarter] = (xlf, spy)
    quarters = tuple(sorted(rows))
    return (
        MarketSeries(
            quarters=quarters,
            xlf_ret=np.array([rows[q][0] for q in quarters]),
            spy_ret=np.array([rows[q][1] for q in quarters]),
        ),
        issues,
    )


def write_error_report(path: str | Path, issues: list[ParseIssue]) -> None:
    """Write parse issues as one JSON object per line."""
    with Path(path).open("w") as fh:
        for issue in issues:
            fh.write(issue.to_json() + "\n")


def write_call_report_csv(path: str | Path, records: list[BankQuarterRecord]) -> None:
    """Write records in the call-report schema (dates are quarter ends)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CALL_REPORT_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.institution_id,
                    rec.quarter.end_date().isoformat(),
                    repr(float(rec.int_income_ratio)),
                    repr(float(rec.cum_int_expense)),
                    repr(float(rec.assets)),
                ]
            )


def write_rate_csv(path: str | Path, rows: list[tuple[str, float]]) -> None:
    """Write (iso date, value) rows in the rate schema."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "value"])
        for date, value in rows:
            writer.writerow([date, repr(float(value))])


def write_market_csv(path: str | Path, rows: list[tuple[str, float, float]]) -> None:
    """Write (iso date, xlf_ret, spy_ret) rows in the market schema."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "xlf_ret", "spy_ret"])
        for date, xlf, spy in rows:
            writer.writerow([date, repr(float(xlf)), repr(float(spy))])
