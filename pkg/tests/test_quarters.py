"""Tests for calendar quarters and quarterly rate series."""

from __future__ import annotations

import numpy as np
import pytest

from bankbeta.errors import AlignmentError, SchemaError
from bankbeta.quarters import Quarter, RateSeries, parse_rate_csv, quarter_range


class TestQuarter:
    def test_ordering_follows_calendar(self):
        """Quarters order chronologically and (y,4) rolls into (y+1,1)."""
        assert Quarter(2000, 4) < Quarter(2001, 1)
        assert Quarter(2000, 4).next() == Quarter(2001, 1)
        assert Quarter(2001, 1).prev() == Quarter(2000, 4)

    def test_label_round_trip(self):
        assert Quarter.parse("2013Q3").label() == "2013Q3"
        assert Quarter.parse(" 1999Q1 ") == Quarter(1999, 1)

    def test_rejects_bad_labels(self):
        with pytest.raises(ValueError, match="not a quarter label"):
            Quarter.parse("2013Q5")
        with pytest.raises(ValueError, match="1..4"):
            Quarter(2013, 0)

    def test_from_date_string_maps_months_to_quarters(self):
        assert Quarter.from_date_string("1992-10-01") == Quarter(1992, 4)
        assert Quarter.from_date_string("2024-06-30") == Quarter(2024, 2)

    def test_shift_is_additive(self, rng: np.random.Generator):
        q = Quarter(2005, 2)
        for _ in range(50):
            a, b = rng.integers(-30, 30, size=2)
            assert q.shift(int(a)).shift(int(b)) == q.shift(int(a + b))

    def test_quarter_range_is_inclusive_and_contiguous(self):
        qs = quarter_range(Quarter(1999, 3), Quarter(2000, 2))
        assert [x.label() for x in qs] == ["1999Q3", "1999Q4", "2000Q1", "2000Q2"]
        with pytest.raises(ValueError):
            quarter_range(Quarter(2000, 2), Quarter(1999, 3))

    def test_end_date_is_quarter_end(self):
        assert Quarter(2020, 1).end_date().isoformat() == "2020-03-31"
        assert Quarter(2020, 2).end_date().isoformat() == "2020-06-30"


class TestRateSeries:
    def test_gap_raises_alignment_error(self):
        with pytest.raises(AlignmentError, match="gap"):
            RateSeries((Quarter(2000, 1), Quarter(2000, 3)), np.array([1.0, 2.0]))

    def test_change_is_first_difference_of_levels(self):
        qs = tuple(quarter_range(Quarter(2000, 1), Quarter(2000, 3)))
        series = RateSeries(qs, np.array([1.0, 1.2, 1.1]))
        assert series.change(Quarter(2000, 2)) == pytest.approx(0.2)
        assert series.change(Quarter(2000, 3)) == pytest.approx(-0.1)

    def test_level_outside_coverage_raises(self):
        series = RateSeries((Quarter(2000, 1),), np.array([5.0]))
        with pytest.raises(AlignmentError, match="does not cover"):
            series.level(Quarter(2001, 1))

    def test_covers(self):
        qs = tuple(quarter_range(Quarter(2000, 1), Quarter(2001, 4)))
        series = RateSeries(qs, np.zeros(len(qs)))
        assert series.covers(Quarter(2000, 2), Quarter(2001, 3))
        assert not series.covers(Quarter(1999, 4), Quarter(2001, 3))


class TestParseRateCsv:
    def test_last_sampling_takes_latest_dated_row(self, tmp_path):
        """Daily rows collapse to the last observation of each quarter."""
        p = tmp_path / "rates.csv"
        p.write_text(
            "date,value\n"
            "2001-01-15,5.0\n"
            "2001-03-30,5.5\n"
            "2001-02-01,5.2\n"
            "2001-06-30,4.75\n"
        )
        series, issues = parse_rate_csv(p)
        assert issues == []
        assert series.level(Quarter(2001, 1)) == 5.5
        assert series.level(Quarter(2001, 2)) == 4.75

    def test_mean_sampling_averages_within_quarter(self, tmp_path):
        p = tmp_path / "rates.csv"
        p.write_text("date,value\n2001-01-15,5.0\n2001-02-01,5.2\n2001-03-30,5.7\n")
        series, _ = parse_rate_csv(p, sampling="mean")
        assert series.level(Quarter(2001, 1)) == pytest.approx((5.0 + 5.2 + 5.7) / 3)

    def test_bad_rows_become_issues_not_crashes(self, tmp_path):
        p = tmp_path / "rates.csv"
        p.write_text("date,value\nnot-a-date,5.0\n2001-03-30,xyz\n2001-03-31,5.5\n")
        series, issues = parse_rate_csv(p)
        assert [i.reason for i in issues] == ["unparseable date", "unparseable number"]
        assert series.level(Quarter(2001, 1)) == 5.5

    def test_wrong_header_is_schema_error(self, tmp_path):
        p = tmp_path / "rates.csv"
        p.write_text("when,rate\n2001-03-30,5.5\n")
        with pytest.raises(SchemaError, match="date,value"):
            parse_rate_csv(p)

    def test_quarter_gap_in_file_raises(self, tmp_path):
        p = tmp_path / "rates.csv"
        p.write_text("date,value\n2001-03-30,5.5\n2001-12-31,4.0\n")
        with pytest.raises(AlignmentError):
            parse_rate_csv(p)

    def test_unknown_sampling_mode_rejected(self, tmp_path):
        p = tmp_path / "rates.csv"
        p.write_text("date,value\n2001-03-30,5.5\n")
        with pytest.raises(ValueError, match="sampling"):
            parse_rate_csv(p, sampling="median")
