"""Matched case/referent sets under time-stratified bidirectional sampling.

Referent (control) days share the calendar month, year, and day-of-week of
the case day, which yields 3 or 4 referents per case. Each event becomes one
matched set with windowed exposures attached; sets touching a missing
exposure are dropped (and counted), never patched. A pooled-quantile trim
then removes extreme pollution days.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass, replace
from datetime import date as Date

from .errors import ConfigurationError, EmptyAnalysisError, MissingDataError
from .exposure import ExposureSeries, WindowSpec, windowed_exposure
from .quantiles import type1_quantile

__all__ = [
    "Event",
    "DayRecord",
    "MatchedSet",
    "TrimPolicy",
    "DroppedEvent",
    "REASON_OUTSIDE_SEASON",
    "REASON_DUPLICATE_SUBJECT",
    "REASON_UNKNOWN_ZONE",
    "REASON_MISSING_EXPOSURE",
    "REASON_CASE_TRIMMED",
    "REASON_NO_CONTROLS",
    "select_referents",
    "build_matched_sets",
    "apply_trimming",
]

REASON_OUTSIDE_SEASON = "outside_season"
REASON_DUPLICATE_SUBJECT = "duplicate_subject"
REASON_UNKNOWN_ZONE = "unknown_zone"
REASON_MISSING_EXPOSURE = "missing_exposure"
REASON_CASE_TRIMMED = "case_trimmed"
REASON_NO_CONTROLS = "no_controls"


@dataclass(frozen=True)
class Event:
    """One subject's first qualifying event."""

    subject_id: str
    zone_id: str
    case_date: Date


@dataclass(frozen=True)
class DayRecord:
    """One day within a matched set, with its linked exposures."""

    date: Date
    is_case: bool
    temperature: float
    pm25_window: float


@dataclass(frozen=True)
class DroppedEvent:
    subject_id: str
    reason: str


@dataclass
class MatchedSet:
    """One case day plus its same-month same-weekday referent days."""

    subject_id: str
    rows: list[DayRecord]

    def __post_init__(self):
        cases = [r for r in self.rows if r.is_case]
        if len(cases) != 1:
            raise ConfigurationError(
                f"set {self.subject_id}: expected exactly one case row, got {len(cases)}"
            )
        case = cases[0]
        dates = [r.date for r in self.rows]
        if len(set(dates)) != len(dates):
            raise ConfigurationError(f"set {self.subject_id}: duplicate dates")
        for r in self.rows:
            if (r.date.year, r.date.month) != (case.date.year, case.date.month):
                raise ConfigurationError(
                    f"set {self.subject_id}: {r.date} not in the case month"
                )
            if r.date.weekday() != case.date.weekday():
                raise ConfigurationError(
                    f"set {self.subject_id}: {r.date} not on the case weekday"
                )
        n_controls = len(self.rows) - 1
        if not 1 <= n_controls <= 4:
            raise ConfigurationError(
                f"set {self.subject_id}: {n_controls} control rows (must be 1..4)"
            )

    @property
    def case_row(self) -> DayRecord:
        return next(r for r in self.rows if r.is_case)

    @property
    def control_rows(self) -> list[DayRecord]:
        return [r for r in self.rows if not r.is_case]


@dataclass
class TrimPolicy:
    """Pooled-quantile exclusion rule for extreme pm25 windows."""

    quantile: float = 0.95
    computed_threshold: float | None = None

    def __post_init__(self):
        if not 0.0 < self.quantile <= 1.0:
            raise ConfigurationError(f"trim quantile must be in (0, 1], got {self.quantile}")


def select_referents(case_date: Date) -> list[Date]:
    """All other dates in the case month sharing the case day-of-week.

    A weekday occurs 4 or 5 times in any Gregorian month, so the result has
    3 or 4 dates and never includes ``case_date`` itself.
    """
    n_days = calendar.monthrange(case_date.year, case_date.month)[1]
    wanted = case_date.weekday()
    out = []
    for day in range(1, n_days + 1):
        d = Date(case_date.year, case_date.month, day)
        if d.weekday() == wanted and d != case_date:
            out.append(d)
    return out


def build_matched_sets(
    events: list[Event],
    temperature_series: list[ExposureSeries] | dict[str, ExposureSeries],
    pm25_series: list[ExposureSeries] | dict[str, ExposureSeries],
    temperature_window: WindowSpec,
    pm25_window: WindowSpec,
    season_months: tuple[int, int] = (6, 9),
) -> tuple[list[MatchedSet], list[DroppedEvent]]:
    """Join events to windowed exposures, one matched set per retained event.

    Every input event is accounted for: it either yields a set or appears in
    the returned drop list with a reason code. Only a subject's first event
    (earliest case date) is kept.
    """
    lo, hi = season_months
    if not (1 <= lo <= hi <= 12):
        raise ConfigurationError(f"invalid season months {season_months}")
    temp_by_zone = _series_index(temperature_series)
    pm_by_zone = _series_index(pm25_series)

    first: dict[str, Event] = {}
    for ev in events:
        prev = first.get(ev.subject_id)
        if prev is None or ev.case_date < prev.case_date:
            first[ev.subject_id] = ev

    sets: list[MatchedSet] = []
    dropped: list[DroppedEvent] = []
    for ev in events:
        if first[ev.subject_id] is not ev:
            dropped.append(DroppedEvent(ev.subject_id, REASON_DUPLICATE_SUBJECT))
            continue
        if not lo <= ev.case_date.month <= hi:
            dropped.append(DroppedEvent(ev.subject_id, REASON_OUTSIDE_SEASON))
            continue
        temp = temp_by_zone.get(ev.zone_id)
        pm = pm_by_zone.get(ev.zone_id)
        if temp is None or pm is None:
            dropped.append(DroppedEvent(ev.subject_id, REASON_UNKNOWN_ZONE))
            continue
        days = sorted(select_referents(ev.case_date) + [ev.case_date])
        try:
            rows = [
                DayRecord(
                    date=d,
                    is_case=(d == ev.case_date),
                    temperature=windowed_exposure(temp, d, temperature_window),
                    pm25_window=windowed_exposure(pm, d, pm25_window),
                )
                for d in days
            ]
        except MissingDataError:
            dropped.append(DroppedEvent(ev.subject_id, REASON_MISSING_EXPOSURE))
            continue
        sets.append(MatchedSet(ev.subject_id, rows))
    return sets, dropped


def apply_trimming(
    sets: list[MatchedSet],
    policy: TrimPolicy,
) -> tuple[list[MatchedSet], TrimPolicy, list[DroppedEvent]]:
    """Remove day rows whose pm25 window exceeds the pooled quantile threshold.

    The threshold is the type-1 quantile of ``pm25_window`` pooled over all
    case AND control rows before any exclusion. Rows are trimmed
    individually; a set whose case row is trimmed dies, as does a set left
    without controls. Discarded sets are returned as drops.
    """
    if not sets:
        raise EmptyAnalysisError("no matched sets to trim")
    pooled = [r.pm25_window for s in sets for r in s.rows]
    threshold = type1_quantile(pooled, policy.quantile)
    fitted = replace(policy, computed_threshold=threshold)

    kept: list[MatchedSet] = []
    dropped: list[DroppedEvent] = []
    for s in sets:
        if s.case_row.pm25_window > threshold:
            dropped.append(DroppedEvent(s.subject_id, REASON_CASE_TRIMMED))
            continue
        rows = [r for r in s.rows if r.pm25_window <= threshold]
        if len(rows) < 2:
            dropped.append(DroppedEvent(s.subject_id, REASON_NO_CONTROLS))
            continue
        kept.append(MatchedSet(s.subject_id, rows))
    if not kept:
        raise EmptyAnalysisError(
            f"trimming at quantile {policy.quantile} (threshold {threshold}) discarded every set"
        )
    return kept, fitted, dropped


def _series_index(series) -> dict[str, ExposureSeries]:
    if isinstance(series, dict):
        return series
    out: dict[str, ExposureSeries] = {}
    for s in series:
        if s.zone_id in out:
            raise ConfigurationError(f"duplicate series for zone {s.zone_id}")
        out[s.zone_id] = s
    return out
