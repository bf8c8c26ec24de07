"""CSV and JSON readers/writers for every file format the pipeline touches.

Floats are serialized with ``repr`` (shortest round-trip form) and files are
written with ``\\n`` line endings, so identical analyses produce
byte-identical artifacts.
"""

from __future__ import annotations

import csv
import json
from datetime import date as Date
from pathlib import Path

from .design import DroppedEvent, Event, MatchedSet
from .errors import ConfigurationError
from .exposure import ExposureSeries, GridCell, Zone

__all__ = [
    "read_grid_cells",
    "read_zones",
    "read_membership",
    "read_daily_field",
    "read_events",
    "write_series",
    "write_matched_sets",
    "write_drop_log",
    "write_coefficients",
    "write_draws",
    "write_contrasts",
    "write_effect_table",
    "write_rows",
    "write_json",
]


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _open_reader(path, expected: list[str]):
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file not found: {path}")
    handle = path.open(newline="")
    reader = csv.reader(handle)
    header = next(reader, None)
    if header != expected:
        handle.close()
        raise ConfigurationError(
            f"{path}: expected header {expected}, got {header}"
        )
    return handle, reader


def write_rows(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_grid_cells(path) -> list[GridCell]:
    handle, reader = _open_reader(path, ["cell_id", "lat", "lon"])
    with handle:
        return [GridCell(r[0], float(r[1]), float(r[2])) for r in reader]


def read_zones(path, membership: dict[str, set[str]] | None = None) -> list[Zone]:
    handle, reader = _open_reader(path, ["zone_id", "lat", "lon"])
    membership = membership or {}
    with handle:
        return [
            Zone(r[0], float(r[1]), float(r[2]), frozenset(membership.get(r[0], set())))
            for r in reader
        ]


def read_membership(path) -> dict[str, set[str]]:
    handle, reader = _open_reader(path, ["zone_id", "cell_id"])
    out: dict[str, set[str]] = {}
    with handle:
        for r in reader:
            out.setdefault(r[0], set()).add(r[1])
    return out


def read_daily_field(path) -> dict[tuple[str, Date], float]:
    handle, reader = _open_reader(path, ["cell_id", "date", "value"])
    out: dict[tuple[str, Date], float] = {}
    with handle:
        for r in reader:
            key = (r[0], Date.fromisoformat(r[1]))
            if key in out:
                raise ConfigurationError(f"{path}: duplicate value for {key}")
            out[key] = float(r[2])
    return out


def read_events(path) -> list[Event]:
    handle, reader = _open_reader(path, ["subject_id", "zone_id", "case_date"])
    with handle:
        return [Event(r[0], r[1], Date.fromisoformat(r[2])) for r in reader]


def write_series(path, series: list[ExposureSeries]) -> None:
    rows = []
    for s in series:
        for day in sorted(s.values):
            rows.append((s.zone_id, day.isoformat(), s.exposure_kind, s.values[day]))
    write_rows(path, ["zone_id", "date", "exposure_kind", "value"], rows)


def write_matched_sets(path, sets: list[MatchedSet]) -> None:
    rows = [
        (s.subject_id, r.date.isoformat(), r.is_case, r.temperature, r.pm25_window)
        for s in sets
        for r in s.rows
    ]
    write_rows(path, ["subject_id", "date", "is_case", "temperature", "pm25_window"], rows)


def write_drop_log(path, drops: list[DroppedEvent]) -> None:
    write_rows(path, ["subject_id", "reason"], [(d.subject_id, d.reason) for d in drops])


def write_coefficients(path, labels, estimates, sds) -> None:
    rows = [(lab, float(est), float(sd)) for lab, est, sd in zip(labels, estimates, sds)]
    write_rows(path, ["label", "estimate", "sd"], rows)


def write_draws(path, labels, draws) -> None:
    write_rows(path, list(labels), ([float(v) for v in row] for row in draws))


def write_contrasts(path, estimates) -> None:
    rows = [
        (e.name, e.point, e.interval[0], e.interval[1], e.extrapolated)
        for e in estimates
    ]
    write_rows(path, ["name", "point", "lo95", "hi95", "extrapolated"], rows)


def write_effect_table(path, table: list[dict]) -> None:
    rows = [(r["t"], r["a"], r["or"], r["lo95"], r["hi95"]) for r in table]
    write_rows(path, ["t", "a", "or", "lo95", "hi95"], rows)


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
