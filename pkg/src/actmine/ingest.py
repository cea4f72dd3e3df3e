"""Parsing, cleaning, and discretization of raw activity/travel records.

Raw files carry the provider codebook (0-home, 1-travel, 2-work/study,
3-other); all analysis runs on the remapped codes 0-other, 1-home, 2-work,
3-trip, so the remap happens once at this boundary. Cleaning applies a
fixed rule order and reports per-rule counts; series construction snaps
records onto a fixed-granularity bin grid with carry-forward gap filling
so every person yields a sequence of identical length.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date as date_type
from datetime import datetime, time, timedelta

import numpy as np

from .errors import SchemaError

__all__ = [
    "ActivityRecord",
    "PersonProfile",
    "CategorizedSeries",
    "CleaningConfig",
    "CleaningReport",
    "ParseResult",
    "RowError",
    "parse_activity_records",
    "parse_profiles",
    "remap_ptype",
    "unmap_ptype",
    "clean",
    "build_series",
    "resample",
    "haversine_km",
]

ACTIVITY_COLUMNS = ("pid", "date", "t_start", "t_end", "longitude", "latitude", "ptype")
PROFILE_COLUMNS = ("pid", "age", "gender", "arpu", "brand")
TIMESTAMP_FMT = "%Y-%m-%d %H:%M"

# analysis activity codes
CODE_OTHER, CODE_HOME, CODE_WORK, CODE_TRIP = 0, 1, 2, 3

_RAW_TRAVEL = 1
_RAW_TO_ANALYSIS = {0: CODE_HOME, 1: CODE_TRIP, 2: CODE_WORK, 3: CODE_OTHER}
_ANALYSIS_TO_RAW = {v: k for k, v in _RAW_TO_ANALYSIS.items()}

_GENDER_CODES = {"01": "male", "02": "female", "03": "unknown"}

_NIGHT_END_HOUR = 6


@dataclass(frozen=True)
class ActivityRecord:
    pid: str
    date: date_type
    t_start: datetime
    t_end: datetime
    longitude: float
    latitude: float
    ptype: int

    @property
    def duration_minutes(self) -> float:
        return (self.t_end - self.t_start).total_seconds() / 60.0


@dataclass(frozen=True)
class PersonProfile:
    pid: str
    age_group: str
    gender: str  # male / female / unknown
    arpu: float | None
    brand: str


@dataclass(frozen=True)
class CategorizedSeries:
    """One person's fixed-granularity activity-code sequence."""

    pid: str
    start: datetime
    granularity: int  # bin length, minutes
    values: np.ndarray
    coverage: float

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size and (v.min() < 0 or v.max() > 3):
            raise ValueError("activity codes must lie in {0,1,2,3}")
        if not 0.0 <= self.coverage <= 1.0 + 1e-12:
            raise ValueError("coverage must lie in [0, 1]")


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    records: list
    errors: list[RowError] = field(default_factory=list)


@dataclass(frozen=True)
class CleaningConfig:
    max_speed_kmh: float = 150.0
    min_days: int = 20
    home_night_share: float = 0.6
    min_coverage: float = 0.8


@dataclass
class CleaningReport:
    input_users: int
    retained_users: int
    records_dropped: dict = field(default_factory=dict)
    users_dropped: dict = field(default_factory=dict)

    def drop_users(self, rule: str, count: int) -> None:
        self.users_dropped[rule] = self.users_dropped.get(rule, 0) + count
        self.retained_users -= count

    def check(self) -> None:
        if self.retained_users + sum(self.users_dropped.values()) != self.input_users:
            raise ValueError("cleaning report does not balance")

    def to_dict(self) -> dict:
        return {
            "input_users": self.input_users,
            "retained_users": self.retained_users,
            "records_dropped": dict(self.records_dropped),
            "users_dropped": dict(self.users_dropped),
        }


def remap_ptype(raw: int) -> int:
    """File codebook -> analysis code (0-home becomes 1-home etc.); bijective."""
    try:
        return _RAW_TO_ANALYSIS[raw]
    except KeyError:
        raise ValueError(f"unknown raw activity code {raw!r}") from None


def unmap_ptype(code: int) -> int:
    """Inverse of :func:`remap_ptype`, used when emitting file-format rows."""
    try:
        return _ANALYSIS_TO_RAW[code]
    except KeyError:
        raise ValueError(f"unknown analysis activity code {code!r}") from None


def _header_indices(header: list[str], required) -> dict[str, int]:
    cols = [h.strip() for h in header]
    index = {}
    for name in required:
        if name not in cols:
            raise SchemaError(f"missing column {name!r}")
        index[name] = cols.index(name)
    return index


def parse_activity_records(text: str) -> ParseResult:
    """Parse activities CSV content; malformed rows are collected, not dropped
    silently, and never abort the parse."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: missing header row") from None
    idx = _header_indices(header, ACTIVITY_COLUMNS)

    result = ParseResult(records=[])
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            pid = row[idx["pid"]].strip()
            if not pid:
                raise ValueError("empty pid")
            rec_date = datetime.strptime(row[idx["date"]].strip(), "%Y-%m-%d").date()
            t_start = datetime.strptime(row[idx["t_start"]].strip(), TIMESTAMP_FMT)
            t_end = datetime.strptime(row[idx["t_end"]].strip(), TIMESTAMP_FMT)
            lon = float(row[idx["longitude"]])
            lat = float(row[idx["latitude"]])
            ptype = int(row[idx["ptype"]])
        except (ValueError, IndexError) as exc:
            result.errors.append(RowError(line_no, f"unparsable row: {exc}"))
            continue
        if t_end <= t_start:
            result.errors.append(RowError(line_no, "t_end must be after t_start"))
            continue
        if not -180.0 <= lon <= 180.0 or not -90.0 <= lat <= 90.0:
            result.errors.append(RowError(line_no, "coordinates out of range"))
            continue
        if ptype not in (0, 1, 2, 3):
            result.errors.append(RowError(line_no, f"activity code {ptype} out of range"))
            continue
        result.records.append(
            ActivityRecord(pid, rec_date, t_start, t_end, lon, lat, ptype)
        )
    return result


def parse_profiles(text: str) -> ParseResult:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: missing header row") from None
    idx = _header_indices(header, PROFILE_COLUMNS)

    result = ParseResult(records=[])
    seen: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            pid = row[idx["pid"]].strip()
            if not pid:
                raise ValueError("empty pid")
            if pid in seen:
                raise ValueError(f"duplicate pid {pid!r}")
            arpu_text = row[idx["arpu"]].strip()
            arpu = float(arpu_text) if arpu_text else None
        except (ValueError, IndexError) as exc:
            result.errors.append(RowError(line_no, f"unparsable row: {exc}"))
            continue
        if arpu is not None and arpu < 0:
            result.errors.append(RowError(line_no, "arpu must be >= 0"))
            continue
        seen.add(pid)
        result.records.append(
            PersonProfile(
                pid=pid,
                age_group=row[idx["age"]].strip(),
                gender=_GENDER_CODES.get(row[idx["gender"]].strip(), "unknown"),
                arpu=arpu,
                brand=row[idx["brand"]].strip(),
            )
        )
    return result


def haversine_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance in kilometers."""
    r = 6371.0088
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * r * math.asin(math.sqrt(a))


def _resolve_overlapping_stays(stays: list[ActivityRecord]) -> tuple[list[ActivityRecord], int]:
    kept: list[ActivityRecord] = []
    dropped = 0
    for s in sorted(stays, key=lambda r: (r.t_start, r.t_end)):
        if kept and s.t_start < kept[-1].t_end:
            if s.duration_minutes > kept[-1].duration_minutes:
                kept[-1] = s
            dropped += 1
        else:
            kept.append(s)
    return kept, dropped


def _speeding_trip_keys(stays: list[ActivityRecord], trips: list[ActivityRecord],
                        max_speed_kmh: float) -> set[int]:
    """Indices (into trips) of trips implied faster than the cap."""
    doomed: set[int] = set()
    ordered = sorted(stays, key=lambda r: (r.t_start, r.t_end))
    for a, b in zip(ordered, ordered[1:]):
        gap_h = (b.t_start - a.t_end).total_seconds() / 3600.0
        if gap_h <= 0:
            continue
        dist = haversine_km(a.longitude, a.latitude, b.longitude, b.latitude)
        if dist / gap_h > max_speed_kmh:
            for i, t in enumerate(trips):
                if t.t_start >= a.t_end and t.t_end <= b.t_start:
                    doomed.add(i)
    return doomed


def _night_anchor_share(stays: list[ActivityRecord]) -> float:
    """Share of observed nights spent at the modal 00:00-06:00 location."""
    nights: dict[date_type, tuple[float, datetime, tuple[float, float]]] = {}
    for s in stays:
        day = s.t_start.date()
        last = s.t_end.date()
        while day <= last:
            night_start = datetime.combine(day, time(0))
            night_end = night_start + timedelta(hours=_NIGHT_END_HOUR)
            overlap = (min(s.t_end, night_end) - max(s.t_start, night_start)).total_seconds()
            if overlap > 0:
                cand = (-overlap, s.t_start, (s.longitude, s.latitude))
                if day not in nights or cand < nights[day]:
                    nights[day] = cand
            day += timedelta(days=1)
    if not nights:
        return 0.0
    counts = Counter(loc for _, _, loc in nights.values())
    modal = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return modal[1] / len(nights)


def clean(
    records: list[ActivityRecord],
    profiles: list[PersonProfile] | None = None,
    config: CleaningConfig | None = None,
) -> tuple[list[ActivityRecord], list[PersonProfile], CleaningReport]:
    """Apply the cleaning rules in their fixed order and count each drop.

    Order: exact duplicates, overlapping stays (keep the longer), trips
    implying impossible speeds, users seen on too few distinct days, users
    without a stable night anchor. Cleaning is total and idempotent.
    """
    cfg = config or CleaningConfig()
    profiles = profiles or []
    input_users = len({r.pid for r in records})
    report = CleaningReport(input_users=input_users, retained_users=input_users)

    # duplicates
    seen: set[tuple] = set()
    uniq: list[ActivityRecord] = []
    dup = 0
    for r in sorted(records, key=lambda r: (r.pid, r.t_start, r.t_end, r.ptype)):
        key = (r.pid, r.date, r.t_start, r.t_end, r.longitude, r.latitude, r.ptype)
        if key in seen:
            dup += 1
        else:
            seen.add(key)
            uniq.append(r)
    report.records_dropped["duplicates"] = dup

    by_pid: dict[str, list[ActivityRecord]] = {}
    for r in uniq:
        by_pid.setdefault(r.pid, []).append(r)

    overlap_drops = 0
    speed_drops = 0
    cleaned: dict[str, list[ActivityRecord]] = {}
    for pid in sorted(by_pid):
        recs = by_pid[pid]
        stays = [r for r in recs if r.ptype != _RAW_TRAVEL]
        trips = sorted((r for r in recs if r.ptype == _RAW_TRAVEL),
                       key=lambda r: (r.t_start, r.t_end))
        stays, n_over = _resolve_overlapping_stays(stays)
        overlap_drops += n_over
        doomed = _speeding_trip_keys(stays, trips, cfg.max_speed_kmh)
        speed_drops += len(doomed)
        trips = [t for i, t in enumerate(trips) if i not in doomed]
        cleaned[pid] = sorted(stays + trips, key=lambda r: (r.t_start, r.t_end))
    report.records_dropped["overlaps"] = overlap_drops
    report.records_dropped["speeding_trips"] = speed_drops

    few_days = 0
    no_anchor = 0
    retained: dict[str, list[ActivityRecord]] = {}
    for pid in sorted(cleaned):
        recs = cleaned[pid]
        if len({r.date for r in recs}) < cfg.min_days:
            few_days += 1
            continue
        stays = [r for r in recs if r.ptype != _RAW_TRAVEL]
        if _night_anchor_share(stays) < cfg.home_night_share:
            no_anchor += 1
            continue
        retained[pid] = recs
    if few_days:
        report.drop_users("min_days", few_days)
    if no_anchor:
        report.drop_users("no_night_anchor", no_anchor)

    out_records = [r for pid in sorted(retained) for r in retained[pid]]
    out_profiles = [p for p in profiles if p.pid in retained]
    report.check()
    return out_records, out_profiles, report


def _covered_bins(start_min: int, end_min: int, granularity: int, n_bins: int):
    """Bin indices whose midpoints fall inside [start_min, end_min)."""
    two_g = 2 * granularity
    lo = -((-(2 * start_min - granularity)) // two_g)  # ceil division
    hi = -((-(2 * end_min - granularity)) // two_g) - 1
    return max(lo, 0), min(hi, n_bins - 1)


def build_series(
    records: list[ActivityRecord],
    window_start: datetime,
    days: int,
    granularity: int,
) -> CategorizedSeries:
    """Discretize one person's remapped records onto the bin grid.

    Each bin takes the code of the record covering its midpoint (later
    starts win where records touch); uncovered bins inherit the preceding
    observed code, and leading gaps take the first observed code.
    """
    if not records:
        raise ValueError("empty person: no records supplied")
    pid = records[0].pid
    if any(r.pid != pid for r in records):
        raise ValueError("build_series expects records of a single person")
    total_minutes = days * 1440
    if granularity <= 0 or total_minutes % granularity:
        raise ValueError("window is not aligned to the granularity")
    n_bins = total_minutes // granularity

    codes = np.full(n_bins, -1, dtype=np.int16)
    for r in sorted(records, key=lambda r: (r.t_start, r.t_end)):
        rs = round((r.t_start - window_start).total_seconds() / 60.0)
        re = round((r.t_end - window_start).total_seconds() / 60.0)
        lo, hi = _covered_bins(rs, re, granularity, n_bins)
        if lo <= hi:
            codes[lo : hi + 1] = r.ptype

    observed = codes >= 0
    if not observed.any():
        raise ValueError(f"empty person: no records of {pid!r} fall in the window")
    obs_positions = np.where(observed, np.arange(n_bins), -1)
    carried = np.maximum.accumulate(obs_positions)
    first = int(np.flatnonzero(observed)[0])
    carried[carried < 0] = first
    values = codes[carried].astype(np.uint8)
    return CategorizedSeries(
        pid=pid,
        start=window_start,
        granularity=granularity,
        values=values,
        coverage=float(observed.mean()),
    )


def resample(series: CategorizedSeries, factor: int) -> CategorizedSeries:
    """Coarsen by majority vote per block; ties prefer trip > work > home > other
    so rare informative states survive."""
    if factor < 1:
        raise ValueError("resample factor must be a positive integer")
    values = np.asarray(series.values)
    if values.size % factor:
        raise ValueError(f"factor {factor} does not divide the series length {values.size}")
    if factor == 1:
        return CategorizedSeries(series.pid, series.start, series.granularity,
                                 values.copy(), series.coverage)
    blocks = values.reshape(-1, factor)
    counts = np.stack([(blocks == c).sum(axis=1) for c in range(4)], axis=1)
    # argmax on the reversed columns makes ties resolve to the higher code
    winners = 3 - np.argmax(counts[:, ::-1], axis=1)
    return CategorizedSeries(
        pid=series.pid,
        start=series.start,
        granularity=series.granularity * factor,
        values=winners.astype(np.uint8),
        coverage=series.coverage,
    )
