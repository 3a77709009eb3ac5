"""Event frames and the per-topic daily count series built from them.

Frames arrive already text-mined: each carries a normalized disease label,
a country key, the article language and a download timestamp.  Everything
downstream works on calendar-day counts per (disease, country) topic.
"""
from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Iterator, NamedTuple, Sequence

# ISO-639-1 codes of the 13 news languages.
LANGUAGES: frozenset[str] = frozenset(
    ["ar", "zh", "nl", "en", "fr", "de", "it", "ko", "pt", "ru", "es", "vi", "th"]
)

CSV_COLUMNS = ("disease", "country", "province", "language", "timestamp")


class EventParseError(ValueError):
    """A single unparseable input line."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


class SeriesMismatchError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class TopicKey:
    """A country-disease topic.  Both keys are case-folded on construction."""

    disease: str
    country: str

    def __post_init__(self):
        object.__setattr__(self, "disease", self.disease.strip().casefold())
        object.__setattr__(self, "country", self.country.strip().casefold())

    def __str__(self) -> str:
        return f"{self.disease}/{self.country}"


@dataclass(frozen=True)
class DayRange:
    """Inclusive range of calendar days."""

    start: date
    end: date

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"empty day range {self.start}..{self.end}")

    def __len__(self) -> int:
        return (self.end - self.start).days + 1

    def __iter__(self) -> Iterator[date]:
        for i in range(len(self)):
            yield self.start + timedelta(days=i)

    def __contains__(self, day: object) -> bool:
        return isinstance(day, date) and self.start <= day <= self.end

    def index(self, day: date) -> int:
        if day not in self:
            raise ValueError(f"{day} outside {self.start}..{self.end}")
        return (day - self.start).days


@dataclass(frozen=True)
class EventFrame:
    disease: str
    country: str
    language: str
    observed_day: date
    province: str | None = None

    @property
    def topic(self) -> TopicKey:
        return TopicKey(self.disease, self.country)


@dataclass(frozen=True)
class CountSeries:
    """Daily event counts for one topic, one entry per consecutive day."""

    topic: TopicKey
    start_day: date
    counts: tuple[int, ...]
    languages: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        object.__setattr__(self, "languages", frozenset(self.languages))
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def day_range(self) -> DayRange:
        return DayRange(self.start_day, self.start_day + timedelta(days=len(self.counts) - 1))

    def day(self, index: int) -> date:
        return self.start_day + timedelta(days=index)

    def weekend_flags(self) -> list[bool]:
        return [self.day(i).weekday() >= 5 for i in range(len(self.counts))]


class FrameIssue(NamedTuple):
    line_no: int
    message: str


def _parse_day(stamp: str) -> date:
    stamp = stamp.strip()
    if stamp.endswith(("Z", "z")):
        stamp = stamp[:-1] + "+00:00"
    parsed = datetime.fromisoformat(stamp)
    if parsed.tzinfo is not None:
        parsed = parsed.astimezone(timezone.utc)
    return parsed.date()


def _build_frame(fields: dict, languages: frozenset[str], day_range: DayRange | None) -> EventFrame:
    try:
        disease = fields["disease"]
        country = fields["country"]
        language = fields["language"]
        stamp = fields["timestamp"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from None
    for name, value in (("disease", disease), ("country", country), ("language", language)):
        if not isinstance(value, str) or not value.strip():
            raise ValueError(f"field {name!r} must be a non-empty string")
    if not isinstance(stamp, str):
        raise ValueError("timestamp must be an ISO-8601 string")
    language = language.strip().lower()
    if language not in languages:
        raise ValueError(f"unknown language code {language!r}")
    try:
        day = _parse_day(stamp)
    except ValueError:
        raise ValueError(f"bad timestamp {stamp!r}") from None
    if day_range is not None and day not in day_range:
        raise ValueError(f"day {day} outside trial range {day_range.start}..{day_range.end}")
    province = fields.get("province") or None
    return EventFrame(
        disease=disease.strip().casefold(),
        country=country.strip().casefold(),
        language=language,
        observed_day=day,
        province=province,
    )


def parse_event_frames(
    stream: Iterable[str],
    format: str = "ndjson",
    languages: Iterable[str] = LANGUAGES,
    day_range: DayRange | None = None,
) -> tuple[list[EventFrame], list[FrameIssue]]:
    """Parse event frames from NDJSON or CSV lines.

    Bad lines do not stop parsing; each one is reported as a ``FrameIssue``
    with its 1-based line number alongside the frames that did parse.
    """
    if format not in ("ndjson", "csv"):
        raise ValueError(f"unsupported event format {format!r}")
    allowed = frozenset(languages)
    frames: list[EventFrame] = []
    issues: list[FrameIssue] = []

    if format == "ndjson":
        rows: Iterable[tuple[int, object]] = _ndjson_rows(stream)
    else:
        rows = _csv_rows(stream)

    for line_no, row in rows:
        if isinstance(row, FrameIssue):
            issues.append(row)
            continue
        try:
            frames.append(_build_frame(row, allowed, day_range))
        except ValueError as exc:
            issues.append(FrameIssue(line_no, str(exc)))
    return frames, issues


def _ndjson_rows(stream: Iterable[str]):
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, FrameIssue(line_no, f"invalid JSON: {exc.msg}")
            continue
        if not isinstance(obj, dict):
            yield line_no, FrameIssue(line_no, "expected a JSON object")
            continue
        yield line_no, obj


def _csv_rows(stream: Iterable[str]):
    lines = list(stream)
    for line_no, row in enumerate(csv.reader(lines), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if line_no == 1 and row[0].strip().lower() == "disease":
            continue
        if len(row) != len(CSV_COLUMNS):
            yield line_no, FrameIssue(
                line_no, f"expected {len(CSV_COLUMNS)} columns, got {len(row)}"
            )
            continue
        yield line_no, dict(zip(CSV_COLUMNS, row))


def frames_to_ndjson(frames: Iterable[EventFrame]) -> str:
    out = []
    for f in frames:
        obj = {
            "disease": f.disease,
            "country": f.country,
            "language": f.language,
            "timestamp": f.observed_day.isoformat(),
        }
        if f.province:
            obj["province"] = f.province
        out.append(json.dumps(obj, sort_keys=True))
    return "".join(line + "\n" for line in out)


def bucket_counts(
    frames: Iterable[EventFrame],
    topic: TopicKey,
    languages: Iterable[str],
    day_range: DayRange,
) -> CountSeries:
    langs = frozenset(languages)
    counts = [0] * len(day_range)
    for f in frames:
        if f.language in langs and f.topic == topic and f.observed_day in day_range:
            counts[day_range.index(f.observed_day)] += 1
    return CountSeries(topic, day_range.start, tuple(counts), langs)


def bucket_by_language(
    frames: Iterable[EventFrame], day_range: DayRange
) -> dict[tuple[TopicKey, str], CountSeries]:
    """Single-pass bucketing of every (topic, language) pair seen in ``frames``."""
    tally = Counter(
        (f.topic, f.language, f.observed_day) for f in frames if f.observed_day in day_range
    )
    out: dict[tuple[TopicKey, str], list[int]] = {}
    for (topic, lang, day), n in tally.items():
        counts = out.setdefault((topic, lang), [0] * len(day_range))
        counts[day_range.index(day)] += n
    return {
        key: CountSeries(key[0], day_range.start, tuple(c), frozenset([key[1]]))
        for key, c in sorted(out.items())
    }


def aggregate_languages(series_list: Sequence[CountSeries]) -> CountSeries:
    """Element-wise sum of per-language series for the same topic and days."""
    if not series_list:
        raise SeriesMismatchError("nothing to aggregate")
    first = series_list[0]
    for s in series_list[1:]:
        if s.topic != first.topic:
            raise SeriesMismatchError(f"topic mismatch: {s.topic} vs {first.topic}")
        if s.start_day != first.start_day or len(s) != len(first):
            raise SeriesMismatchError(f"day range mismatch for {s.topic}")
    counts = [sum(col) for col in zip(*(s.counts for s in series_list))]
    langs = frozenset().union(*(s.languages for s in series_list))
    return CountSeries(first.topic, first.start_day, tuple(counts), langs)


def purge_singletons(series: CountSeries) -> CountSeries:
    # days with exactly one report are treated as noise
    return replace(series, counts=tuple(0 if c == 1 else c for c in series.counts))
