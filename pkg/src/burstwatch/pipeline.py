"""Run manifests and the ingest -> detect -> evaluate pipeline behind the CLI."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .alertfeed import AlertRecord, emit_alerts
from .detectors import AlarmSeries, DetectorConfig, MODELS, run_detector
from .evaluation import (
    EvalResult,
    SilverReport,
    evaluate_alarms,
    read_silver_csv,
)
from .events import (
    LANGUAGES,
    CountSeries,
    DayRange,
    EventFrame,
    TopicKey,
    aggregate_languages,
    bucket_by_language,
    parse_event_frames,
    purge_singletons,
)

log = logging.getLogger(__name__)


class ManifestError(ValueError):
    """Bad manifest content or flag combination (usage error)."""


class DataError(Exception):
    """Unreadable or malformed input data."""


def _parse_langs(value) -> frozenset[str]:
    if value in ("*", "all", None):
        return LANGUAGES
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    langs = frozenset(v.strip().lower() for v in value)
    bad = langs - LANGUAGES
    if bad or not langs:
        raise ManifestError(f"unknown or empty language set: {sorted(bad) or '[]'}")
    return langs


def _unique_labels(configs: list[DetectorConfig]) -> list[DetectorConfig]:
    seen: dict[str, int] = {}
    for c in configs:
        seen[c.model] = seen.get(c.model, 0) + 1
    out = []
    for c in configs:
        if c.name is None and seen[c.model] > 1:
            c = replace(c, name=f"{c.model}@{c.threshold:g}")
        out.append(c)
    labels = [c.label for c in out]
    if len(set(labels)) != len(labels):
        raise ManifestError(f"duplicate detector labels: {labels}")
    return out


@dataclass
class RunManifest:
    events: Path | None = None
    events_format: str = "ndjson"
    silver: Path | None = None
    alarms: Path | None = None
    start: date | None = None
    end: date | None = None
    topics: list[TopicKey] | None = None
    strata: dict[str, frozenset[str]] = field(default_factory=lambda: {"all": LANGUAGES})
    detectors: list[DetectorConfig] = field(
        default_factory=lambda: [DetectorConfig.paper_default(m) for m in MODELS]
    )
    purge_singletons: bool = True
    output_dir: Path = Path("out")
    jobs: int = 1

    def __post_init__(self):
        if not self.detectors:
            raise ManifestError("at least one detector config is required")
        self.detectors = _unique_labels(list(self.detectors))
        if self.start and self.end and self.end < self.start:
            raise ManifestError(f"empty date range {self.start}..{self.end}")
        if not self.strata:
            raise ManifestError("at least one language stratum is required")
        if self.events_format not in ("ndjson", "csv"):
            raise ManifestError(f"events_format must be ndjson or csv, got {self.events_format!r}")
        if self.jobs < 1:
            raise ManifestError("jobs must be >= 1")

    @classmethod
    def from_dict(cls, d: Mapping, base_dir: Path = Path(".")) -> "RunManifest":
        d = dict(d)
        known = {
            "events", "events_format", "silver", "alarms", "start", "end", "topics",
            "strata", "detectors", "purge_singletons", "output_dir", "jobs",
        }
        unknown = set(d) - known
        if unknown:
            raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")
        kw: dict = {}
        for key in ("events", "silver", "alarms", "output_dir"):
            if d.get(key) is not None:
                kw[key] = base_dir / d[key]
        for key in ("start", "end"):
            if d.get(key) is not None:
                try:
                    kw[key] = date.fromisoformat(d[key])
                except (TypeError, ValueError):
                    raise ManifestError(f"bad {key} date {d[key]!r}") from None
        if d.get("topics") is not None:
            kw["topics"] = [TopicKey(t[0], t[1]) for t in d["topics"]]
        if d.get("strata") is not None:
            kw["strata"] = {name: _parse_langs(v) for name, v in d["strata"].items()}
        if d.get("detectors") is not None:
            try:
                kw["detectors"] = [DetectorConfig.from_dict(c) for c in d["detectors"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestError(f"bad detector config: {exc}") from None
        for key in ("events_format", "purge_singletons", "jobs"):
            if key in d:
                kw[key] = d[key]
        return cls(**kw)

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise DataError(f"{path}: manifest not found") from None
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:{exc.lineno}: invalid JSON manifest: {exc.msg}") from None
        return cls.from_dict(d, Path(path).parent)

    def to_dict(self) -> dict:
        return {
            "events": str(self.events) if self.events else None,
            "events_format": self.events_format,
            "silver": str(self.silver) if self.silver else None,
            "start": self.start.isoformat() if self.start else None,
            "end": self.end.isoformat() if self.end else None,
            "strata": {k: sorted(v) for k, v in self.strata.items()},
            "detectors": [c.to_dict() for c in self.detectors],
            "purge_singletons": self.purge_singletons,
            "output_dir": str(self.output_dir),
        }


@dataclass
class Stream:
    """One topic's detector input plus the per-language parts it was summed from."""

    series: CountSeries
    per_language: dict[str, CountSeries]
    reports: list[SilverReport]


def load_events(m: RunManifest, skip_bad_lines: bool = False) -> list[EventFrame]:
    if m.events is None:
        raise ManifestError("no events file given")
    try:
        with open(m.events, encoding="utf-8") as fh:
            frames, issues = parse_event_frames(fh, m.events_format)
    except FileNotFoundError:
        raise DataError(f"{m.events}: no such file") from None
    except OSError as exc:
        raise DataError(f"{m.events}: {exc}") from None
    if issues:
        msg = "\n".join(f"{m.events}:{i.line_no}: {i.message}" for i in issues)
        if not skip_bad_lines:
            raise DataError(msg)
        log.warning("skipped %d bad event lines\n%s", len(issues), msg)
    return frames


def load_silver(m: RunManifest) -> list[SilverReport]:
    if m.silver is None:
        return []
    try:
        with open(m.silver, encoding="utf-8") as fh:
            return read_silver_csv(fh)
    except FileNotFoundError:
        raise DataError(f"{m.silver}: no such file") from None
    except ValueError as exc:
        raise DataError(f"{m.silver}: {exc}") from None


def resolve_range(m: RunManifest, frames: Sequence[EventFrame]) -> DayRange | None:
    """Manifest dates, falling back to the span of the event days."""
    days = [f.observed_day for f in frames]
    start = m.start or (min(days) if days else None)
    end = m.end or (max(days) if days else None)
    if start is None or end is None:
        return None
    if end < start:
        raise ManifestError(f"empty date range {start}..{end}")
    return DayRange(start, end)


def build_streams(
    frames: Sequence[EventFrame],
    reports: Sequence[SilverReport],
    day_range: DayRange,
    languages: Iterable[str],
    topics: Sequence[TopicKey] | None = None,
    purge: bool = True,
    warnings: list[str] | None = None,
) -> list[Stream]:
    """Per-topic detector inputs for one language stratum, sorted by topic.

    Silver topics with no events, and reports outside the range, are dropped
    with a warning.
    """
    warnings = warnings if warnings is not None else []
    langs = frozenset(languages)
    buckets = bucket_by_language(frames, day_range)
    if topics is None:
        topics = sorted({f.topic for f in frames})
    topic_set = set(topics)
    for t in sorted({r.topic for r in reports} - topic_set):
        warnings.append(f"silver topic {t} has no event stream; skipped")

    by_topic: dict[TopicKey, list[SilverReport]] = {}
    for r in sorted(reports):
        if r.topic not in topic_set:
            continue
        if r.report_day not in day_range:
            warnings.append(f"silver report {r.topic} {r.report_day} outside range; skipped")
            continue
        by_topic.setdefault(r.topic, []).append(r)

    zeros = (0,) * len(day_range)
    streams = []
    for topic in sorted(topics):
        parts = {
            lang: buckets.get((topic, lang), CountSeries(topic, day_range.start, zeros, {lang}))
            for lang in sorted(langs)
        }
        series = aggregate_languages(list(parts.values()))
        if purge:
            series = purge_singletons(series)
        streams.append(Stream(series, parts, by_topic.get(topic, [])))
    return streams


def _map(fn, items, jobs: int):
    # executor.map preserves input order, so output ordering never depends on scheduling
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def detect_streams(
    streams: Sequence[Stream], configs: Sequence[DetectorConfig], jobs: int = 1
) -> list[tuple[DetectorConfig, Stream, AlarmSeries]]:
    tasks = [(cfg, s) for cfg in configs for s in streams]
    alarms = _map(lambda task: run_detector(task[1].series, task[0]), tasks, jobs)
    return [(cfg, s, a) for (cfg, s), a in zip(tasks, alarms)]


def alarms_to_rows(stratum: str, alarms: AlarmSeries) -> list[dict]:
    return [
        {
            "stratum": stratum,
            "disease": alarms.topic.disease,
            "country": alarms.topic.country,
            "model": alarms.model,
            "threshold": alarms.threshold,
            "day": rec.day.isoformat(),
            "statistic": rec.statistic,
            "alarm": rec.alarm,
        }
        for rec in alarms.records()
    ]


def read_alarm_rows(lines: Iterable[str], source: str = "<alarms>") -> dict[tuple[str, str], list[AlarmSeries]]:
    """Rebuild alarm series from NDJSON rows, keyed by (stratum, model label)."""
    grouped: dict[tuple[str, str, TopicKey], list[dict]] = {}
    meta: dict[tuple[str, str, TopicKey], float] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            key = (row["stratum"], row["model"], TopicKey(row["disease"], row["country"]))
            row["day"] = date.fromisoformat(row["day"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{source}:{line_no}: bad alarm row ({exc})") from None
        grouped.setdefault(key, []).append(row)
        meta[key] = float(row["threshold"])
    out: dict[tuple[str, str], list[AlarmSeries]] = {}
    # keep file order so staged reports list models like the run that wrote them
    for key in grouped:
        rows = sorted(grouped[key], key=lambda r: r["day"])
        start = rows[0]["day"]
        for i, r in enumerate(rows):
            if (r["day"] - start).days != i:
                raise DataError(f"{source}: gap in alarm days for {key[2]} {key[1]}")
        series = AlarmSeries(
            topic=key[2],
            model=key[1],
            threshold=meta[key],
            start_day=start,
            statistics=tuple(r["statistic"] for r in rows),
            alarms=tuple(bool(r["alarm"]) for r in rows),
        )
        out.setdefault((key[0], key[1]), []).append(series)
    return out


@dataclass
class DetectOutput:
    alarm_rows: list[dict]
    alerts: dict[str, list[AlertRecord]]
    warnings: list[str]


def run_detect(m: RunManifest, frames: Sequence[EventFrame], reports: Sequence[SilverReport]) -> DetectOutput:
    warnings: list[str] = []
    day_range = resolve_range(m, frames)
    rows: list[dict] = []
    alerts: dict[str, list[AlertRecord]] = {name: [] for name in m.strata}
    if day_range is None:
        return DetectOutput(rows, alerts, warnings)
    for stratum, langs in m.strata.items():
        streams = build_streams(frames, reports, day_range, langs, m.topics, m.purge_singletons, warnings)
        for cfg, stream, alarms in detect_streams(streams, m.detectors, m.jobs):
            rows.extend(alarms_to_rows(stratum, alarms))
            alerts[stratum].extend(emit_alerts(alarms, stream.series, cfg, stream.per_language))
    return DetectOutput(rows, alerts, sorted(set(warnings)))


def evaluate_fused(
    m: RunManifest, frames: Sequence[EventFrame], reports: Sequence[SilverReport]
) -> tuple[dict[str, dict[str, EvalResult]], list[str]]:
    warnings: list[str] = []
    day_range = resolve_range(m, frames)
    results: dict[str, dict[str, EvalResult]] = {}
    if day_range is None:
        return results, warnings
    for stratum, langs in m.strata.items():
        streams = build_streams(frames, reports, day_range, langs, m.topics, m.purge_singletons, warnings)
        if not streams:
            continue
        detected = detect_streams(streams, m.detectors, m.jobs)
        results[stratum] = {}
        for cfg in m.detectors:
            pairs = [(a, s.reports) for c, s, a in detected if c is cfg]
            results[stratum][cfg.label] = evaluate_alarms(pairs)
    return results, sorted(set(warnings))


def evaluate_staged(
    alarm_groups: Mapping[tuple[str, str], Sequence[AlarmSeries]],
    reports: Sequence[SilverReport],
) -> tuple[dict[str, dict[str, EvalResult]], list[str]]:
    """Score previously written alarm files against the silver reports."""
    warnings: list[str] = []
    results: dict[str, dict[str, EvalResult]] = {}
    alarm_topics = {a.topic for group in alarm_groups.values() for a in group}
    for t in sorted({r.topic for r in reports} - alarm_topics):
        warnings.append(f"silver topic {t} has no event stream; skipped")
    for (stratum, label), group in alarm_groups.items():
        pairs = []
        for a in group:
            rng = DayRange(a.start_day, a.day(len(a) - 1))
            mine = []
            for r in sorted(reports):
                if r.topic != a.topic:
                    continue
                if r.report_day not in rng:
                    warnings.append(f"silver report {r.topic} {r.report_day} outside range; skipped")
                    continue
                mine.append(r)
            pairs.append((a, mine))
        results.setdefault(stratum, {})[label] = evaluate_alarms(pairs)
    return results, sorted(set(warnings))


def metrics_document(results: Mapping[str, Mapping[str, EvalResult]], warnings: Sequence[str]) -> str:
    doc = {
        "strata": {
            stratum: {label: r.to_dict() for label, r in rows.items()}
            for stratum, rows in results.items()
        },
        "warnings": list(warnings),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
