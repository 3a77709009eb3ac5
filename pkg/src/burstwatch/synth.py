"""Seeded synthetic news-event streams with injected outbreak bursts.

Stands in for the unavailable news corpus: Poisson background chatter per
language, a multi-day burst per stream, and one silver report placed a few
days into the burst.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .evaluation import SilverReport
from .events import LANGUAGES, DayRange, EventFrame, TopicKey

DISEASES = ("cholera", "dengue", "influenza", "measles", "fmd", "plague", "rabies", "anthrax")
COUNTRIES = (
    "ao", "br", "bo", "cn", "ro", "us", "vn", "th", "id", "ph",
    "kh", "la", "mm", "in", "ng", "cd", "ht", "pe", "mx", "eg",
)


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    start: date = date(2010, 1, 1)
    days: int = 129
    streams: int = 1
    background: float = 1.0
    magnitude: float = 10.0
    outbreak_day: int | None = None
    duration: int = 5
    report_lag: int = 3
    weekend_outage: bool = False
    languages: tuple[str, ...] = ("en",)
    coverage: float = 1.0

    def __post_init__(self):
        if self.background < 0 or self.magnitude < 0:
            raise ValueError("rates must be non-negative")
        if not 0.0 <= self.coverage <= 1.0:
            raise ValueError("coverage must lie in [0, 1]")
        if self.days < 1 or self.streams < 1 or self.duration < 1:
            raise ValueError("days, streams and duration must be positive")
        bad = set(self.languages) - LANGUAGES
        if bad or not self.languages:
            raise ValueError(f"bad language set {self.languages!r}")
        if self.outbreak_day is not None and not 0 <= self.outbreak_day < self.days:
            raise ValueError("outbreak_day outside the generated range")

    @property
    def day_range(self) -> DayRange:
        return DayRange(self.start, self.start + timedelta(days=self.days - 1))


def stream_topic(i: int) -> TopicKey:
    country = COUNTRIES[i] if i < len(COUNTRIES) else f"x{i}"
    return TopicKey(DISEASES[i % len(DISEASES)], country)


def generate_counts(spec: SynthSpec) -> tuple[dict[tuple[TopicKey, str], list[int]], list[SilverReport]]:
    """Per-(topic, language) daily counts plus the silver reports.

    Each language independently covers a stream's burst with probability
    ``coverage``; covered languages share the burst magnitude evenly.
    """
    rng = np.random.default_rng(spec.seed)
    counts: dict[tuple[TopicKey, str], list[int]] = {}
    reports: list[SilverReport] = []
    weekend = np.array([(spec.start + timedelta(days=d)).weekday() >= 5 for d in range(spec.days)])
    share = spec.magnitude / len(spec.languages)

    for i in range(spec.streams):
        topic = stream_topic(i)
        if spec.outbreak_day is not None:
            onset = spec.outbreak_day
        else:
            onset = int(rng.integers(20, max(21, spec.days - spec.duration - spec.report_lag)))
        burst = np.zeros(spec.days)
        burst[onset : onset + spec.duration] = 1.0
        for lang in spec.languages:
            covered = rng.random() < spec.coverage
            mean = spec.background + (share * burst if covered else 0.0)
            series = rng.poisson(mean * np.ones(spec.days))
            if spec.weekend_outage:
                series[weekend] = 0
            counts[(topic, lang)] = [int(c) for c in series]
        if spec.magnitude > 0:
            report_day = min(onset + spec.report_lag, spec.days - 1)
            reports.append(SilverReport(spec.start + timedelta(days=report_day), topic))
    return counts, reports


def generate(spec: SynthSpec) -> tuple[list[EventFrame], list[SilverReport]]:
    """Expand the synthetic counts into individual event frames."""
    counts, reports = generate_counts(spec)
    frames = []
    for d in range(spec.days):
        day = spec.start + timedelta(days=d)
        for (topic, lang), series in counts.items():
            frames.extend(
                EventFrame(topic.disease, topic.country, lang, day) for _ in range(series[d])
            )
    return frames, sorted(reports)


def frames_ndjson_with_hours(frames: list[EventFrame], seed: int) -> str:
    """NDJSON with deterministic pseudo-random download hours."""
    rng = np.random.default_rng(seed + 1)
    hours = rng.integers(0, 24, size=len(frames))
    out = []
    for f, h in zip(frames, hours):
        stamp = f"{f.observed_day.isoformat()}T{int(h):02d}:00:00Z"
        out.append(
            json.dumps(
                {"country": f.country, "disease": f.disease, "language": f.language, "timestamp": stamp},
                sort_keys=True,
            )
        )
    return "".join(line + "\n" for line in out)
