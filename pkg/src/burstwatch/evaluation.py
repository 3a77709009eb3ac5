"""Scoring alarms against a silver-standard report timeline.

A system alarm is a hit for a report if it falls on the report day or up to
seven days before it.  Counting rules:

* TP: qualifying windows holding at least one alarm day (once per window)
* FN: qualifying windows holding none
* FP: alarm days lying outside every window
* TN: quiet days lying outside every window
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Sequence

from .detectors import AlarmSeries, DetectorConfig, run_detector
from .events import CountSeries, DayRange, TopicKey

LEAD_DAYS = 7
PROPORTIONS = ("se", "sp", "ppv", "npv")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class SilverReport:
    report_day: date
    topic: TopicKey


@dataclass(frozen=True, order=True)
class QualifyingWindow:
    report_day: date
    topic: TopicKey

    @property
    def start_day(self) -> date:
        return self.report_day - timedelta(days=LEAD_DAYS)

    @property
    def end_day(self) -> date:
        return self.report_day

    def __contains__(self, day: object) -> bool:
        return isinstance(day, date) and self.start_day <= day <= self.end_day

    def days(self) -> list[date]:
        return [self.start_day + timedelta(days=i) for i in range(LEAD_DAYS + 1)]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    surveillance_days: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
            self.surveillance_days + other.surveillance_days,
        )


@dataclass
class EvalResult:
    counts: ConfusionCounts
    se: float | None
    sp: float | None
    ppv: float | None
    npv: float | None
    f1: float | None
    alarm_rate_per_100: float | None = None
    timeliness_days: float | None = None
    alarm_days: int = 0
    ci: dict[str, tuple[float, float] | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "tn": self.counts.tn,
            "surveillance_days": self.counts.surveillance_days,
            "alarm_days": self.alarm_days,
            "se": self.se,
            "sp": self.sp,
            "ppv": self.ppv,
            "npv": self.npv,
            "f1": self.f1,
            "alarms_per_100_days": self.alarm_rate_per_100,
            "timeliness_days": self.timeliness_days,
            "ci95": {k: (list(v) if v else None) for k, v in self.ci.items()},
        }


def read_silver_csv(lines: Iterable[str]) -> list[SilverReport]:
    """Read ``topic_disease,topic_country,report_date`` rows; a header row is optional."""
    reports = []
    for line_no, row in enumerate(csv.reader(list(lines)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if line_no == 1 and row[0].strip().lower() == "topic_disease":
            continue
        if len(row) != 3:
            raise EvaluationError(f"silver line {line_no}: expected 3 columns, got {len(row)}")
        try:
            day = date.fromisoformat(row[2].strip())
        except ValueError:
            raise EvaluationError(f"silver line {line_no}: bad date {row[2]!r}") from None
        reports.append(SilverReport(day, TopicKey(row[0], row[1])))
    return reports


def write_silver_csv(reports: Iterable[SilverReport]) -> str:
    lines = ["topic_disease,topic_country,report_date"]
    for r in sorted(reports, key=lambda r: (r.topic, r.report_day)):
        lines.append(f"{r.topic.disease},{r.topic.country},{r.report_day.isoformat()}")
    return "\n".join(lines) + "\n"


def qualifying_windows(reports: Iterable[SilverReport]) -> list[QualifyingWindow]:
    return [QualifyingWindow(r.report_day, r.topic) for r in sorted(reports)]


def _alarm_range(alarms: AlarmSeries) -> DayRange:
    return DayRange(alarms.start_day, alarms.day(len(alarms) - 1))


def confusion(
    alarms: AlarmSeries,
    windows: Sequence[QualifyingWindow],
    day_range: DayRange | None = None,
) -> ConfusionCounts:
    day_range = day_range or _alarm_range(alarms)
    for w in windows:
        if w.topic != alarms.topic:
            raise EvaluationError(f"window topic {w.topic} differs from alarm topic {alarms.topic}")
        if w.report_day not in day_range:
            raise EvaluationError(f"report day {w.report_day} outside {day_range.start}..{day_range.end}")
    fired = {d for d in alarms.alarm_days() if d in day_range}

    tp = sum(1 for w in windows if any(d in fired for d in w.days()))
    covered = {d for w in windows for d in w.days() if d in day_range}
    outside = len(day_range) - len(covered)
    fp = len(fired - covered)
    return ConfusionCounts(
        tp=tp,
        fp=fp,
        fn=len(windows) - tp,
        tn=outside - fp,
        surveillance_days=len(day_range),
    )


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def f1_score(se: float | None, ppv: float | None) -> float | None:
    """Harmonic mean of sensitivity and PPV."""
    if se is None or ppv is None:
        return None
    if se + ppv == 0:
        return 0.0
    return 2 * se * ppv / (se + ppv)


def wilson_ci(successes: int, trials: int, z: float = 1.96) -> tuple[float, float] | None:
    if trials <= 0:
        return None
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} not in [0, {trials}]")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo, hi = centre - half, centre + half
    # exact bounds at the edges; keeps the point estimate inside despite rounding
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return max(0.0, lo), min(1.0, hi)


def metrics(c: ConfusionCounts) -> EvalResult:
    se = _ratio(c.tp, c.tp + c.fn)
    sp = _ratio(c.tn, c.tn + c.fp)
    ppv = _ratio(c.tp, c.tp + c.fp)
    npv = _ratio(c.tn, c.tn + c.fn)
    ci = {
        "se": wilson_ci(c.tp, c.tp + c.fn),
        "sp": wilson_ci(c.tn, c.tn + c.fp),
        "ppv": wilson_ci(c.tp, c.tp + c.fp),
        "npv": wilson_ci(c.tn, c.tn + c.fn),
    }
    return EvalResult(c, se, sp, ppv, npv, f1_score(se, ppv), ci=ci)


def alarm_rate(alarm_days: int, surveillance_days: int) -> float:
    """Alarms per 100 surveillance days."""
    if surveillance_days <= 0:
        raise ValueError("surveillance_days must be positive")
    return 100.0 * alarm_days / surveillance_days


def window_leads(alarms: AlarmSeries, windows: Sequence[QualifyingWindow]) -> list[int]:
    """Days between each alarmed window's earliest alarm and its report."""
    fired = sorted(alarms.alarm_days())
    leads = []
    for w in windows:
        first = next((d for d in fired if d in w), None)
        if first is not None:
            leads.append((w.report_day - first).days)
    return leads


def timeliness(alarms: AlarmSeries, windows: Sequence[QualifyingWindow]) -> float | None:
    leads = window_leads(alarms, windows)
    return sum(leads) / len(leads) if leads else None


def evaluate_alarms(
    pairs: Sequence[tuple[AlarmSeries, Sequence[SilverReport]]],
) -> EvalResult:
    """Pool confusion counts, alarm days and leads over streams, then score once."""
    if not pairs:
        raise EvaluationError("need at least one stream")
    total = ConfusionCounts()
    n_alarms = 0
    leads: list[int] = []
    for alarms, reports in pairs:
        windows = qualifying_windows(reports)
        day_range = _alarm_range(alarms)
        total = total + confusion(alarms, windows, day_range)
        n_alarms += sum(1 for d in alarms.alarm_days() if d in day_range)
        leads.extend(window_leads(alarms, windows))
    result = metrics(total)
    result.alarm_days = n_alarms
    result.alarm_rate_per_100 = alarm_rate(n_alarms, total.surveillance_days)
    result.timeliness_days = sum(leads) / len(leads) if leads else None
    return result


def evaluate_run(
    streams: Sequence[tuple[CountSeries, Sequence[SilverReport]]],
    cfg: DetectorConfig,
    backend: str | None = None,
) -> EvalResult:
    """Run one detector config over every stream and pool the scores."""
    pairs = []
    for series, reports in streams:
        for r in reports:
            if r.topic != series.topic:
                raise EvaluationError(f"report topic {r.topic} differs from series topic {series.topic}")
        pairs.append((run_detector(series, cfg, backend), reports))
    return evaluate_alarms(pairs)


def _fmt(value: float | None, digits: int = 2) -> str:
    return "N/A" if value is None else f"{value:.{digits}f}"


def _fmt_ci(value: float | None, ci: tuple[float, float] | None) -> str:
    if value is None:
        return "N/A"
    if ci is None:
        return _fmt(value)
    return f"{value:.2f} ({ci[0]:.2f},{ci[1]:.2f})"


def render_table(rows: Sequence[tuple[str, EvalResult]], title: str | None = None) -> str:
    header = ["model", "Se", "Sp", "PPV", "NPV", "Alarms^A", "Days^B", "F1"]
    body = []
    for label, r in rows:
        body.append([
            label,
            _fmt_ci(r.se, r.ci.get("se")),
            _fmt_ci(r.sp, r.ci.get("sp")),
            _fmt_ci(r.ppv, r.ci.get("ppv")),
            _fmt_ci(r.npv, r.ci.get("npv")),
            _fmt(r.alarm_rate_per_100, 1),
            _fmt(r.timeliness_days, 1),
            _fmt(r.f1),
        ])
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = [title] if title else []
    for row in [header, *body]:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.append("^A model alarms per 100 days; ^B mean days alerts preceded reports")
    return "\n".join(lines) + "\n"
