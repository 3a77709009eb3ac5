"""Short-baseline aberration detectors: C2, C3, W2, F-statistic and EWMA.

Every model compares the target day against a 7-day baseline that ends a
2-day guard gap before it.  The per-day functions here are the readable
reference path; ``run_detector`` computes a whole series through the
compiled (or fallback) kernel in ``kernels``.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass, field, fields
from datetime import date, timedelta
from typing import Iterator, NamedTuple

from . import kernels
from .events import CountSeries, TopicKey

MODELS = ("C2", "C3", "W2", "FSTAT", "EWMA")
FSTAT_MODES = ("paper_literal_sum", "variance_ratio")

# thresholds tuned on held-out streams in the original study
PAPER_THRESHOLDS = {"C2": 0.2, "W2": 0.2, "C3": 0.3, "FSTAT": 0.6, "EWMA": 2.0}

C3_LAGS = 2


class DetectorError(ValueError):
    pass


class WarmupError(DetectorError):
    """Target day too early for a full baseline window."""


class DegenerateWindowError(DetectorError):
    """Weekend filtering left fewer than two baseline samples."""


class SeriesTooShortError(DetectorError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    model: str
    threshold: float
    baseline_len: int = 7
    guard_len: int = 2
    k: float = 1.0
    lam: float = 0.2
    min_sigma: float = 0.2
    c3_gate_sigma: float = 3.0
    fstat_test_len: int = 3
    fstat_combine: str = "paper_literal_sum"
    name: str | None = None

    def __post_init__(self):
        model = self.model.upper()
        if model in ("F", "F-STAT", "F_STAT", "FSTATISTIC"):
            model = "FSTAT"
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise DetectorError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if not 0.0 < self.lam < 1.0:
            raise DetectorError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.baseline_len < 2:
            raise DetectorError("baseline_len must be >= 2")
        if self.guard_len < 0:
            raise DetectorError("guard_len must be >= 0")
        if self.min_sigma <= 0:
            raise DetectorError("min_sigma must be > 0")
        if self.fstat_test_len < 1:
            raise DetectorError("fstat_test_len must be >= 1")
        if self.fstat_combine not in FSTAT_MODES:
            raise DetectorError(f"fstat_combine must be one of {FSTAT_MODES}")

    @classmethod
    def paper_default(cls, model: str, **overrides) -> "DetectorConfig":
        model = model.upper()
        return cls(model=model, threshold=PAPER_THRESHOLDS[model], **overrides)

    @property
    def label(self) -> str:
        return self.name or self.model

    @property
    def warmup(self) -> int:
        return self.baseline_len + self.guard_len

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        if d["name"] is None:
            del d["name"]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DetectorError(f"unknown config keys: {sorted(unknown)}")
        if "threshold" not in d and "model" in d:
            d["threshold"] = PAPER_THRESHOLDS[str(d["model"]).upper()]
        return cls(**d)


@dataclass(frozen=True)
class BaselineStats:
    mu: float
    sigma: float
    n: int
    window_days: tuple[date, ...] = field(default=())


class DayRecord(NamedTuple):
    day: date
    statistic: float | None
    alarm: bool


@dataclass(frozen=True)
class AlarmSeries:
    topic: TopicKey
    model: str
    threshold: float
    start_day: date
    statistics: tuple[float | None, ...]
    alarms: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.alarms)

    def day(self, index: int) -> date:
        return self.start_day + timedelta(days=index)

    def records(self) -> Iterator[DayRecord]:
        for i, (s, a) in enumerate(zip(self.statistics, self.alarms)):
            yield DayRecord(self.day(i), s, a)

    def alarm_days(self) -> list[date]:
        return [self.day(i) for i, a in enumerate(self.alarms) if a]

    @property
    def alarm_count(self) -> int:
        return sum(self.alarms)


def baseline_stats(
    series: CountSeries, t: int, cfg: DetectorConfig, weekdays_only: bool | None = None
) -> BaselineStats:
    """Mean and clamped sample standard deviation of the baseline window for day ``t``.

    The window is ``[t - guard_len - baseline_len, t - guard_len - 1]``.  W2
    drops Saturdays and Sundays from it.
    """
    if weekdays_only is None:
        weekdays_only = cfg.model == "W2"
    lo = t - cfg.guard_len - cfg.baseline_len
    if lo < 0 or t >= len(series):
        raise WarmupError(f"day index {t} has no complete baseline window")
    idx = range(lo, t - cfg.guard_len)
    if weekdays_only:
        idx = [i for i in idx if series.day(i).weekday() < 5]
    if len(idx) < 2:
        raise DegenerateWindowError(f"only {len(idx)} weekday samples before day index {t}")
    values = [series.counts[i] for i in idx]
    return BaselineStats(
        mu=statistics.fmean(values),
        sigma=max(cfg.min_sigma, statistics.stdev(values)),
        n=len(values),
        window_days=tuple(series.day(i) for i in idx),
    )


def c2_stat(count: float, base: BaselineStats, cfg: DetectorConfig) -> float:
    return max(0.0, (count - (base.mu + cfg.k * base.sigma)) / base.sigma)


def c3_stat(series: CountSeries, t: int, cfg: DetectorConfig) -> float:
    """C2 at ``t`` plus the C2 values of the two preceding days.

    A preceding day only contributes while its own count stays below its
    baseline mean plus ``c3_gate_sigma`` standard deviations.
    """
    base = baseline_stats(series, t, cfg, weekdays_only=False)
    total = c2_stat(series.counts[t], base, cfg)
    for lag in range(1, C3_LAGS + 1):
        try:
            prev = baseline_stats(series, t - lag, cfg, weekdays_only=False)
        except WarmupError:
            continue
        count = series.counts[t - lag]
        if count < prev.mu + cfg.c3_gate_sigma * prev.sigma:
            total += c2_stat(count, prev, cfg)
    return total


def w2_stat(series: CountSeries, t: int, cfg: DetectorConfig) -> float:
    base = baseline_stats(series, t, cfg, weekdays_only=True)
    return c2_stat(series.counts[t], base, cfg)


def f_stat(series: CountSeries, t: int, cfg: DetectorConfig) -> float:
    base = baseline_stats(series, t, cfg, weekdays_only=False)
    lo = t - cfg.fstat_test_len + 1
    if lo < 0:
        raise WarmupError(f"day index {t} has no complete test window")
    mu_b = base.mu
    window = series.counts[t - cfg.guard_len - cfg.baseline_len : t - cfg.guard_len]
    var_b = sum((c - mu_b) ** 2 for c in window) / len(window)
    test = series.counts[lo : t + 1]
    var_t = sum((c - mu_b) ** 2 for c in test) / len(test)
    if cfg.fstat_combine == "variance_ratio":
        return var_t / max(var_b, cfg.min_sigma**2)
    return var_t + var_b


def ewma_smoothed(counts, lam: float) -> list[float]:
    """Exponentially smoothed counts, seeded with the first observation."""
    out: list[float] = []
    for i, c in enumerate(counts):
        out.append(float(c) if i == 0 else lam * c + (1 - lam) * out[-1])
    return out


def ewma_stat(series: CountSeries, t: int, cfg: DetectorConfig) -> float:
    base = baseline_stats(series, t, cfg, weekdays_only=False)
    y = ewma_smoothed(series.counts[: t + 1], cfg.lam)[-1]
    return (y - base.mu) / (base.sigma * math.sqrt(cfg.lam / (2 - cfg.lam)))


def statistic(series: CountSeries, t: int, cfg: DetectorConfig) -> float:
    """The configured model's statistic for day index ``t``."""
    if t < cfg.warmup:
        raise WarmupError(f"day index {t} is inside the {cfg.warmup}-day warmup")
    if cfg.model == "C2":
        return c2_stat(series.counts[t], baseline_stats(series, t, cfg), cfg)
    if cfg.model == "C3":
        return c3_stat(series, t, cfg)
    if cfg.model == "W2":
        return w2_stat(series, t, cfg)
    if cfg.model == "FSTAT":
        return f_stat(series, t, cfg)
    return ewma_stat(series, t, cfg)


def run_detector(
    series: CountSeries, cfg: DetectorConfig, backend: str | None = None
) -> AlarmSeries:
    """Compute every day's statistic and flag days strictly above the threshold.

    Warmup days and degenerate W2 windows carry ``None`` and never alarm.
    """
    if len(series) <= cfg.warmup:
        raise SeriesTooShortError(
            f"series of {len(series)} days is too short for a {cfg.warmup}-day warmup"
        )
    raw = kernels.compute_statistics(series.counts, series.weekend_flags(), cfg, backend)
    stats = tuple(None if math.isnan(s) else float(s) for s in raw)
    alarms = tuple(s is not None and s > cfg.threshold for s in stats)
    return AlarmSeries(series.topic, cfg.label, cfg.threshold, series.start_day, stats, alarms)
