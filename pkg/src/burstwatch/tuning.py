"""Threshold selection on held-out streams."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .detectors import DetectorConfig
from .evaluation import SilverReport, evaluate_run
from .events import CountSeries

DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 31))
DEFAULT_LAMBDAS = tuple(round(0.1 * i, 1) for i in range(1, 10))


class TuningError(ValueError):
    pass


@dataclass(frozen=True)
class TuneGrid:
    """Candidate thresholds (and EWMA smoothing weights).

    Candidates are stored sorted and de-duplicated, so the search does not
    depend on the order they were given in.
    """

    model: str
    thresholds: tuple[float, ...]
    lambdas: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.thresholds:
            raise TuningError("threshold grid is empty")
        object.__setattr__(self, "model", self.model.upper())
        object.__setattr__(self, "thresholds", tuple(sorted(set(map(float, self.thresholds)))))
        if self.lambdas is not None:
            if not self.lambdas:
                raise TuningError("lambda grid is empty")
            object.__setattr__(self, "lambdas", tuple(sorted(set(map(float, self.lambdas)))))

    def configs(self, base: DetectorConfig) -> list[DetectorConfig]:
        lambdas = self.lambdas if self.lambdas is not None else (base.lam,)
        return [
            replace(base, model=self.model, threshold=t, lam=lam)
            for lam in lambdas
            for t in self.thresholds
        ]


@dataclass(frozen=True)
class GridPoint:
    config: DetectorConfig
    f1: float | None
    timeliness_days: float | None
    se: float | None
    ppv: float | None
    alarms_per_100_days: float | None

    def to_dict(self) -> dict:
        return {
            "threshold": self.config.threshold,
            "lambda": self.config.lam,
            "f1": self.f1,
            "timeliness_days": self.timeliness_days,
            "se": self.se,
            "ppv": self.ppv,
            "alarms_per_100_days": self.alarms_per_100_days,
        }


def evaluate_grid(
    held_out: Sequence[tuple[CountSeries, Sequence[SilverReport]]],
    grid: TuneGrid,
    base_cfg: DetectorConfig,
) -> list[GridPoint]:
    if not held_out:
        raise TuningError("need at least one held-out stream")
    points = []
    for cfg in grid.configs(base_cfg):
        r = evaluate_run(held_out, cfg)
        points.append(GridPoint(cfg, r.f1, r.timeliness_days, r.se, r.ppv, r.alarm_rate_per_100))
    return points


def _rank(p: GridPoint):
    # F1, then earlier alerting, then the higher (quieter) threshold, then smaller lambda
    lead = p.timeliness_days if p.timeliness_days is not None else float("-inf")
    return (p.f1, lead, p.config.threshold, -p.config.lam)


def best_point(points: Sequence[GridPoint]) -> GridPoint:
    scored = [p for p in points if p.f1 is not None]
    if not scored:
        raise TuningError("no alertable events in held-out data")
    return max(scored, key=_rank)


def grid_search(
    held_out: Sequence[tuple[CountSeries, Sequence[SilverReport]]],
    grid: TuneGrid,
    base_cfg: DetectorConfig,
) -> DetectorConfig:
    """Return the grid config with the best pooled F1 on ``held_out``."""
    return best_point(evaluate_grid(held_out, grid, base_cfg)).config
