"""Burst detection and alert scoring for multilingual news-event count streams."""

__version__ = "0.1.0"

from .detectors import (
    AlarmSeries,
    BaselineStats,
    DetectorConfig,
    PAPER_THRESHOLDS,
    baseline_stats,
    c2_stat,
    c3_stat,
    ewma_stat,
    f_stat,
    run_detector,
    w2_stat,
)
from .evaluation import (
    ConfusionCounts,
    EvalResult,
    QualifyingWindow,
    SilverReport,
    alarm_rate,
    confusion,
    evaluate_run,
    metrics,
    qualifying_windows,
    timeliness,
    wilson_ci,
)
from .events import (
    LANGUAGES,
    CountSeries,
    DayRange,
    EventFrame,
    TopicKey,
    aggregate_languages,
    bucket_counts,
    parse_event_frames,
    purge_singletons,
)
from .kernels import BACKEND
from .tuning import TuneGrid, grid_search
