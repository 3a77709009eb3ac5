import itertools

import pytest
from hypothesis import given, settings, strategies as st

from burstwatch.detectors import DetectorConfig
from burstwatch.evaluation import SilverReport, evaluate_run
from burstwatch.tuning import (
    DEFAULT_LAMBDAS,
    DEFAULT_THRESHOLDS,
    TuneGrid,
    TuningError,
    evaluate_grid,
    grid_search,
)

from conftest import make_series

# found by exhaustive oracle evaluation: F1 is 1.0 at threshold 0.5 and 0.4 at 0.1
STREAM = [3, 1, 2, 3, 1, 1, 3, 1, 1, 1, 2, 3, 3, 2, 3, 3, 2, 1, 2, 3, 3, 2, 8, 1, 3, 3, 1, 2, 2, 3]
C2 = DetectorConfig.paper_default("C2")


def held_out():
    s = make_series(STREAM)
    return [(s, [SilverReport(s.day(24), s.topic)])]


def test_two_point_grid_f1_values():
    f1 = {t: evaluate_run(held_out(), DetectorConfig("C2", t)).f1 for t in (0.1, 0.5)}
    assert f1[0.5] == 1.0 and f1[0.1] == pytest.approx(0.4)


def test_picks_f1_maximum():
    assert grid_search(held_out(), TuneGrid("C2", (0.1, 0.5)), C2).threshold == 0.5


def test_singleton_grid():
    assert grid_search(held_out(), TuneGrid("C2", (0.2,)), C2).threshold == 0.2


def test_empty_grid_rejected():
    with pytest.raises(TuningError):
        TuneGrid("C2", ())


def test_no_alertable_events():
    s = make_series([0] * 30)
    with pytest.raises(TuningError, match="no alertable events"):
        grid_search([(s, [])], TuneGrid("C2", (0.2, 0.3)), C2)


def test_tie_broken_by_larger_threshold():
    # 0.5 .. 0.9 all give the same single true alarm
    cfg = grid_search(held_out(), TuneGrid("C2", (0.5, 0.6, 0.7)), C2)
    assert cfg.threshold == 0.7


def test_ewma_lambda_grid():
    grid = TuneGrid("EWMA", (1.0, 2.0), (0.2, 0.5))
    cfg = grid_search(held_out(), grid, DetectorConfig.paper_default("EWMA"))
    assert cfg.model == "EWMA" and cfg.lam in (0.2, 0.5) and cfg.threshold in (1.0, 2.0)
    assert len(evaluate_grid(held_out(), grid, DetectorConfig.paper_default("EWMA"))) == 4


def test_default_grids():
    assert DEFAULT_THRESHOLDS[0] == 0.1 and DEFAULT_THRESHOLDS[-1] == 3.0 and len(DEFAULT_THRESHOLDS) == 30
    assert DEFAULT_LAMBDAS == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    for v in (0.2, 0.3, 0.6, 2.0):
        assert v in DEFAULT_THRESHOLDS


@settings(max_examples=25, deadline=None)
@given(st.permutations([0.1, 0.3, 0.5, 0.8, 1.5, 2.5]))
def test_result_in_grid_and_order_invariant(order):
    cfg = grid_search(held_out(), TuneGrid("C2", tuple(order)), C2)
    assert cfg.threshold in order
    assert cfg == grid_search(held_out(), TuneGrid("C2", tuple(sorted(order))), C2)
