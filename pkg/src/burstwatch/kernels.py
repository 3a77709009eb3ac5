"""Backend selection for the per-day statistic loop.

The compiled ``_kernels`` extension is used when importable; otherwise the
pure-Python ``_kernels_py`` takes over.  Set ``BURSTWATCH_PURE=1`` to force
the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

MODEL_CODES = {
    "C2": _kernels_py.C2,
    "C3": _kernels_py.C3,
    "W2": _kernels_py.W2,
    "FSTAT": _kernels_py.FSTAT,
    "EWMA": _kernels_py.EWMA,
}

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and os.environ.get("BURSTWATCH_PURE", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def compute_statistics(counts, weekend, cfg, backend: str | None = None) -> np.ndarray:
    """Per-day statistic for every index of ``counts``; NaN where undefined."""
    impl = BACKENDS[backend or BACKEND]
    c = np.ascontiguousarray(counts, dtype=np.float64)
    wk = np.ascontiguousarray(weekend, dtype=np.uint8)
    out = np.empty(c.shape[0], dtype=np.float64)
    impl.fill_statistics(
        c, wk, out,
        MODEL_CODES[cfg.model],
        cfg.baseline_len,
        cfg.guard_len,
        float(cfg.k),
        float(cfg.lam),
        float(cfg.min_sigma),
        float(cfg.c3_gate_sigma),
        cfg.fstat_test_len,
        cfg.fstat_combine == "variance_ratio",
    )
    return out
