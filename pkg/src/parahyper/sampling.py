"""Deterministic low-discrepancy sample points in a coordinate box."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.stats import qmc

DEFAULT_BOX = ((-1.0, 1.0),) * 4
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 0


def normalize_box(box: Sequence[Sequence[float]] | None) -> tuple[tuple[float, float], ...]:
    if box is None:
        return DEFAULT_BOX
    out = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(out) != 4 or any(hi <= lo for lo, hi in out):
        raise ValueError(f"domain box must be four (lo, hi) pairs with lo < hi, got {box!r}")
    return out


def sample_points(n: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, box=None) -> np.ndarray:
    """``n`` scrambled Halton points in ``box``, shape (n, 4)."""
    if n < 1:
        raise ValueError("sample count must be at least 1")
    box = normalize_box(box)
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(n)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return qmc.scale(u, lo, hi)
