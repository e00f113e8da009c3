"""Input validation helpers."""
from __future__ import annotations

import numpy as np

from .exceptions import EmptySample, NonPositiveData


def check_sample(data, min_size: int = 1) -> np.ndarray:
    """Return ``data`` as a 1-D float array of positive finite reals.

    Column vectors of shape ``(n, 1)`` are flattened, matching the
    ``X`` convention of scikit-learn estimators.

    Raises
    ------
    EmptySample
        Fewer than ``min_size`` observations.
    NonPositiveData
        Some value is non-positive, NaN or infinite; ``index`` names the first.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D sample or an (n, 1) column, got shape {x.shape}")
    if x.size < min_size:
        raise EmptySample(f"need at least {min_size} observations, got {x.size}")
    bad = ~((x > 0) & np.isfinite(x))
    if bad.any():
        i = int(np.argmax(bad))
        raise NonPositiveData(i, float(x[i]))
    return x
