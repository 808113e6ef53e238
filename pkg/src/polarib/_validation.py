"""Input checks shared by the estimators and the simulation harness."""
from __future__ import annotations

import numpy as np


def check_llrs(llrs, width: int) -> np.ndarray:
    """Return ``llrs`` as a finite float array of shape ``(frames, width)``."""
    arr = np.asarray(llrs, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"expected LLRs of shape (frames, {width}), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("LLRs must be finite")
    return arr


def check_bits(bits, width: int) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"expected bits of shape (frames, {width}), got {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    return arr.astype(np.uint8)
