"""LLR number domains: float, sign-magnitude (SM) fixed point, two's-complement
(TC) fixed point and sign-magnitude IB indices.

Scalar dataclasses document the contracts; the ``*_array`` helpers are what the
decoders use on whole batches of frames.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


def max_magnitude(q: int) -> int:
    """Largest magnitude of a ``q``-bit sign-magnitude word."""
    return (1 << (q - 1)) - 1


@dataclass(frozen=True)
class SmFixed:
    sign: int
    mag: int
    q: int = 8

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mag <= max_magnitude(self.q):
            raise ValueError(f"magnitude {self.mag} does not fit {self.q}-bit SM")

    @property
    def value(self) -> int:
        return -self.mag if self.sign else self.mag


@dataclass(frozen=True)
class TcFixed:
    value: int
    width: int = 16

    def __post_init__(self):
        lo, hi = -(1 << (self.width - 1)), (1 << (self.width - 1)) - 1
        if not lo <= self.value <= hi:
            raise ValueError(f"{self.value} outside {self.width}-bit two's complement")


@dataclass(frozen=True)
class IbIndex:
    """Sign-magnitude IB index; a set sign bit means a negative LLR."""

    sign: int
    mag: int
    q: int = 4

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError(f"sign must be 0 or 1, got {self.sign}")
        if not 0 <= self.mag <= max_magnitude(self.q):
            raise ValueError(f"magnitude {self.mag} does not fit {self.q}-bit IB index")

    @property
    def index(self) -> int:
        """Position ``t`` in the LLR-ordered alphabet ``0 .. 2**q - 1``."""
        return index_from_sm(self.sign, self.mag, self.q)

    @property
    def code(self) -> int:
        """Hardware bit pattern: sign bit followed by the magnitude bits."""
        return (self.sign << (self.q - 1)) | self.mag

    @classmethod
    def from_index(cls, t: int, q: int) -> "IbIndex":
        sign, mag = sm_from_index(t, q)
        return cls(sign, mag, q)


def sm_to_tc(x: SmFixed, target_width: int) -> TcFixed:
    if target_width < x.q:
        raise ValueError(f"target width {target_width} narrower than SM width {x.q}")
    return TcFixed(x.value, target_width)


def tc_to_sm_saturating(x: TcFixed | int, q_fp: int) -> SmFixed:
    v = x.value if isinstance(x, TcFixed) else int(x)
    return SmFixed(int(v < 0), min(abs(v), max_magnitude(q_fp)), q_fp)


def saturating_add(a: TcFixed | int, b: TcFixed | int, width: int) -> TcFixed:
    va = a.value if isinstance(a, TcFixed) else int(a)
    vb = b.value if isinstance(b, TcFixed) else int(b)
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    return TcFixed(min(max(va + vb, lo), hi), width)


def index_from_sm(sign: int, mag: int, q: int) -> int:
    half = 1 << (q - 1)
    return half - 1 - mag if sign else half + mag


def sm_from_index(t: int, q: int) -> tuple[int, int]:
    half = 1 << (q - 1)
    if not 0 <= t < 2 * half:
        raise ValueError(f"index {t} outside 0..{2 * half - 1}")
    return (1, half - 1 - t) if t < half else (0, t - half)


def ib_table(q: int) -> list[tuple[int, str, str]]:
    """Rows ``(t, signed label, binary code)`` of the IB index mapping."""
    rows = []
    for t in range(1 << q):
        sign, mag = sm_from_index(t, q)
        label = f"-{mag}" if sign else f"{mag}"
        code = f"{sign} {mag:0{q - 1}b}"
        rows.append((t, label, code))
    return rows


class SmWord(NamedTuple):
    """A batch of sign-magnitude values: ``sign`` is 0/1, ``mag`` non-negative."""

    sign: np.ndarray
    mag: np.ndarray

    @property
    def shape(self):
        return self.mag.shape

    def __getitem__(self, key):
        return SmWord(self.sign[key], self.mag[key])


def sm_to_tc_array(word: SmWord) -> np.ndarray:
    mag = word.mag.astype(np.int32)
    return np.where(word.sign.astype(bool), -mag, mag)


def tc_to_sm_array(values: np.ndarray, q: int) -> SmWord:
    sign = (values < 0).astype(np.uint8)
    mag = np.minimum(np.abs(values), max_magnitude(q)).astype(np.int16)
    return SmWord(sign, mag)


def quantize_uniform(llr: np.ndarray, step: float, q: int) -> SmWord:
    """Uniform SM quantizer, ``|llr| / step`` rounded half up and saturated.

    Negative inputs that round to zero keep their sign bit (``-0``).
    """
    llr = np.asarray(llr, dtype=float)
    sign = np.signbit(llr).astype(np.uint8)
    mag = np.floor(np.abs(llr) / step + 0.5)
    mag = np.minimum(mag, max_magnitude(q)).astype(np.int16)
    return SmWord(sign, mag)
